// coupling.hpp - first-order joint conversion amplitude and the
// time-dependent one-particle coupling of the frequency-conversion Hamiltonian.
//
// Conventions. The one-particle state is (psi_a, psi_b) with grid weights
// folded in. At time t the Schroedinger generator is the Hermitian block
// matrix {{0, m^dag}, {m, 0}} with
//
//   m(w_b, w_a; t) = -eps e^{i (w_b - w_a) t} P(w_a, w_b, t) sqrt(dw_a dw_b),
//   P = int dw_p alpha(w_p) e^{-i w_p t} Phi(D(w_a, w_b, w_p)).
//
// Its time integral is 2 pi J1 (weighted), so exp of the first Magnus term has
// the (b, a) block -i 2 pi J1 and the Schmidt numbers of J1 are 2 pi sigma.

#pragma once

#include "qfc/domain.hpp"

#include <optional>

namespace qfc {

struct JcaMatrix {
    FrequencyGrid grid_a;
    FrequencyGrid grid_b;
    Eigen::MatrixXcd values;  // N_b x N_a, row = w_b sample
    bool weighted = true;     // sqrt(dw_a dw_b) folded into values

    // Kernel values without the mode weights.
    Eigen::MatrixXcd kernel() const;
};

struct CouplingMatrix {
    double time = 0.0;
    Eigen::MatrixXcd values;  // N_b x N_a, weighted
};

struct TimeWindow {
    double half_width;  // integrate over [-half_width, half_width]
};

// Horizon covering pump envelope and walk-off:
// 8 max(tau, |s_p - s_a|, |s_p - s_b|, mu_a, mu_b), widened when the absolute
// group delay of the pump stretches the per-entry envelope (see decisions in
// the README).
TimeWindow default_time_window(const DeviceParams& params, double factor = 8.0);

struct CoverageCheck {
    // Largest allowed |boundary value| / |peak|; nullopt disables the check.
    std::optional<double> max_edge_to_peak = 1e-12;
};

// -eps alpha(w_b - w_a) Phi(D at w_p = w_b - w_a), closed form for the
// Gaussian PMF, sampled with mode weights.
JcaMatrix build_j1(const DeviceParams& params, const FrequencyGrid& grid_a,
                   const FrequencyGrid& grid_b, const CoverageCheck& coverage = {});

struct PumpQuadrature {
    double half_width_factor = 8.0;  // pump window = factor / tau
    int nodes_per_panel = 8;
    int min_panels = 32;
};

// Evaluates m(t). Hot path: the Gaussian PMF uses the closed-form pump
// integral, precomputed per (params, grids).
class CouplingModel {
public:
    CouplingModel(const DeviceParams& params, const FrequencyGrid& grid_a,
                  const FrequencyGrid& grid_b, const PumpQuadrature& pump = {});

    const DeviceParams& params() const noexcept { return params_; }
    const FrequencyGrid& grid_a() const noexcept { return grid_a_; }
    const FrequencyGrid& grid_b() const noexcept { return grid_b_; }

    // Writes m(t) into out (resized to N_b x N_a).
    void evaluate(double t, Eigen::MatrixXcd& out) const;
    Eigen::MatrixXcd evaluate(double t) const {
        Eigen::MatrixXcd m;
        evaluate(t, m);
        return m;
    }

private:
    void evaluate_gaussian(double t, Eigen::MatrixXcd& out) const;
    void evaluate_quadrature(double t, Eigen::MatrixXcd& out) const;

    DeviceParams params_;
    FrequencyGrid grid_a_;
    FrequencyGrid grid_b_;
    PumpQuadrature pump_;
    Eigen::VectorXd wa_;
    Eigen::VectorXd wb_;
    // Gaussian closed form: -eps w tau/sqrt(A) exp(-c^2 tau^2 / A), c = s_b w_b - s_a w_a.
    Eigen::MatrixXd static_envelope_;
    double A_ = 0.0;
};

CouplingMatrix coupling_at_time(const DeviceParams& params, const FrequencyGrid& grid_a,
                                const FrequencyGrid& grid_b, double t);

// Brute-force pump integral for any PMF kind (composite Gauss-Legendre over
// a pump window). Used by the sinc path and as the oracle for the Gaussian
// closed form.
CouplingMatrix coupling_at_time_quadrature(const DeviceParams& params, const FrequencyGrid& grid_a,
                                           const FrequencyGrid& grid_b, double t,
                                           const PumpQuadrature& pump = {});

struct TimeQuadrature {
    int panels = 32;
    int nodes_per_panel = 16;
    double relative_tolerance = 1e-10;  // step-doubling convergence check
};

// int dt m(t) over the window; equals 2 pi J1 (weighted) for a covering window.
// Throws ConvergenceError when doubling the panel count changes the result
// by more than the relative tolerance.
Eigen::MatrixXcd integrate_coupling(const DeviceParams& params, const FrequencyGrid& grid_a,
                                    const FrequencyGrid& grid_b, const TimeWindow& window,
                                    const TimeQuadrature& quadrature = {});

}  // namespace qfc
