// propagate.hpp - exact time-ordered one-particle evolution, Magnus
// generators up to third order and the BCH-factorized effective JCA.
//
// Matrices act on the stacked vector (psi_a, psi_b); a block comes first.

#pragma once

#include "qfc/coupling.hpp"

#include <optional>

namespace qfc {

class OneParticleUnitary {
public:
    OneParticleUnitary(FrequencyGrid grid_a, FrequencyGrid grid_b, Eigen::MatrixXcd matrix);

    static OneParticleUnitary identity(const FrequencyGrid& grid_a, const FrequencyGrid& grid_b);

    const FrequencyGrid& grid_a() const noexcept { return grid_a_; }
    const FrequencyGrid& grid_b() const noexcept { return grid_b_; }
    int na() const noexcept { return grid_a_.size(); }
    int nb() const noexcept { return grid_b_.size(); }
    const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }

    auto aa() const { return matrix_.topLeftCorner(na(), na()); }
    auto ab() const { return matrix_.topRightCorner(na(), nb()); }
    auto ba() const { return matrix_.bottomLeftCorner(nb(), na()); }
    auto bb() const { return matrix_.bottomRightCorner(nb(), nb()); }

    // Operator norm of U^dag U - I.
    double unitarity_defect() const;

    // Max-norm change observed when the step count was doubled (0 if unchecked).
    double convergence_estimate = 0.0;

private:
    FrequencyGrid grid_a_;
    FrequencyGrid grid_b_;
    Eigen::MatrixXcd matrix_;
};

// exp(-i h {{0, C^dag}, {C, 0}}) for C of shape N_b x N_a, built from the
// eigen-decomposition of the smaller Gram matrix.
Eigen::MatrixXcd block_rotation(const Eigen::MatrixXcd& coupling, double h);

// exp(G) for anti-Hermitian G.
Eigen::MatrixXcd expm_antihermitian(const Eigen::MatrixXcd& generator);

// Principal logarithm of a unitary via its Schur form.
Eigen::MatrixXcd unitary_log(const Eigen::MatrixXcd& unitary);

enum class Integrator {
    midpoint,        // one exponential per slice at the midpoint, order 2
    cf4,             // commutator-free 4th order, two Gauss nodes
    cf4_triple_jump  // symmetric triple-jump composition of cf4, order 6
};

std::string_view to_string(Integrator integrator) noexcept;
Integrator integrator_from_string(std::string_view name);
int integrator_order(Integrator integrator) noexcept;

struct OracleOptions {
    std::optional<TimeWindow> window;  // default_time_window(params) when empty
    int n_steps = 512;                 // slices over [-T, T]; even, >= 64
    Integrator integrator = Integrator::cf4_triple_jump;
    // Doubling n_steps must change U by less than this (max-norm); nullopt
    // skips the second run.
    std::optional<double> convergence_tolerance = 1e-8;
    double unitarity_tolerance = 1e-10;
    // Builds U = V V^T from the forward half V = U(T, 0); exact for real pump
    // and PMF, where m(-t) = conj(m(t)).
    bool use_time_reversal = true;
};

// Ordered product of per-slice exponentials, no convergence or unitarity check.
OneParticleUnitary propagate_slices(const CouplingModel& model, const TimeWindow& window,
                                    int n_steps, Integrator integrator, bool use_time_reversal);

// Exact (to integrator accuracy) T exp(-i int H dt) on the one-photon sector.
// Throws ConvergenceError or UnitarityError.
OneParticleUnitary time_ordered_unitary(const DeviceParams& params, const FrequencyGrid& grid_a,
                                        const FrequencyGrid& grid_b,
                                        const OracleOptions& options = {});

struct MagnusOptions {
    std::optional<TimeWindow> window;
    int order = 3;
    int panels = 24;
    int nodes_per_panel = 16;
    // Absolute max-entry change of any generator when the panel count is
    // doubled; nullopt skips the refinement run.
    std::optional<double> tolerance = 1e-10;
};

struct MagnusGenerators {
    FrequencyGrid grid_a;
    FrequencyGrid grid_b;
    Eigen::MatrixXcd omega1;  // off-diagonal blocks only
    Eigen::MatrixXcd omega2;  // diagonal blocks only
    Eigen::MatrixXcd omega3;  // off-diagonal blocks only
    int order = 3;
    int panels = 0;
    int nodes_per_panel = 0;
    double truncation_error = 0.0;

    Eigen::MatrixXcd sum() const { return omega1 + omega2 + omega3; }
};

// Omega_1 = int A, Omega_2 = 1/2 int int_{t1>t2} [A1, A2],
// Omega_3 = 1/6 int int int_{t1>t2>t3} ([A1,[A2,A3]] + [A3,[A2,A1]]), A = -iH,
// evaluated through the cumulative form Omega_2' = [A, Omega_1(t)]/2,
// Omega_3' = [A, Omega_2(t)]/2 + [Omega_1(t), [Omega_1(t), A]]/12 with spectral
// panel integration.
MagnusGenerators magnus_generators(const DeviceParams& params, const FrequencyGrid& grid_a,
                                   const FrequencyGrid& grid_b, const MagnusOptions& options = {});

// JCA of the beam-splitter factor in U ~ e^{Omega_2} e^{Omega_1 + Omega_3 + [Omega_1, Omega_2]/2}.
// An odd generator with (b, a) block X corresponds to the kernel J = i X / (2 pi).
struct EffectiveJca {
    FrequencyGrid grid_a;
    FrequencyGrid grid_b;
    Eigen::MatrixXcd values;  // J1 + J3 + i K3, weighted
    Eigen::MatrixXcd j1;
    Eigen::MatrixXcd j3;
    Eigen::MatrixXcd k3;
};

EffectiveJca effective_jca(const MagnusGenerators& gens, const JcaMatrix& j1);

// exp(-2 pi i {{0, J^dag}, {J, 0}}) for a weighted JCA: exp(Omega_1) for J1,
// the beam-splitter unitary for the effective JCA.
OneParticleUnitary beam_splitter_unitary(const FrequencyGrid& grid_a, const FrequencyGrid& grid_b,
                                         const Eigen::MatrixXcd& jca);

}  // namespace qfc
