// domain.hpp - device parameters, analytic pump/phase-matching functions,
// frequency grids and single-photon wave packets.
//
// All frequencies are detunings from the center frequencies that satisfy
// exact energy and momentum conservation. Times are in the reciprocal unit.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qfc {

using cdouble = std::complex<double>;

enum class PmfKind { gaussian, sinc };

std::string_view to_string(PmfKind kind) noexcept;
PmfKind pmf_kind_from_string(std::string_view name);

struct DeviceParams {
    double s_a = 0.5;  // group-delay parameters sqrt(gamma) L / (2 v_i)
    double s_b = 3.0;
    double s_p = 1.0;
    double tau = 1.0;  // pump duration
    double gamma = 0.193;
    double epsilon = 0.0;
    PmfKind pmf_kind = PmfKind::gaussian;
    std::optional<double> poling_period;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;

    DeviceParams with_epsilon(double eps) const {
        DeviceParams p = *this;
        p.epsilon = eps;
        return p;
    }
};

// Laboratory quantities entering the coupling constant. Angular frequencies
// in rad/s, lengths in m, energy in J, area in m^2.
struct PhysicalParams {
    double chi2 = 0.0;
    double L = 0.0;
    double U0 = 0.0;
    double A = 0.0;
    double n_a = 0.0;
    double n_b = 0.0;
    double n_c = 0.0;  // taken as the index at the pump center frequency
    double omega_bar_a = 0.0;
    double omega_bar_b = 0.0;
    double omega_bar_p = 0.0;
    double tau = 0.0;

    void validate() const;
};

struct MuParameters {
    double mu_sq = 0.0;  // may be negative
    double mu_a = 0.0;
    double mu_b = 0.0;
    double r0_tilde = 0.0;
    double schmidt_count = 1.0;        // meaningful only when !schmidt_count_infinite
    bool schmidt_count_infinite = false;
};

// Uniform discretization of one frequency continuum. Mode weights sqrt(dw)
// are folded into every matrix and wave packet built on the grid.
class FrequencyGrid {
public:
    FrequencyGrid(double center, double half_width, int n_points);

    double center() const noexcept { return center_; }
    double half_width() const noexcept { return half_width_; }
    int size() const noexcept { return n_points_; }
    double spacing() const noexcept { return 2.0 * half_width_ / (n_points_ - 1); }
    double weight() const noexcept;
    // Detuning of sample j.
    double point(int j) const noexcept { return center_ - half_width_ + j * spacing(); }
    Eigen::VectorXd points() const;

    bool operator==(const FrequencyGrid& other) const noexcept = default;

private:
    double center_;
    double half_width_;
    int n_points_;
};

// Single-photon spectral amplitude on a grid; amplitudes include sqrt(dw), so
// the discrete l2 norm is the continuum L2 norm.
class WavePacket {
public:
    static constexpr double norm_tolerance = 1e-10;

    WavePacket(FrequencyGrid grid, Eigen::VectorXcd amplitudes);

    // Samples f on the grid, applies the mode weight and normalizes.
    static WavePacket from_function(const FrequencyGrid& grid,
                                    const std::function<cdouble(double)>& f);

    const FrequencyGrid& grid() const noexcept { return grid_; }
    const Eigen::VectorXcd& amplitudes() const noexcept { return amplitudes_; }

private:
    FrequencyGrid grid_;
    Eigen::VectorXcd amplitudes_;
};

struct GridSettings {
    int n_points = 128;
    double half_width_factor = 6.0;  // half width = factor / mu_i
};

struct DeviceGrids {
    FrequencyGrid a;
    FrequencyGrid b;
};

// alpha(dw_p) = tau exp(-tau^2 dw_p^2) / sqrt(pi)
double pump_amplitude(const DeviceParams& params, double delta_omega_p);

// Phase mismatch D = s_b dw_b - s_a dw_a - s_p dw_p.
double phase_mismatch(const DeviceParams& params, double delta_omega_a, double delta_omega_b,
                      double delta_omega_p) noexcept;

// Gaussian kind: exp(-D^2). Sinc kind: sin(x)/x with x = D / sqrt(gamma).
double pmf_value(const DeviceParams& params, double delta_omega_a, double delta_omega_b,
                 double delta_omega_p);
double pmf_of_mismatch(const DeviceParams& params, double mismatch);

MuParameters mu_parameters(const DeviceParams& params);

double epsilon_from_physical(const PhysicalParams& p);

// Orthonormal Hermite-Gaussian family with the exp(-x^2) width convention;
// order 0 is exp(-x^2) / (pi/2)^(1/4).
double gaussian_hermite_mode(int order, double x);

// Default grids: half width factor / mu_a and factor / mu_b around zero detuning.
DeviceGrids default_grids(const DeviceParams& params, const GridSettings& settings = {});

// Photon of Hermite-Gaussian order n in the variable mu_a * dw_a.
WavePacket hermite_photon(const DeviceParams& params, const FrequencyGrid& grid_a, int order = 0);

}  // namespace qfc
