#include "qfc/domain.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace qfc {

namespace {

void require_finite(double value, const char* name) {
    if (!std::isfinite(value)) {
        throw std::invalid_argument(std::string("DeviceParams: ") + name + " must be finite");
    }
}

void require_positive(double value, const char* name, const char* owner) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << owner << ": " << name << " must be positive and finite (got " << value << ")";
        throw std::invalid_argument(os.str());
    }
}

}  // namespace

std::string_view to_string(PmfKind kind) noexcept {
    return kind == PmfKind::gaussian ? "gaussian" : "sinc";
}

PmfKind pmf_kind_from_string(std::string_view name) {
    if (name == "gaussian") return PmfKind::gaussian;
    if (name == "sinc") return PmfKind::sinc;
    throw std::invalid_argument("unknown PMF kind '" + std::string(name) +
                                "' (expected gaussian or sinc)");
}

void DeviceParams::validate() const {
    require_finite(s_a, "s_a");
    require_finite(s_b, "s_b");
    require_finite(s_p, "s_p");
    require_positive(tau, "tau", "DeviceParams");
    require_positive(gamma, "gamma", "DeviceParams");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw std::invalid_argument("DeviceParams: epsilon must be finite and >= 0");
    }
    if (poling_period) require_positive(*poling_period, "poling_period", "DeviceParams");
}

void PhysicalParams::validate() const {
    constexpr const char* owner = "PhysicalParams";
    require_positive(chi2, "chi2", owner);
    require_positive(L, "L", owner);
    require_positive(U0, "U0", owner);
    require_positive(A, "A", owner);
    require_positive(n_a, "n_a", owner);
    require_positive(n_b, "n_b", owner);
    require_positive(n_c, "n_c", owner);
    require_positive(omega_bar_a, "omega_bar_a", owner);
    require_positive(omega_bar_b, "omega_bar_b", owner);
    require_positive(omega_bar_p, "omega_bar_p", owner);
    require_positive(tau, "tau", owner);
    if (std::abs(omega_bar_b - omega_bar_a - omega_bar_p) > 1e-9 * omega_bar_b) {
        throw std::invalid_argument(
            "PhysicalParams: center frequencies must satisfy omega_b = omega_a + omega_p");
    }
}

FrequencyGrid::FrequencyGrid(double center, double half_width, int n_points)
    : center_(center), half_width_(half_width), n_points_(n_points) {
    if (n_points < 2) throw std::invalid_argument("FrequencyGrid: n_points must be >= 2");
    if (!(half_width > 0.0) || !std::isfinite(half_width) || !std::isfinite(center)) {
        throw std::invalid_argument("FrequencyGrid: half_width must be positive and finite");
    }
}

double FrequencyGrid::weight() const noexcept { return std::sqrt(spacing()); }

Eigen::VectorXd FrequencyGrid::points() const {
    Eigen::VectorXd x(n_points_);
    for (int j = 0; j < n_points_; ++j) x(j) = point(j);
    return x;
}

WavePacket::WavePacket(FrequencyGrid grid, Eigen::VectorXcd amplitudes)
    : grid_(grid), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != grid_.size()) {
        throw std::invalid_argument("WavePacket: amplitude count differs from grid size");
    }
    const double n2 = amplitudes_.squaredNorm();
    if (std::abs(n2 - 1.0) > norm_tolerance) {
        std::ostringstream os;
        os << "WavePacket: amplitudes not normalized (norm^2 = " << n2 << ")";
        throw std::invalid_argument(os.str());
    }
}

WavePacket WavePacket::from_function(const FrequencyGrid& grid,
                                     const std::function<cdouble(double)>& f) {
    Eigen::VectorXcd amp(grid.size());
    const double w = grid.weight();
    for (int j = 0; j < grid.size(); ++j) amp(j) = f(grid.point(j)) * w;
    const double n = amp.norm();
    if (!(n > 0.0)) throw std::invalid_argument("WavePacket: function vanishes on the grid");
    amp /= n;
    return WavePacket(grid, std::move(amp));
}

double pump_amplitude(const DeviceParams& params, double delta_omega_p) {
    const double t = params.tau;
    return t * std::exp(-t * t * delta_omega_p * delta_omega_p) / std::sqrt(std::numbers::pi);
}

double phase_mismatch(const DeviceParams& params, double delta_omega_a, double delta_omega_b,
                      double delta_omega_p) noexcept {
    return params.s_b * delta_omega_b - params.s_a * delta_omega_a - params.s_p * delta_omega_p;
}

double pmf_of_mismatch(const DeviceParams& params, double mismatch) {
    if (params.pmf_kind == PmfKind::gaussian) return std::exp(-mismatch * mismatch);
    const double x = mismatch / std::sqrt(params.gamma);
    if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

double pmf_value(const DeviceParams& params, double delta_omega_a, double delta_omega_b,
                 double delta_omega_p) {
    return pmf_of_mismatch(params,
                           phase_mismatch(params, delta_omega_a, delta_omega_b, delta_omega_p));
}

MuParameters mu_parameters(const DeviceParams& params) {
    const double tau2 = params.tau * params.tau;
    const double da = params.s_p - params.s_a;
    const double db = params.s_p - params.s_b;

    MuParameters mu;
    mu.mu_sq = tau2 + da * db;
    const double mua2 = tau2 + da * da;
    const double mub2 = tau2 + db * db;
    mu.mu_a = std::sqrt(mua2);
    mu.mu_b = std::sqrt(mub2);
    mu.r0_tilde = std::numbers::sqrt2 * std::numbers::pi * params.tau / std::sqrt(mu.mu_a * mu.mu_b);

    // mu_a^2 mu_b^2 - mu^4 = tau^2 (s_a - s_b)^2 >= 0
    const double gap = mua2 * mub2 - mu.mu_sq * mu.mu_sq;
    if (gap > 1e-14 * mua2 * mub2) {
        mu.schmidt_count = mu.mu_a * mu.mu_b / std::sqrt(gap);
        mu.schmidt_count_infinite = false;
    } else {
        mu.schmidt_count = 0.0;
        mu.schmidt_count_infinite = true;
    }
    return mu;
}

double epsilon_from_physical(const PhysicalParams& p) {
    p.validate();
    constexpr double epsilon0 = 8.8541878128e-12;  // F/m
    constexpr double c = 299792458.0;              // m/s
    constexpr double pi = std::numbers::pi;
    const double num = std::numbers::sqrt2 * p.U0 * pi * p.omega_bar_b * p.omega_bar_a;
    const double den = std::sqrt(pi) * std::pow(4.0 * pi, 3) * epsilon0 * p.A * c * c * c * p.n_a *
                       p.n_b * p.n_c * p.tau;
    return 2.0 * p.L * p.chi2 * std::sqrt(num / den);
}

double gaussian_hermite_mode(int order, double x) {
    if (order < 0) throw std::invalid_argument("gaussian_hermite_mode: order must be >= 0");
    // psi_n(x) = 2^(1/4) h_n(sqrt(2) x), h_n the normalized Hermite functions.
    const double y = std::numbers::sqrt2 * x;
    double prev = 0.0;
    double cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * y * y);
    for (int n = 0; n < order; ++n) {
        const double next = std::sqrt(2.0 / (n + 1)) * y * cur - std::sqrt(double(n) / (n + 1)) * prev;
        prev = cur;
        cur = next;
    }
    return std::pow(2.0, 0.25) * cur;
}

DeviceGrids default_grids(const DeviceParams& params, const GridSettings& settings) {
    const MuParameters mu = mu_parameters(params);
    return {FrequencyGrid(0.0, settings.half_width_factor / mu.mu_a, settings.n_points),
            FrequencyGrid(0.0, settings.half_width_factor / mu.mu_b, settings.n_points)};
}

WavePacket hermite_photon(const DeviceParams& params, const FrequencyGrid& grid_a, int order) {
    const double mu_a = mu_parameters(params).mu_a;
    return WavePacket::from_function(
        grid_a, [&](double w) { return cdouble(gaussian_hermite_mode(order, mu_a * w), 0.0); });
}

}  // namespace qfc
