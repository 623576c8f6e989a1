#include "qfc/coupling.hpp"

#include "qfc/errors.hpp"
#include "qfc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qfc {

namespace {

double weight_product(const FrequencyGrid& ga, const FrequencyGrid& gb) {
    return std::sqrt(ga.spacing() * gb.spacing());
}

double edge_to_peak(const Eigen::MatrixXcd& m) {
    const double peak = m.cwiseAbs().maxCoeff();
    if (peak == 0.0) return 0.0;
    const Eigen::Index r = m.rows() - 1, c = m.cols() - 1;
    double edge = 0.0;
    edge = std::max(edge, m.row(0).cwiseAbs().maxCoeff());
    edge = std::max(edge, m.row(r).cwiseAbs().maxCoeff());
    edge = std::max(edge, m.col(0).cwiseAbs().maxCoeff());
    edge = std::max(edge, m.col(c).cwiseAbs().maxCoeff());
    return edge / peak;
}

}  // namespace

Eigen::MatrixXcd JcaMatrix::kernel() const {
    if (!weighted) return values;
    return values / weight_product(grid_a, grid_b);
}

TimeWindow default_time_window(const DeviceParams& params, double factor) {
    const MuParameters mu = mu_parameters(params);
    const double tau = params.tau;
    if (params.pmf_kind == PmfKind::gaussian) {
        // per-entry envelope is exp(-t^2 / (4 (tau^2 + s_p^2)))
        const double pump_frame = 1.5 * std::sqrt(tau * tau + params.s_p * params.s_p);
        const double scale = std::max({tau, std::abs(params.s_p - params.s_a),
                                       std::abs(params.s_p - params.s_b), mu.mu_a, mu.mu_b,
                                       pump_frame});
        return {factor * scale};
    }
    // sinc: walk-off box has half width |s_i| / sqrt(gamma), smoothed by the pump
    const double g = std::sqrt(params.gamma);
    const double scale = std::max({tau, std::abs(params.s_p - params.s_a) / g,
                                   std::abs(params.s_p - params.s_b) / g, mu.mu_a, mu.mu_b});
    return {std::max(factor * scale, std::abs(params.s_p) / g + 12.0 * tau)};
}

JcaMatrix build_j1(const DeviceParams& params, const FrequencyGrid& grid_a,
                   const FrequencyGrid& grid_b, const CoverageCheck& coverage) {
    params.validate();
    const int na = grid_a.size(), nb = grid_b.size();
    const double w = weight_product(grid_a, grid_b);
    JcaMatrix j1{grid_a, grid_b, Eigen::MatrixXcd(nb, na), true};

    if (params.pmf_kind == PmfKind::gaussian) {
        const MuParameters mu = mu_parameters(params);
        const double pref = -params.epsilon * params.tau / std::sqrt(std::numbers::pi) * w;
        const double mua2 = mu.mu_a * mu.mu_a, mub2 = mu.mu_b * mu.mu_b;
        for (int ia = 0; ia < na; ++ia) {
            const double a = grid_a.point(ia);
            for (int ib = 0; ib < nb; ++ib) {
                const double b = grid_b.point(ib);
                j1.values(ib, ia) = pref * std::exp(2.0 * mu.mu_sq * a * b - mua2 * a * a - mub2 * b * b);
            }
        }
    } else {
        for (int ia = 0; ia < na; ++ia) {
            const double a = grid_a.point(ia);
            for (int ib = 0; ib < nb; ++ib) {
                const double b = grid_b.point(ib);
                j1.values(ib, ia) = -params.epsilon * w * pump_amplitude(params, b - a) *
                                    pmf_value(params, a, b, b - a);
            }
        }
    }

    if (coverage.max_edge_to_peak) {
        const double ratio = edge_to_peak(j1.values);
        if (ratio > *coverage.max_edge_to_peak) {
            std::ostringstream os;
            os << "build_j1: grid does not cover the amplitude (edge/peak = " << ratio
               << ", allowed " << *coverage.max_edge_to_peak << ")";
            throw GridCoverageError(os.str(), ratio);
        }
    }
    return j1;
}

CouplingModel::CouplingModel(const DeviceParams& params, const FrequencyGrid& grid_a,
                             const FrequencyGrid& grid_b, const PumpQuadrature& pump)
    : params_(params), grid_a_(grid_a), grid_b_(grid_b), pump_(pump),
      wa_(grid_a.points()), wb_(grid_b.points()) {
    params_.validate();
    if (params_.pmf_kind == PmfKind::gaussian) {
        const double tau = params_.tau;
        A_ = tau * tau + params_.s_p * params_.s_p;
        const double pref = -params_.epsilon * weight_product(grid_a, grid_b) * tau / std::sqrt(A_);
        static_envelope_.resize(grid_b.size(), grid_a.size());
        for (int ia = 0; ia < grid_a.size(); ++ia) {
            for (int ib = 0; ib < grid_b.size(); ++ib) {
                const double c = params_.s_b * wb_(ib) - params_.s_a * wa_(ia);
                static_envelope_(ib, ia) = pref * std::exp(-c * c * tau * tau / A_);
            }
        }
    }
}

void CouplingModel::evaluate(double t, Eigen::MatrixXcd& out) const {
    if (params_.pmf_kind == PmfKind::gaussian) {
        evaluate_gaussian(t, out);
    } else {
        evaluate_quadrature(t, out);
    }
}

// The pump integral is Gaussian with a complex linear term:
//   int dp tau/sqrt(pi) e^{-tau^2 p^2 - i p t - (c - s_p p)^2}
//     = tau/sqrt(A) exp(-c^2 tau^2/A - t^2/(4A) - i c s_p t / A),  A = tau^2 + s_p^2.
// Combined with e^{i (w_b - w_a) t} the phase factorizes into row and column
// phases, so m(t) = g(t) diag(u_b) E diag(u_a) with a static real E.
void CouplingModel::evaluate_gaussian(double t, Eigen::MatrixXcd& out) const {
    const double sp = params_.s_p;
    const double kb = 1.0 - params_.s_b * sp / A_;
    const double ka = 1.0 - params_.s_a * sp / A_;
    const double envelope = std::exp(-t * t / (4.0 * A_));
    const int na = grid_a_.size(), nb = grid_b_.size();
    Eigen::VectorXcd ub(nb), ua(na);
    for (int ib = 0; ib < nb; ++ib) ub(ib) = std::polar(envelope, kb * wb_(ib) * t);
    for (int ia = 0; ia < na; ++ia) ua(ia) = std::polar(1.0, -ka * wa_(ia) * t);
    out.resize(nb, na);
    for (int ia = 0; ia < na; ++ia) {
        for (int ib = 0; ib < nb; ++ib) out(ib, ia) = (ub(ib) * ua(ia)) * static_envelope_(ib, ia);
    }
}

void CouplingModel::evaluate_quadrature(double t, Eigen::MatrixXcd& out) const {
    out = coupling_at_time_quadrature(params_, grid_a_, grid_b_, t, pump_).values;
}

CouplingMatrix coupling_at_time(const DeviceParams& params, const FrequencyGrid& grid_a,
                                const FrequencyGrid& grid_b, double t) {
    CouplingModel model(params, grid_a, grid_b);
    return {t, model.evaluate(t)};
}

CouplingMatrix coupling_at_time_quadrature(const DeviceParams& params, const FrequencyGrid& grid_a,
                                           const FrequencyGrid& grid_b, double t,
                                           const PumpQuadrature& pump) {
    params.validate();
    const double tau = params.tau;
    const double half = pump.half_width_factor / tau;
    const double edge = pump_amplitude(params, half) / pump_amplitude(params, 0.0);
    if (edge > 1e-12) {
        std::ostringstream os;
        os << "pump quadrature window truncates the pump (edge/peak = " << edge << ")";
        throw GridCoverageError(os.str(), edge);
    }

    // resolve oscillations of e^{-ipt} and of the PMF in w_p
    const double pmf_rate = params.pmf_kind == PmfKind::sinc
                                ? std::abs(params.s_p) / std::sqrt(params.gamma)
                                : std::abs(params.s_p);
    const double cycles = 2.0 * half * (std::abs(t) + pmf_rate) / (2.0 * std::numbers::pi);
    const int panels = std::max(pump.min_panels, static_cast<int>(std::ceil(4.0 * cycles)));
    const PanelRule rule(-half, half, panels, pump.nodes_per_panel);

    const int np = panels * pump.nodes_per_panel;
    Eigen::VectorXd p(np);
    Eigen::VectorXcd kernel(np);  // weight * alpha(p) * e^{-ipt}
    for (int k = 0, idx = 0; k < panels; ++k) {
        for (int i = 0; i < pump.nodes_per_panel; ++i, ++idx) {
            p(idx) = rule.node(k, i);
            kernel(idx) = rule.weight(i) * pump_amplitude(params, p(idx)) * std::polar(1.0, -p(idx) * t);
        }
    }

    const int na = grid_a.size(), nb = grid_b.size();
    const double pref = -params.epsilon * weight_product(grid_a, grid_b);
    CouplingMatrix m{t, Eigen::MatrixXcd(nb, na)};
    for (int ia = 0; ia < na; ++ia) {
        const double a = grid_a.point(ia);
        for (int ib = 0; ib < nb; ++ib) {
            const double b = grid_b.point(ib);
            const double c = params.s_b * b - params.s_a * a;
            cdouble acc = 0.0;
            for (int k = 0; k < np; ++k) acc += kernel(k) * pmf_of_mismatch(params, c - params.s_p * p(k));
            m.values(ib, ia) = pref * std::polar(1.0, (b - a) * t) * acc;
        }
    }
    return m;
}

namespace {

Eigen::MatrixXcd integrate_with(const CouplingModel& model, const TimeWindow& window, int panels,
                                int nodes) {
    const PanelRule rule(-window.half_width, window.half_width, panels, nodes);
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(model.grid_b().size(), model.grid_a().size());
    Eigen::MatrixXcd m;
    for (int k = 0; k < panels; ++k) {
        for (int i = 0; i < nodes; ++i) {
            model.evaluate(rule.node(k, i), m);
            sum += rule.weight(i) * m;
        }
    }
    return sum;
}

}  // namespace

Eigen::MatrixXcd integrate_coupling(const DeviceParams& params, const FrequencyGrid& grid_a,
                                    const FrequencyGrid& grid_b, const TimeWindow& window,
                                    const TimeQuadrature& quadrature) {
    const CouplingModel model(params, grid_a, grid_b);
    const Eigen::MatrixXcd coarse = integrate_with(model, window, quadrature.panels, quadrature.nodes_per_panel);
    Eigen::MatrixXcd fine = integrate_with(model, window, 2 * quadrature.panels, quadrature.nodes_per_panel);
    const double scale = fine.cwiseAbs().maxCoeff();
    if (scale > 0.0) {
        const double change = (fine - coarse).cwiseAbs().maxCoeff() / scale;
        if (change > quadrature.relative_tolerance) {
            std::ostringstream os;
            os << "integrate_coupling: doubling the panel count changed the result by " << change
               << " (relative), tolerance " << quadrature.relative_tolerance;
            throw ConvergenceError(os.str(), change, quadrature.relative_tolerance);
        }
    }
    return fine;
}

}  // namespace qfc
