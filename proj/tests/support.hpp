// Shared fixtures and independent reference implementations for the tests.

#pragma once

#include "qfc/experiments.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <functional>
#include <numbers>

namespace qfc::testing {

inline constexpr double pi = std::numbers::pi;

// tau = 1, s_a = 0.5, s_p = 1, s_b = 3: separable first-order JCA.
inline DeviceParams canonical(double epsilon = 0.0) {
    DeviceParams p;
    p.tau = 1.0;
    p.s_a = 0.5;
    p.s_p = 1.0;
    p.s_b = 3.0;
    p.epsilon = epsilon;
    return p;
}

inline DeviceParams flat(double epsilon = 0.0) {
    DeviceParams p = canonical(epsilon);
    p.s_a = p.s_b = p.s_p = 0.0;
    return p;
}

inline double r0(const DeviceParams& p) {
    const double mua = std::sqrt(p.tau * p.tau + (p.s_p - p.s_a) * (p.s_p - p.s_a));
    const double mub = std::sqrt(p.tau * p.tau + (p.s_p - p.s_b) * (p.s_p - p.s_b));
    return std::sqrt(2.0) * pi * p.tau / std::sqrt(mua * mub);
}

inline DeviceParams at_strength(const DeviceParams& p, double strength) {
    return p.with_epsilon(strength / r0(p));
}

// Plain composite Gauss-Legendre on [lo, hi] with its own node computation
// (Golub-Welsch through an Eigen symmetric eigensolver).
struct Rule {
    std::vector<double> x, w;
};

inline Rule gauss_rule(double lo, double hi, int panels, int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Rule r;
    const double width = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        for (int i = 0; i < n; ++i) {
            const double v0 = es.eigenvectors()(0, i);
            r.x.push_back(lo + width * (p + 0.5 * (es.eigenvalues()(i) + 1.0)));
            r.w.push_back(width * v0 * v0);
        }
    }
    return r;
}

// Direct sampling of m(t) = -eps e^{i(b-a)t} int dp alpha(p) e^{-ipt} Phi(D) w.
inline Eigen::MatrixXcd reference_coupling(const DeviceParams& p, const FrequencyGrid& ga,
                                           const FrequencyGrid& gb, double t, int n_pump = 2048) {
    const double half = 8.0 / p.tau;
    const Rule rule = gauss_rule(-half, half, n_pump / 16, 16);
    const double w = std::sqrt(ga.spacing() * gb.spacing());
    Eigen::MatrixXcd m(gb.size(), ga.size());
    for (int ia = 0; ia < ga.size(); ++ia) {
        for (int ib = 0; ib < gb.size(); ++ib) {
            const double a = ga.point(ia), b = gb.point(ib);
            std::complex<double> acc = 0.0;
            for (std::size_t k = 0; k < rule.x.size(); ++k) {
                const double wp = rule.x[k];
                const double D = p.s_b * b - p.s_a * a - p.s_p * wp;
                double phi;
                if (p.pmf_kind == PmfKind::gaussian) {
                    phi = std::exp(-D * D);
                } else {
                    const double x = D / std::sqrt(p.gamma);
                    phi = x == 0.0 ? 1.0 : std::sin(x) / x;
                }
                const double alpha = p.tau * std::exp(-p.tau * p.tau * wp * wp) / std::sqrt(pi);
                acc += rule.w[k] * alpha * phi * std::polar(1.0, -wp * t);
            }
            m(ib, ia) = -p.epsilon * w * std::polar(1.0, (b - a) * t) * acc;
        }
    }
    return m;
}

inline Eigen::MatrixXcd hamiltonian(const Eigen::MatrixXcd& m) {
    const Eigen::Index na = m.cols(), nb = m.rows();
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(na + nb, na + nb);
    H.topRightCorner(na, nb) = m.adjoint();
    H.bottomLeftCorner(nb, na) = m;
    return H;
}

// Time-ordered product of midpoint exponentials with a general matrix
// exponential, many steps, Richardson-extrapolated (second-order scheme).
inline Eigen::MatrixXcd reference_unitary(const DeviceParams& p, const FrequencyGrid& ga,
                                          const FrequencyGrid& gb, double T, int steps) {
    const CouplingModel model(p, ga, gb);
    auto product = [&](int n) {
        const double h = 2.0 * T / n;
        const int dim = ga.size() + gb.size();
        Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(dim, dim);
        for (int k = 0; k < n; ++k) {
            const Eigen::MatrixXcd A = std::complex<double>(0.0, -h) * hamiltonian(model.evaluate(-T + (k + 0.5) * h));
            U = A.exp() * U;
        }
        return U;
    };
    const Eigen::MatrixXcd coarse = product(steps);
    const Eigen::MatrixXcd fine = product(2 * steps);
    return (4.0 * fine - coarse) / 3.0;
}

inline DeviceGrids small_grids(const DeviceParams& p, int n) {
    return default_grids(p, GridSettings{n, 6.0});
}

}  // namespace qfc::testing
