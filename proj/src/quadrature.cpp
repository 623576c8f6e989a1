#include "qfc/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace qfc {

namespace {

using RowRef = Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

// P_0..P_{n-1} and the indefinite integrals from -1, evaluated at x.
void legendre_row(double x, int n, RowRef p, RowRef ip) {
    Eigen::VectorXd all(n + 1);
    all(0) = 1.0;
    if (n >= 1) all(1) = x;
    for (int k = 1; k < n; ++k) all(k + 1) = ((2 * k + 1) * x * all(k) - k * all(k - 1)) / (k + 1);
    for (int k = 0; k < n; ++k) p(k) = all(k);
    // int_{-1}^x P_k = (P_{k+1} - P_{k-1}) / (2k + 1), and P_{k+-1}(-1) cancel.
    ip(0) = x + 1.0;
    for (int k = 1; k < n; ++k) ip(k) = (all(k + 1) - all(k - 1)) / (2 * k + 1);
}

}  // namespace

GaussLegendre::GaussLegendre(int n) : nodes(n), weights(n) {
    if (n < 1) throw std::invalid_argument("GaussLegendre: n must be >= 1");
    // P_n(x) and P_n'(x) by the three-term recurrence.
    auto legendre = [n](double x) {
        double p0 = 1.0, p1 = x;
        for (int k = 1; k < n; ++k) {
            const double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
            p0 = p1;
            p1 = p2;
        }
        const double dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
        return std::pair{p1, dp};
    };
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = legendre(x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre(x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes(i) = -x;
        nodes(n - 1 - i) = x;
        weights(i) = w;
        weights(n - 1 - i) = w;
    }
    if (n % 2 == 1) nodes(n / 2) = 0.0;
}

PanelRule::PanelRule(double lo, double hi, int panels, int nodes_per_panel)
    : lo_(lo), hi_(hi), panels_(panels), gl_(nodes_per_panel) {
    if (!(hi > lo)) throw std::invalid_argument("PanelRule: empty interval");
    if (panels < 1) throw std::invalid_argument("PanelRule: panels must be >= 1");
    const int q = nodes_per_panel;
    Eigen::MatrixXd vand(q, q), vint(q, q);
    for (int i = 0; i < q; ++i) legendre_row(gl_.nodes(i), q, vand.row(i), vint.row(i));
    integration_ = vint * vand.inverse();
}

double PanelRule::node(int panel, int i) const noexcept {
    return panel_start(panel) + 0.5 * (gl_.nodes(i) + 1.0) * panel_width();
}

}  // namespace qfc
