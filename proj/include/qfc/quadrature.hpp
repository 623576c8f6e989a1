#pragma once

#include <Eigen/Dense>

namespace qfc {

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    Eigen::VectorXd nodes;    // ascending
    Eigen::VectorXd weights;

    explicit GaussLegendre(int n);
};

// Composite Gauss-Legendre rule: `panels` equal panels on [lo, hi], each with
// the same n-point rule. Also carries the spectral integration matrix S with
// S(i, j) = integral from the panel start to node i of the j-th Lagrange
// basis polynomial, on the reference panel [-1, 1].
class PanelRule {
public:
    PanelRule(double lo, double hi, int panels, int nodes_per_panel);

    int panels() const noexcept { return panels_; }
    int nodes_per_panel() const noexcept { return static_cast<int>(gl_.nodes.size()); }
    double panel_width() const noexcept { return (hi_ - lo_) / panels_; }
    double panel_start(int k) const noexcept { return lo_ + k * panel_width(); }
    double node(int panel, int i) const noexcept;
    // Weight of node i for integration over a whole panel.
    double weight(int i) const noexcept { return 0.5 * panel_width() * gl_.weights(i); }
    // Weight of node j for integration from the panel start to node i.
    double partial_weight(int i, int j) const noexcept {
        return 0.5 * panel_width() * integration_(i, j);
    }

private:
    double lo_;
    double hi_;
    int panels_;
    GaussLegendre gl_;
    Eigen::MatrixXd integration_;
};

}  // namespace qfc
