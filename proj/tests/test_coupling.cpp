#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include "qfc/errors.hpp"
#include "qfc/quadrature.hpp"

using namespace qfc;
using namespace qfc::testing;

namespace {

double rel_max(const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& ref) {
    return (x - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
}

DeviceParams sinc_device(double epsilon) {
    DeviceParams p = canonical(epsilon);
    p.pmf_kind = PmfKind::sinc;
    return p;
}

}  // namespace

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
    const GaussLegendre gl(7);
    for (int k = 0; k <= 13; ++k) {
        double s = 0.0;
        for (int i = 0; i < 7; ++i) s += gl.weights(i) * std::pow(gl.nodes(i), k);
        const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
        CHECK(std::abs(s - exact) < 1e-14);
    }
}

TEST_CASE("panel integration matrix gives partial integrals") {
    const PanelRule rule(0.0, 3.0, 3, 10);
    // d/dt sin(t) = cos(t), so the partial integral of cos from the panel start is sin(t) - sin(t0)
    for (int k = 0; k < 3; ++k) {
        for (int i = 0; i < 10; ++i) {
            double s = 0.0;
            for (int j = 0; j < 10; ++j) s += rule.partial_weight(i, j) * std::cos(rule.node(k, j));
            CHECK(std::abs(s - (std::sin(rule.node(k, i)) - std::sin(rule.panel_start(k)))) < 1e-13);
        }
    }
}

TEST_CASE("build_j1 vanishes at zero coupling") {
    const DeviceParams p = canonical(0.0);
    const DeviceGrids g = small_grids(p, 16);
    CHECK(build_j1(p, g.a, g.b).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_j1 origin entry") {
    const DeviceParams p = canonical(0.3);
    const FrequencyGrid ga(0.0, 5.0, 21), gb(0.0, 3.0, 21);
    const JcaMatrix j = build_j1(p, ga, gb);
    const double w = std::sqrt(ga.spacing() * gb.spacing());
    CHECK(j.values(10, 10).real() == doctest::Approx(-0.3 * 1.0 / std::sqrt(pi) * w).epsilon(1e-14));
    CHECK(j.weighted);
    CHECK(j.kernel()(10, 10).real() == doctest::Approx(-0.3 / std::sqrt(pi)).epsilon(1e-14));
}

TEST_CASE("build_j1 gaussian closed form matches the alpha times phi product") {
    // J1 = -eps alpha(b - a) Phi(D at w_p = b - a), sampled directly
    DeviceParams p = canonical(0.7);
    p.s_a = 0.2;
    p.s_b = 1.3;  // not separable
    const DeviceGrids g = default_grids(p, GridSettings{20, 9.0});
    const JcaMatrix j = build_j1(p, g.a, g.b);
    const double w = std::sqrt(g.a.spacing() * g.b.spacing());
    double err = 0.0;
    for (int ia = 0; ia < 20; ++ia) {
        for (int ib = 0; ib < 20; ++ib) {
            const double a = g.a.point(ia), b = g.b.point(ib), wp = b - a;
            const double D = p.s_b * b - p.s_a * a - p.s_p * wp;
            const double ref = -p.epsilon * p.tau / std::sqrt(pi) * std::exp(-wp * wp * p.tau * p.tau) * std::exp(-D * D) * w;
            err = std::max(err, std::abs(j.values(ib, ia) - ref));
        }
    }
    CHECK(err < 1e-15);
}

TEST_CASE("build_j1 is separable when mu vanishes") {
    const DeviceParams p = canonical(0.5);
    const DeviceGrids g = small_grids(p, 32);
    const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXcd>(build_j1(p, g.a, g.b).values).singularValues();
    CHECK(s(1) / s(0) < 1e-6);
}

TEST_CASE("build_j1 is not separable when mu is nonzero") {
    DeviceParams p = canonical(0.5);
    p.tau = 2.0;
    const DeviceGrids g = default_grids(p, GridSettings{32, 8.0});
    const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXcd>(build_j1(p, g.a, g.b).values).singularValues();
    CHECK(s(1) / s(0) > 1e-3);
}

TEST_CASE("build_j1 reports grid truncation") {
    const DeviceParams p = canonical(0.5);
    const FrequencyGrid ga(0.0, 1.0, 16), gb(0.0, 1.0, 16);
    CHECK_THROWS_AS(build_j1(p, ga, gb), GridCoverageError);
    try {
        build_j1(p, ga, gb);
    } catch (const GridCoverageError& e) {
        CHECK(e.edge_to_peak() > 1e-12);
    }
    CHECK_NOTHROW(build_j1(p, ga, gb, CoverageCheck{std::nullopt}));
}

TEST_CASE("coupling vanishes at zero coupling") {
    const DeviceParams p = canonical(0.0);
    const DeviceGrids g = small_grids(p, 12);
    CHECK(coupling_at_time(p, g.a, g.b, 1.3).values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(coupling_at_time_quadrature(p, g.a, g.b, 1.3).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coupling closed form agrees with a 2048-point pump quadrature") {
    DeviceParams p = canonical(0.8);
    p.s_a = -0.4;  // generic, mu != 0
    const DeviceGrids g = small_grids(p, 10);
    for (double t : {-6.0, -1.1, 0.0, 0.37, 4.0, 11.0}) {
        const Eigen::MatrixXcd ref = reference_coupling(p, g.a, g.b, t);
        CHECK(rel_max(coupling_at_time(p, g.a, g.b, t).values, ref) < 1e-9);
        CHECK(rel_max(coupling_at_time_quadrature(p, g.a, g.b, t).values, ref) < 1e-9);
    }
}

TEST_CASE("sinc coupling quadrature agrees with the reference") {
    const DeviceParams p = sinc_device(0.8);
    const DeviceGrids g = small_grids(p, 8);
    for (double t : {-2.0, 0.5, 3.0}) {
        CHECK(rel_max(coupling_at_time(p, g.a, g.b, t).values, reference_coupling(p, g.a, g.b, t, 4096)) < 1e-8);
    }
}

TEST_CASE("coupling conjugates under time reversal") {
    for (const DeviceParams& p : {canonical(0.6), sinc_device(0.6)}) {
        const DeviceGrids g = small_grids(p, 10);
        for (double t : {0.4, 2.5, 7.0}) {
            const Eigen::MatrixXcd plus = coupling_at_time(p, g.a, g.b, t).values;
            const Eigen::MatrixXcd minus = coupling_at_time(p, g.a, g.b, -t).values;
            CHECK((minus - plus.conjugate()).cwiseAbs().maxCoeff() < 1e-12 * plus.cwiseAbs().maxCoeff() + 1e-300);
        }
    }
}

TEST_CASE("coupling is linear in epsilon") {
    const DeviceParams p = canonical(0.3);
    const DeviceGrids g = small_grids(p, 12);
    const Eigen::MatrixXcd m1 = coupling_at_time(p, g.a, g.b, 0.9).values;
    const Eigen::MatrixXcd m2 = coupling_at_time(p.with_epsilon(0.6), g.a, g.b, 0.9).values;
    CHECK((m2 - 2.0 * m1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("time integral of the coupling equals 2 pi J1") {
    for (double tau : {1.0, 1.6}) {
        DeviceParams p = canonical(0.4);
        p.tau = tau;
        const DeviceGrids g = small_grids(p, 24);
        const Eigen::MatrixXcd integral = integrate_coupling(p, g.a, g.b, default_time_window(p));
        const JcaMatrix j = build_j1(p, g.a, g.b);
        CHECK(rel_max(integral, 2.0 * pi * j.values) < 1e-6);
    }
}

TEST_CASE("time integral of the sinc coupling equals 2 pi J1") {
    const DeviceParams p = sinc_device(0.4);
    const DeviceGrids g = small_grids(p, 8);
    const Eigen::MatrixXcd integral =
        integrate_coupling(p, g.a, g.b, default_time_window(p), TimeQuadrature{48, 16, 1e-9});
    const JcaMatrix j = build_j1(p, g.a, g.b, CoverageCheck{std::nullopt});
    CHECK(rel_max(integral, 2.0 * pi * j.values) < 1e-6);
}

TEST_CASE("time integral is linear and vanishes at zero coupling") {
    const DeviceParams p = canonical(0.25);
    const DeviceGrids g = small_grids(p, 12);
    const TimeWindow w = default_time_window(p);
    const Eigen::MatrixXcd i1 = integrate_coupling(p, g.a, g.b, w);
    const Eigen::MatrixXcd i2 = integrate_coupling(p.with_epsilon(0.5), g.a, g.b, w);
    CHECK((i2 - 2.0 * i1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(integrate_coupling(p.with_epsilon(0.0), g.a, g.b, w).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("time integral reports non-convergence") {
    const DeviceParams p = canonical(0.4);
    const DeviceGrids g = small_grids(p, 12);
    CHECK_THROWS_AS(integrate_coupling(p, g.a, g.b, default_time_window(p), TimeQuadrature{1, 2, 1e-10}),
                    ConvergenceError);
}

TEST_CASE("default time window covers the coupling envelope") {
    const DeviceParams p = canonical(1.0);
    const DeviceGrids g = small_grids(p, 16);
    const double T = default_time_window(p).half_width;
    const double peak = coupling_at_time(p, g.a, g.b, 0.0).values.cwiseAbs().maxCoeff();
    CHECK(coupling_at_time(p, g.a, g.b, T).values.cwiseAbs().maxCoeff() < 1e-12 * peak);
    CHECK(T == doctest::Approx(8.0 * mu_parameters(p).mu_b));
}
