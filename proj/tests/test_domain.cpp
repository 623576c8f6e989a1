#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include "qfc/errors.hpp"

using namespace qfc;
using namespace qfc::testing;

TEST_CASE("pump amplitude at zero detuning") {
    CHECK(pump_amplitude(canonical(), 0.0) == doctest::Approx(1.0 / std::sqrt(pi)).epsilon(1e-15));
    CHECK(pump_amplitude(canonical(), 0.0) == doctest::Approx(0.564190).epsilon(1e-6));
}

TEST_CASE("pump amplitude is even and positive") {
    DeviceParams p = canonical();
    p.tau = 1.7;
    for (double x : {0.1, 0.7, 2.3, 5.0}) {
        CHECK(pump_amplitude(p, x) == pump_amplitude(p, -x));
        CHECK(pump_amplitude(p, x) > 0.0);
    }
}

TEST_CASE("pump amplitude integrates to one") {
    for (double tau : {0.5, 1.0, 2.5}) {
        DeviceParams p = canonical();
        p.tau = tau;
        const Rule r = gauss_rule(-8.0 / tau, 8.0 / tau, 32, 16);
        double sum = 0.0;
        for (std::size_t i = 0; i < r.x.size(); ++i) sum += r.w[i] * pump_amplitude(p, r.x[i]);
        CHECK(std::abs(sum - 1.0) < 1e-8);
    }
}

TEST_CASE("pmf equals one at zero mismatch") {
    DeviceParams p = canonical();
    CHECK(pmf_value(p, 0.0, 0.0, 0.0) == 1.0);
    p.pmf_kind = PmfKind::sinc;
    CHECK(pmf_value(p, 0.0, 0.0, 0.0) == 1.0);
    // D = 3*1 - 0.5*2 - 1*2 = 0
    CHECK(pmf_value(p, 2.0, 1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gaussian pmf at unit mismatch") {
    const DeviceParams p = canonical();
    // D = s_b * (1/3) = 1
    CHECK(pmf_value(p, 0.0, 1.0 / 3.0, 0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(pmf_value(p, 0.0, 1.0 / 3.0, 0.0) == doctest::Approx(0.3679).epsilon(1e-4));
}

TEST_CASE("pmf ranges") {
    DeviceParams p = canonical();
    p.pmf_kind = PmfKind::sinc;
    double lo = 1.0;
    for (int i = 0; i <= 20000; ++i) {
        const double v = pmf_of_mismatch(p, -20.0 + 40.0 * i / 20000.0);
        CHECK(v <= 1.0);
        lo = std::min(lo, v);
    }
    CHECK(lo >= -0.2173);
    CHECK(lo < -0.217);
    p.pmf_kind = PmfKind::gaussian;
    CHECK(pmf_of_mismatch(p, 5.0) > 0.0);
}

TEST_CASE("gaussian and sinc half maxima coincide for gamma 0.193") {
    // exp(-gamma x^2) = 1/2 at sqrt(ln 2 / gamma); sinc(x) = 1/2 found by bisection.
    const double gamma = 0.193;
    const double x_gauss = std::sqrt(std::log(2.0) / gamma);
    double lo = 1.0, hi = 2.5;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (std::sin(mid) / mid > 0.5 ? lo : hi) = mid;
    }
    CHECK(x_gauss == doctest::Approx(1.895).epsilon(1e-3));
    CHECK(lo == doctest::Approx(1.8955).epsilon(1e-4));
    CHECK(std::abs(x_gauss - lo) / lo < 5e-3);

    // the library sinc kind evaluates sinc(D / sqrt(gamma)): half maximum at D = x sqrt(gamma)
    DeviceParams p = canonical();
    p.pmf_kind = PmfKind::sinc;
    CHECK(pmf_of_mismatch(p, lo * std::sqrt(gamma)) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("mu parameters of the canonical separable device") {
    const MuParameters mu = mu_parameters(canonical());
    CHECK(std::abs(mu.mu_sq) < 1e-15);
    CHECK(mu.mu_a == doctest::Approx(1.11803).epsilon(1e-5));
    CHECK(mu.mu_b == doctest::Approx(2.23607).epsilon(1e-5));
    CHECK(mu.r0_tilde == doctest::Approx(2.8100).epsilon(1e-4));
    CHECK_FALSE(mu.schmidt_count_infinite);
    CHECK(mu.schmidt_count == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("round separable device reaches r0 = pi") {
    DeviceParams p = canonical();
    p.s_a = 0.0;
    p.s_p = 1.0;
    p.s_b = 2.0;
    const MuParameters mu = mu_parameters(p);
    CHECK(std::abs(mu.mu_sq) < 1e-15);
    CHECK(mu.mu_a == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(mu.mu_b == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(mu.r0_tilde == doctest::Approx(pi).epsilon(1e-14));
}

TEST_CASE("flat pmf has an infinite Schmidt count") {
    const MuParameters mu = mu_parameters(flat());
    CHECK(mu.mu_a == 1.0);
    CHECK(mu.mu_b == 1.0);
    CHECK(mu.mu_sq == 1.0);
    CHECK(mu.schmidt_count_infinite);
}

TEST_CASE("mu parameter invariants over a parameter scan") {
    for (double tau : {0.3, 1.0, 2.0}) {
        for (double sa : {-2.0, 0.0, 0.5, 1.5}) {
            for (double sp : {-1.0, 0.0, 1.0, 2.5}) {
                for (double sb : {-0.5, 1.0, 3.0}) {
                    DeviceParams p;
                    p.tau = tau;
                    p.s_a = sa;
                    p.s_p = sp;
                    p.s_b = sb;
                    const MuParameters mu = mu_parameters(p);
                    CHECK(mu.mu_a >= tau);
                    CHECK(mu.mu_b >= tau);
                    CHECK(mu.mu_sq == doctest::Approx(tau * tau + (sp - sa) * (sp - sb)));
                    if (!mu.schmidt_count_infinite) CHECK(mu.schmidt_count >= 1.0 - 1e-12);
                    const bool separable = std::abs(mu.mu_sq) / (tau * tau) < 1e-12;
                    if (!mu.schmidt_count_infinite) {
                        CHECK(separable == (std::abs(mu.schmidt_count - 1.0) < 1e-12));
                    }
                    // r0 <= pi holds on the separable surface
                    if (separable) CHECK(mu.r0_tilde <= pi + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("r0 on the separable surface peaks at the symmetric point") {
    // mu = 0 with s_p - s_a = x, s_p - s_b = -tau^2 / x: r0 = sqrt(2) pi tau / sqrt(mu_a mu_b)
    const double tau = 1.0;
    double best = 0.0, best_x = 0.0;
    for (int i = 1; i <= 400; ++i) {
        const double x = 0.05 * i;
        DeviceParams p;
        p.tau = tau;
        p.s_p = 1.0;
        p.s_a = 1.0 - x;
        p.s_b = 1.0 + tau * tau / x;
        const double r = mu_parameters(p).r0_tilde;
        if (r > best) {
            best = r;
            best_x = x;
        }
    }
    CHECK(best == doctest::Approx(pi).epsilon(1e-12));
    CHECK(best_x == doctest::Approx(1.0));
}

TEST_CASE("epsilon scaling with length, energy and duration") {
    PhysicalParams p{2e-12, 0.01, 1e-9, 1e-10, 2.2, 2.1, 2.15, 1.2e15, 3.6e15, 2.4e15, 1e-12};
    const double e0 = epsilon_from_physical(p);
    CHECK(e0 > 0.0);
    PhysicalParams q = p;
    q.L *= 2.0;
    CHECK(epsilon_from_physical(q) == doctest::Approx(2.0 * e0).epsilon(1e-14));
    q = p;
    q.U0 *= 4.0;
    CHECK(epsilon_from_physical(q) == doctest::Approx(2.0 * e0).epsilon(1e-14));
    q = p;
    q.tau *= 4.0;
    CHECK(epsilon_from_physical(q) == doctest::Approx(0.5 * e0).epsilon(1e-14));
}

TEST_CASE("physical params are validated") {
    PhysicalParams p{2e-12, 0.01, 1e-9, 1e-10, 2.2, 2.1, 2.15, 1.2e15, 3.6e15, 2.4e15, 1e-12};
    PhysicalParams q = p;
    q.L = 0.0;
    CHECK_THROWS_AS(epsilon_from_physical(q), std::invalid_argument);
    q = p;
    q.omega_bar_b = 3.0e15;
    CHECK_THROWS_AS(epsilon_from_physical(q), std::invalid_argument);
}

TEST_CASE("device params are validated") {
    DeviceParams p = canonical();
    p.tau = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = canonical();
    p.gamma = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = canonical();
    p.epsilon = -0.1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = canonical();
    p.s_a = std::nan("");
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("hermite mode order zero") {
    CHECK(gaussian_hermite_mode(0, 0.0) == doctest::Approx(std::pow(pi / 2.0, -0.25)).epsilon(1e-15));
    CHECK(gaussian_hermite_mode(0, 0.0) == doctest::Approx(0.893244).epsilon(1e-6));
    CHECK(gaussian_hermite_mode(0, 0.8) == doctest::Approx(std::exp(-0.64) * std::pow(pi / 2.0, -0.25)).epsilon(1e-15));
    CHECK_THROWS_AS(gaussian_hermite_mode(-1, 0.0), std::invalid_argument);
}

TEST_CASE("hermite modes are orthonormal on a wide grid") {
    const int n = 257;
    const double dx = 12.0 / (n - 1);
    auto inner = [&](int i, int j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) {
            const double x = -6.0 + k * dx;
            s += gaussian_hermite_mode(i, x) * gaussian_hermite_mode(j, x) * dx;
        }
        return s;
    };
    CHECK(std::abs(inner(0, 0) - 1.0) < 1e-8);
    CHECK(std::abs(inner(0, 1)) < 1e-10);
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) CHECK(std::abs(inner(i, j) - (i == j ? 1.0 : 0.0)) < 1e-8);
    }
}

TEST_CASE("hermite modes match the explicit polynomial form") {
    // H_2(y) = 4y^2 - 2 with y = sqrt(2) x, normalization (pi/2)^(-1/4) / sqrt(2^2 2!)
    for (double x : {-1.3, 0.0, 0.4, 2.0}) {
        const double y = std::sqrt(2.0) * x;
        const double ref = std::pow(pi / 2.0, -0.25) / std::sqrt(8.0) * (4.0 * y * y - 2.0) * std::exp(-x * x);
        CHECK(gaussian_hermite_mode(2, x) == doctest::Approx(ref).epsilon(1e-13));
    }
}

TEST_CASE("frequency grid geometry") {
    const FrequencyGrid g(0.5, 2.0, 5);
    CHECK(g.spacing() == 1.0);
    CHECK(g.point(0) == -1.5);
    CHECK(g.point(4) == 2.5);
    CHECK(g.weight() == 1.0);
    CHECK_THROWS_AS(FrequencyGrid(0.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(FrequencyGrid(0.0, 0.0, 8), std::invalid_argument);
}

TEST_CASE("wave packets are normalized") {
    const FrequencyGrid g(0.0, 5.0, 64);
    const WavePacket w = WavePacket::from_function(g, [](double x) { return std::exp(-x * x); });
    CHECK(std::abs(w.amplitudes().squaredNorm() - 1.0) < 1e-12);
    CHECK_THROWS_AS(WavePacket(g, Eigen::VectorXcd::Ones(64)), std::invalid_argument);
    CHECK_THROWS_AS(WavePacket(g, Eigen::VectorXcd::Zero(3)), std::invalid_argument);
}

TEST_CASE("default grids scale with mu") {
    const DeviceGrids g = default_grids(canonical());
    const MuParameters mu = mu_parameters(canonical());
    CHECK(g.a.size() == 128);
    CHECK(g.a.half_width() == doctest::Approx(6.0 / mu.mu_a));
    CHECK(g.b.half_width() == doctest::Approx(6.0 / mu.mu_b));
    CHECK(g.a.center() == 0.0);
}

TEST_CASE("hermite photon is the matched Gaussian") {
    const DeviceParams p = canonical();
    const DeviceGrids g = small_grids(p, 48);
    const WavePacket f0 = hermite_photon(p, g.a, 0);
    const double mua = mu_parameters(p).mu_a;
    Eigen::VectorXcd ref(48);
    for (int i = 0; i < 48; ++i) ref(i) = std::exp(-mua * mua * g.a.point(i) * g.a.point(i));
    ref.normalize();
    CHECK((f0.amplitudes() - ref).cwiseAbs().maxCoeff() < 1e-14);
}
