#include "qfc/propagate.hpp"

#include "qfc/errors.hpp"
#include "qfc/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace qfc {

namespace {

constexpr cdouble I{0.0, 1.0};

void require_same_grids(const FrequencyGrid& a1, const FrequencyGrid& b1, const FrequencyGrid& a2,
                        const FrequencyGrid& b2, const char* where) {
    if (!(a1 == a2) || !(b1 == b2)) throw GridMismatchError(std::string(where) + ": grid mismatch");
}

// cos(h sqrt(l)), h sin(h sqrt(l)) / (h sqrt(l)) and (cos(h sqrt(l)) - 1) / l,
// all analytic in l >= 0.
struct RotationFunctions {
    double cosine;
    double sine_over_root;
    double cosine_minus_one_over;
};

RotationFunctions rotation_functions(double lambda, double h) {
    const double l = std::max(lambda, 0.0);
    const double x = std::abs(h) * std::sqrt(l);
    RotationFunctions f{};
    f.cosine = std::cos(x);
    if (x < 1e-4) {
        const double x2 = x * x;
        f.sine_over_root = h * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
        f.cosine_minus_one_over = -h * h * (0.5 - x2 / 24.0 + x2 * x2 / 720.0);
    } else {
        const double s = std::sin(0.5 * x);
        f.sine_over_root = h * std::sin(x) / x;
        f.cosine_minus_one_over = -2.0 * h * h * s * s / (x * x);
    }
    return f;
}

}  // namespace

OneParticleUnitary::OneParticleUnitary(FrequencyGrid grid_a, FrequencyGrid grid_b,
                                       Eigen::MatrixXcd matrix)
    : grid_a_(grid_a), grid_b_(grid_b), matrix_(std::move(matrix)) {
    const int n = grid_a_.size() + grid_b_.size();
    if (matrix_.rows() != n || matrix_.cols() != n) {
        throw std::invalid_argument("OneParticleUnitary: matrix size does not match the grids");
    }
}

OneParticleUnitary OneParticleUnitary::identity(const FrequencyGrid& grid_a,
                                                const FrequencyGrid& grid_b) {
    const int n = grid_a.size() + grid_b.size();
    return {grid_a, grid_b, Eigen::MatrixXcd::Identity(n, n)};
}

double OneParticleUnitary::unitarity_defect() const {
    const Eigen::Index n = matrix_.rows();
    const Eigen::MatrixXcd d = matrix_.adjoint() * matrix_ - Eigen::MatrixXcd::Identity(n, n);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(d, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXcd block_rotation(const Eigen::MatrixXcd& C, double h) {
    const Eigen::Index na = C.cols(), nb = C.rows();
    Eigen::MatrixXcd E(na + nb, na + nb);
    // Diagonalize the Gram matrix on the smaller side; with X = {{0, C^dag}, {C, 0}},
    // cos(hX) = diag(cos(h sqrt(C^dag C)), cos(h sqrt(C C^dag))) and
    // sin(hX) = {{0, C^dag g(C C^dag)}, {C g(C^dag C), 0}}, g(l) = sin(h sqrt l)/sqrt l.
    if (na <= nb) {
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(C.adjoint() * C);
        const Eigen::MatrixXcd& K = es.eigenvectors();
        Eigen::VectorXd cs(na), sn(na), cm(na);
        for (Eigen::Index i = 0; i < na; ++i) {
            const auto f = rotation_functions(es.eigenvalues()(i), h);
            cs(i) = f.cosine;
            sn(i) = f.sine_over_root;
            cm(i) = f.cosine_minus_one_over;
        }
        const Eigen::MatrixXcd CK = C * K;
        E.topLeftCorner(na, na).noalias() = K * cs.asDiagonal() * K.adjoint();
        E.bottomLeftCorner(nb, na).noalias() = -I * (CK * sn.asDiagonal() * K.adjoint());
        E.topRightCorner(na, nb) = -E.bottomLeftCorner(nb, na).adjoint();
        E.bottomRightCorner(nb, nb).noalias() = CK * cm.asDiagonal() * CK.adjoint();
        E.bottomRightCorner(nb, nb).diagonal().array() += 1.0;
    } else {
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(C * C.adjoint());
        const Eigen::MatrixXcd& L = es.eigenvectors();
        Eigen::VectorXd cs(nb), sn(nb), cm(nb);
        for (Eigen::Index i = 0; i < nb; ++i) {
            const auto f = rotation_functions(es.eigenvalues()(i), h);
            cs(i) = f.cosine;
            sn(i) = f.sine_over_root;
            cm(i) = f.cosine_minus_one_over;
        }
        const Eigen::MatrixXcd CL = C.adjoint() * L;
        E.bottomRightCorner(nb, nb).noalias() = L * cs.asDiagonal() * L.adjoint();
        E.topRightCorner(na, nb).noalias() = -I * (CL * sn.asDiagonal() * L.adjoint());
        E.bottomLeftCorner(nb, na) = -E.topRightCorner(na, nb).adjoint();
        E.topLeftCorner(na, na).noalias() = CL * cm.asDiagonal() * CL.adjoint();
        E.topLeftCorner(na, na).diagonal().array() += 1.0;
    }
    return E;
}

Eigen::MatrixXcd expm_antihermitian(const Eigen::MatrixXcd& G) {
    const Eigen::MatrixXcd H = I * G;  // Hermitian
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (H + H.adjoint()));
    const Eigen::VectorXcd phases =
        es.eigenvalues().unaryExpr([](double l) { return std::polar(1.0, -l); });
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::MatrixXcd unitary_log(const Eigen::MatrixXcd& U) {
    const Eigen::ComplexSchur<Eigen::MatrixXcd> schur(U);
    const Eigen::MatrixXcd& T = schur.matrixT();
    Eigen::VectorXcd logs(T.rows());
    for (Eigen::Index i = 0; i < T.rows(); ++i) logs(i) = std::log(T(i, i));
    const Eigen::MatrixXcd& Q = schur.matrixU();
    return Q * logs.asDiagonal() * Q.adjoint();
}

std::string_view to_string(Integrator integrator) noexcept {
    switch (integrator) {
        case Integrator::midpoint: return "midpoint";
        case Integrator::cf4: return "cf4";
        case Integrator::cf4_triple_jump: return "cf4-triple-jump";
    }
    return "?";
}

Integrator integrator_from_string(std::string_view name) {
    if (name == "midpoint") return Integrator::midpoint;
    if (name == "cf4") return Integrator::cf4;
    if (name == "cf4-triple-jump") return Integrator::cf4_triple_jump;
    throw std::invalid_argument("unknown integrator '" + std::string(name) +
                                "' (expected midpoint, cf4 or cf4-triple-jump)");
}

int integrator_order(Integrator integrator) noexcept {
    switch (integrator) {
        case Integrator::midpoint: return 2;
        case Integrator::cf4: return 4;
        case Integrator::cf4_triple_jump: return 6;
    }
    return 0;
}

namespace {

class SliceStepper {
public:
    SliceStepper(const CouplingModel& model, Integrator integrator)
        : model_(model), integrator_(integrator) {}

    // U <- S(t0, t0 + h) U
    void step(Eigen::MatrixXcd& U, double t0, double h) {
        switch (integrator_) {
            case Integrator::midpoint:
                model_.evaluate(t0 + 0.5 * h, m1_);
                apply(U, m1_, h);
                break;
            case Integrator::cf4:
                cf4(U, t0, h);
                break;
            case Integrator::cf4_triple_jump: {
                static const double w1 = 1.0 / (2.0 - std::pow(2.0, 0.2));
                static const double w0 = 1.0 - 2.0 * w1;
                cf4(U, t0, w1 * h);
                cf4(U, t0 + w1 * h, w0 * h);
                cf4(U, t0 + (w1 + w0) * h, w1 * h);
                break;
            }
        }
    }

private:
    // Blanes-Moan commutator-free scheme:
    // exp(-i h (a1 H1 + a2 H2)) exp(-i h (a2 H1 + a1 H2)), nodes 1/2 -+ sqrt(3)/6.
    void cf4(Eigen::MatrixXcd& U, double t0, double h) {
        static const double r = std::sqrt(3.0) / 6.0;
        static const double a1 = (3.0 - 2.0 * std::sqrt(3.0)) / 12.0;
        static const double a2 = (3.0 + 2.0 * std::sqrt(3.0)) / 12.0;
        model_.evaluate(t0 + (0.5 - r) * h, m1_);
        model_.evaluate(t0 + (0.5 + r) * h, m2_);
        mix_ = a2 * m1_ + a1 * m2_;
        apply(U, mix_, h);
        mix_ = a1 * m1_ + a2 * m2_;
        apply(U, mix_, h);
    }

    void apply(Eigen::MatrixXcd& U, const Eigen::MatrixXcd& C, double h) {
        tmp_.noalias() = block_rotation(C, h) * U;
        U.swap(tmp_);
    }

    const CouplingModel& model_;
    Integrator integrator_;
    Eigen::MatrixXcd m1_, m2_, mix_, tmp_;
};

}  // namespace

OneParticleUnitary propagate_slices(const CouplingModel& model, const TimeWindow& window,
                                    int n_steps, Integrator integrator, bool use_time_reversal) {
    if (n_steps < 2 || n_steps % 2 != 0) {
        throw std::invalid_argument("propagate_slices: n_steps must be even and >= 2");
    }
    const int n = model.grid_a().size() + model.grid_b().size();
    const double T = window.half_width;
    const double h = 2.0 * T / n_steps;
    SliceStepper stepper(model, integrator);
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(n, n);
    if (use_time_reversal) {
        // slices of [0, T]; the mirrored half is the transpose
        for (int k = 0; k < n_steps / 2; ++k) stepper.step(U, k * h, h);
        const Eigen::MatrixXcd forward = U;
        U.noalias() = forward * forward.transpose();
    } else {
        for (int k = 0; k < n_steps; ++k) stepper.step(U, -T + k * h, h);
    }
    return {model.grid_a(), model.grid_b(), std::move(U)};
}

OneParticleUnitary time_ordered_unitary(const DeviceParams& params, const FrequencyGrid& grid_a,
                                        const FrequencyGrid& grid_b, const OracleOptions& options) {
    params.validate();
    if (options.n_steps < 64 || options.n_steps % 2 != 0) {
        throw std::invalid_argument("time_ordered_unitary: n_steps must be even and >= 64");
    }
    const TimeWindow window = options.window.value_or(default_time_window(params));
    const CouplingModel model(params, grid_a, grid_b);

    OneParticleUnitary U =
        propagate_slices(model, window, options.n_steps, options.integrator, options.use_time_reversal);
    if (options.convergence_tolerance) {
        OneParticleUnitary fine = propagate_slices(model, window, 2 * options.n_steps,
                                                   options.integrator, options.use_time_reversal);
        const double change = (fine.matrix() - U.matrix()).cwiseAbs().maxCoeff();
        if (change > *options.convergence_tolerance) {
            std::ostringstream os;
            os << "time_ordered_unitary: doubling n_steps from " << options.n_steps
               << " changed U by " << change << " (tolerance " << *options.convergence_tolerance << ")";
            throw ConvergenceError(os.str(), change, *options.convergence_tolerance);
        }
        U = std::move(fine);
        U.convergence_estimate = change;
    }
    const double defect = U.unitarity_defect();
    if (defect > options.unitarity_tolerance) {
        std::ostringstream os;
        os << "time_ordered_unitary: ||U^dag U - I|| = " << defect << " exceeds "
           << options.unitarity_tolerance;
        throw UnitarityError(os.str());
    }
    return U;
}

namespace {

struct MagnusBlocks {
    Eigen::MatrixXcd P;   // int m, N_b x N_a; Omega_1 (b,a) block is -i P
    Eigen::MatrixXcd Ga;  // Omega_2 a block
    Eigen::MatrixXcd Gb;  // Omega_2 b block
    Eigen::MatrixXcd Y;   // Omega_3 (b,a) block
};

MagnusBlocks magnus_blocks(const CouplingModel& model, const TimeWindow& window, int order,
                           int panels, int q) {
    const int na = model.grid_a().size(), nb = model.grid_b().size();
    MagnusBlocks acc{Eigen::MatrixXcd::Zero(nb, na), Eigen::MatrixXcd::Zero(na, na),
                     Eigen::MatrixXcd::Zero(nb, nb), Eigen::MatrixXcd::Zero(nb, na)};
    const PanelRule rule(-window.half_width, window.half_width, panels, q);

    std::vector<Eigen::MatrixXcd> m(q), Pn(q), ga(q), gb(q);
    Eigen::MatrixXcd X, Gan, Gbn, y;

    for (int k = 0; k < panels; ++k) {
        for (int i = 0; i < q; ++i) model.evaluate(rule.node(k, i), m[i]);

        for (int i = 0; i < q; ++i) {
            Pn[i] = acc.P;
            for (int j = 0; j < q; ++j) Pn[i] += rule.partial_weight(i, j) * m[j];
        }
        if (order >= 2) {
            // Omega_2' = [A, Omega_1]/2 = -1/2 diag(m^dag P - P^dag m, m P^dag - P m^dag)
            for (int i = 0; i < q; ++i) {
                X.noalias() = m[i].adjoint() * Pn[i];
                ga[i] = -0.5 * (X - X.adjoint());
                X.noalias() = m[i] * Pn[i].adjoint();
                gb[i] = -0.5 * (X - X.adjoint());
            }
        }
        if (order >= 3) {
            // Omega_3' (b,a) block: -i/2 (m Ga - Gb m) - i/12 (P Ea - Eb P),
            // with Ea = m^dag P - P^dag m = -2 ga, Eb = m P^dag - P m^dag = -2 gb.
            for (int i = 0; i < q; ++i) {
                Gan = acc.Ga;
                Gbn = acc.Gb;
                for (int j = 0; j < q; ++j) {
                    Gan += rule.partial_weight(i, j) * ga[j];
                    Gbn += rule.partial_weight(i, j) * gb[j];
                }
                y.noalias() = m[i] * Gan;
                y.noalias() -= Gbn * m[i];
                y *= -0.5 * I;
                X.noalias() = Pn[i] * ga[i];
                X.noalias() -= gb[i] * Pn[i];
                y += (I / 6.0) * X;
                acc.Y += rule.weight(i) * y;
            }
        }
        for (int i = 0; i < q; ++i) {
            acc.P += rule.weight(i) * m[i];
            if (order >= 2) {
                acc.Ga += rule.weight(i) * ga[i];
                acc.Gb += rule.weight(i) * gb[i];
            }
        }
    }
    return acc;
}

struct MagnusFull {
    Eigen::MatrixXcd omega1, omega2, omega3;
};

MagnusFull assemble(const MagnusBlocks& b, int na, int nb) {
    const int n = na + nb;
    MagnusFull f{Eigen::MatrixXcd::Zero(n, n), Eigen::MatrixXcd::Zero(n, n), Eigen::MatrixXcd::Zero(n, n)};
    f.omega1.bottomLeftCorner(nb, na) = -I * b.P;
    f.omega1.topRightCorner(na, nb) = -I * b.P.adjoint();
    f.omega2.topLeftCorner(na, na) = b.Ga;
    f.omega2.bottomRightCorner(nb, nb) = b.Gb;
    f.omega3.bottomLeftCorner(nb, na) = b.Y;
    f.omega3.topRightCorner(na, nb) = -b.Y.adjoint();
    return f;
}

}  // namespace

MagnusGenerators magnus_generators(const DeviceParams& params, const FrequencyGrid& grid_a,
                                   const FrequencyGrid& grid_b, const MagnusOptions& options) {
    params.validate();
    if (options.order < 1 || options.order > 3) {
        throw std::invalid_argument("magnus_generators: order must be 1, 2 or 3");
    }
    if (options.panels < 1 || options.nodes_per_panel < 2) {
        throw std::invalid_argument("magnus_generators: need panels >= 1 and nodes_per_panel >= 2");
    }
    const TimeWindow window = options.window.value_or(default_time_window(params));
    const CouplingModel model(params, grid_a, grid_b);
    const int na = grid_a.size(), nb = grid_b.size();

    int panels = options.panels;
    MagnusFull result = assemble(magnus_blocks(model, window, options.order, panels, options.nodes_per_panel), na, nb);
    double error = 0.0;
    if (options.tolerance) {
        panels *= 2;
        MagnusFull fine = assemble(magnus_blocks(model, window, options.order, panels, options.nodes_per_panel), na, nb);
        error = std::max({(fine.omega1 - result.omega1).cwiseAbs().maxCoeff(),
                          (fine.omega2 - result.omega2).cwiseAbs().maxCoeff(),
                          (fine.omega3 - result.omega3).cwiseAbs().maxCoeff()});
        if (error > *options.tolerance) {
            std::ostringstream os;
            os << "magnus_generators: panel refinement changed the generators by " << error
               << " (tolerance " << *options.tolerance << ")";
            throw ConvergenceError(os.str(), error, *options.tolerance);
        }
        result = std::move(fine);
    }
    return {grid_a,
            grid_b,
            std::move(result.omega1),
            std::move(result.omega2),
            std::move(result.omega3),
            options.order,
            panels,
            options.nodes_per_panel,
            error};
}

EffectiveJca effective_jca(const MagnusGenerators& gens, const JcaMatrix& j1) {
    if (!j1.weighted) {
        throw std::invalid_argument("effective_jca: J1 must carry the mode weights (weighted flag unset)");
    }
    require_same_grids(gens.grid_a, gens.grid_b, j1.grid_a, j1.grid_b, "effective_jca");
    if (gens.order < 3) throw std::invalid_argument("effective_jca: generators must be computed to order 3");
    const int na = gens.grid_a.size(), nb = gens.grid_b.size();
    const double two_pi = 2.0 * std::numbers::pi;

    const auto o1_ba = gens.omega1.bottomLeftCorner(nb, na);
    const auto ga = gens.omega2.topLeftCorner(na, na);
    const auto gb = gens.omega2.bottomRightCorner(nb, nb);

    EffectiveJca out{gens.grid_a, gens.grid_b, {}, j1.values, {}, {}};
    out.j3 = I * gens.omega3.bottomLeftCorner(nb, na) / two_pi;
    // [Omega_1, Omega_2]/2 has (b,a) block (o1_ba Ga - Gb o1_ba)/2 = 2 pi K3
    out.k3 = (o1_ba * ga - gb * o1_ba) / (2.0 * two_pi);
    out.values = out.j1 + out.j3 + I * out.k3;
    return out;
}

OneParticleUnitary beam_splitter_unitary(const FrequencyGrid& grid_a, const FrequencyGrid& grid_b,
                                         const Eigen::MatrixXcd& jca) {
    if (jca.rows() != grid_b.size() || jca.cols() != grid_a.size()) {
        throw GridMismatchError("beam_splitter_unitary: JCA shape does not match the grids");
    }
    return {grid_a, grid_b, block_rotation(2.0 * std::numbers::pi * jca, 1.0)};
}

}  // namespace qfc
