#include "qfc/experiments.hpp"

#include "qfc/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

namespace qfc {

namespace {

// Runs body(i) for i in [0, n) on up to `threads` workers and rethrows the
// exception of the lowest failing index.
template <class Body>
void parallel_for(int n, int threads, Body body) {
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, std::max(n, 1));
    std::vector<std::exception_ptr> errors(n);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

bool is_mu_zero(const DeviceParams& params, const MuParameters& mu) {
    return std::abs(mu.mu_sq) / (params.tau * params.tau) <= 1e-12;
}

SweepResult run_sweep(const DeviceParams& params, const std::vector<double>& strengths,
                      const Numerics& numerics, int input_order, int top_k) {
    params.validate();
    if (top_k < 1) throw std::invalid_argument("sweep: top_k must be >= 1");
    for (double s : strengths) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("sweep: strengths must be finite and >= 0");
    }

    SweepResult result;
    result.params = params.with_epsilon(0.0);
    result.mu = mu_parameters(params);
    result.numerics = numerics;
    result.top_k = top_k;
    result.input_order = input_order;
    if (!is_mu_zero(params, result.mu)) {
        std::ostringstream os;
        os << "mu_sq = " << result.mu.mu_sq << " is not zero; the first-order JCA is not separable";
        result.warnings.push_back(os.str());
    }

    const DeviceGrids grids = default_grids(params, numerics.grid);
    const WavePacket photon = hermite_photon(params, grids.a, input_order);
    result.points.resize(strengths.size());

    parallel_for(static_cast<int>(strengths.size()), numerics.threads, [&](int i) {
        SweepPoint& p = result.points[i];
        p.strength = strengths[i];
        p.epsilon = strengths[i] / result.mu.r0_tilde;
        const double s = std::sin(p.strength);
        p.eff_no_toc = s * s;

        const DeviceEvaluation ev = evaluate_device(params.with_epsilon(p.epsilon), grids, numerics);
        p.eff_toc = std::clamp(conversion_probability(ev.unitary, photon), 0.0, 1.0);
        p.convergence_estimate = ev.unitary.convergence_estimate;

        p.r = Eigen::VectorXd::Zero(top_k);
        p.overlaps_sq = Eigen::VectorXd::Zero(top_k);
        const Eigen::VectorXcd c = mode_overlaps(ev.schmidt, photon);
        const int n = std::min(top_k, ev.schmidt.size());
        for (int k = 0; k < n; ++k) {
            p.r(k) = ev.schmidt.r(k);
            p.overlaps_sq(k) = std::norm(c(k));
        }
    });
    return result;
}

}  // namespace

std::string_view to_string(TocModel model) noexcept {
    return model == TocModel::exact ? "exact" : "magnus3";
}

TocModel toc_model_from_string(std::string_view name) {
    if (name == "exact") return TocModel::exact;
    if (name == "magnus3") return TocModel::magnus3;
    throw std::invalid_argument("unknown toc_model '" + std::string(name) + "' (expected exact or magnus3)");
}

DeviceEvaluation evaluate_device(const DeviceParams& params, const DeviceGrids& grids,
                                 const Numerics& numerics) {
    if (numerics.toc_model == TocModel::exact) {
        OneParticleUnitary U = time_ordered_unitary(params, grids.a, grids.b, numerics.oracle);
        SchmidtData sd = schmidt_decompose(U);
        return {std::move(U), std::move(sd)};
    }
    CoverageCheck coverage;
    if (params.pmf_kind != PmfKind::gaussian) coverage.max_edge_to_peak.reset();
    const JcaMatrix j1 = build_j1(params, grids.a, grids.b, coverage);
    MagnusOptions mo = numerics.magnus;
    mo.order = 3;
    if (!mo.window) mo.window = numerics.oracle.window;
    const MagnusGenerators gens = magnus_generators(params, grids.a, grids.b, mo);
    const EffectiveJca jbar = effective_jca(gens, j1);
    OneParticleUnitary U = beam_splitter_unitary(grids.a, grids.b, jbar.values);
    U.convergence_estimate = gens.truncation_error;
    SchmidtData sd = schmidt_decompose(jbar);
    return {std::move(U), std::move(sd)};
}

std::vector<double> default_strength_grid() {
    std::vector<double> grid(65);
    for (int i = 0; i < 65; ++i) grid[i] = 3.25 * i / 64.0;
    return grid;
}

SweepResult sweep_efficiency(const DeviceParams& params, const std::vector<double>& strengths,
                             const Numerics& numerics, int input_order, int top_k) {
    return run_sweep(params, strengths, numerics, input_order, top_k);
}

SweepResult sweep_schmidt(const DeviceParams& params, const std::vector<double>& strengths, int top_k,
                          const Numerics& numerics, int input_order) {
    return run_sweep(params, strengths, numerics, input_order, top_k);
}

void CascadeSpec::validate() const {
    base.validate();
    if (stages < 1) throw std::invalid_argument("CascadeSpec: stages must be >= 1");
}

OneParticleUnitary cascade_unitary(const CascadeSpec& spec, const Numerics& numerics) {
    spec.validate();
    const DeviceGrids grids = default_grids(spec.base, numerics.grid);
    const DeviceParams stage = spec.base.with_epsilon(spec.base.epsilon / spec.stages);
    const OneParticleUnitary single = time_ordered_unitary(stage, grids.a, grids.b, numerics.oracle);
    if (spec.stages == 1) return single;

    Eigen::MatrixXcd total = single.matrix();
    for (int k = 1; k < spec.stages; ++k) total = single.matrix() * total;
    OneParticleUnitary U(grids.a, grids.b, std::move(total));
    U.convergence_estimate = spec.stages * single.convergence_estimate;
    const double defect = U.unitarity_defect();
    const double allowed = spec.stages * numerics.oracle.unitarity_tolerance;
    if (defect > allowed) {
        std::ostringstream os;
        os << "cascade_unitary: ||U^dag U - I|| = " << defect << " exceeds " << allowed;
        throw UnitarityError(os.str());
    }
    return U;
}

double rotation_norm(const OneParticleUnitary& unitary) {
    const Eigen::MatrixXcd L = unitary_log(unitary.matrix());
    const int na = unitary.na(), nb = unitary.nb();
    return std::hypot(L.topLeftCorner(na, na).norm(), L.bottomRightCorner(nb, nb).norm());
}

std::vector<CascadePoint> cascade_sweep(const DeviceParams& params, double strength,
                                        const std::vector<int>& stages, const Numerics& numerics,
                                        int input_order) {
    params.validate();
    const MuParameters mu = mu_parameters(params);
    const DeviceGrids grids = default_grids(params, numerics.grid);
    const WavePacket photon = hermite_photon(params, grids.a, input_order);
    const double s = std::sin(strength);

    std::vector<CascadePoint> out(stages.size());
    parallel_for(static_cast<int>(stages.size()), numerics.threads, [&](int i) {
        const CascadeSpec spec{params.with_epsilon(strength / mu.r0_tilde), stages[i]};
        const OneParticleUnitary U = cascade_unitary(spec, numerics);
        out[i] = {stages[i], strength, std::clamp(conversion_probability(U, photon), 0.0, 1.0), s * s,
                  rotation_norm(U)};
    });
    return out;
}

double design_mu_zero(double s_a, double s_b, double s_p) {
    if (!std::isfinite(s_a) || !std::isfinite(s_b) || !std::isfinite(s_p)) {
        throw std::invalid_argument("design_mu_zero: group-delay parameters must be finite");
    }
    const double product = (s_p - s_a) * (s_p - s_b);
    if (!(product < 0.0)) {
        std::ostringstream os;
        os << "mu = 0 design infeasible: requires s_a < s_p < s_b or s_b < s_p < s_a (got s_a = " << s_a
           << ", s_p = " << s_p << ", s_b = " << s_b << ")";
        throw InfeasibleDesign(os.str());
    }
    return std::sqrt(-product);
}

}  // namespace qfc
