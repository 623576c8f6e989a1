// experiments.hpp - efficiency and Schmidt sweeps over the interaction
// strength r~0 eps, cascaded devices and mu = 0 design.

#pragma once

#include "qfc/schmidt.hpp"

#include <string>
#include <vector>

namespace qfc {

// How the time-ordered evolution is modelled in a sweep.
enum class TocModel {
    exact,   // time-ordered oracle
    magnus3  // beam splitter built from the effective JCA J1 + J3 + i K3
};

std::string_view to_string(TocModel model) noexcept;
TocModel toc_model_from_string(std::string_view name);

struct Numerics {
    GridSettings grid;
    OracleOptions oracle;
    MagnusOptions magnus;
    TocModel toc_model = TocModel::exact;
    int threads = 0;  // 0: all hardware threads
};

struct SweepPoint {
    double strength = 0.0;  // r~0 eps
    double epsilon = 0.0;
    double eff_toc = 0.0;
    double eff_no_toc = 0.0;       // sin^2(strength)
    Eigen::VectorXd r;             // top_k Schmidt numbers, zero padded
    Eigen::VectorXd overlaps_sq;   // |c_theta|^2 for the same modes, zero padded
    double convergence_estimate = 0.0;
};

struct SweepResult {
    DeviceParams params;  // template, epsilon ignored
    MuParameters mu;
    Numerics numerics;
    int top_k = 4;
    int input_order = 0;
    std::vector<SweepPoint> points;
    std::vector<std::string> warnings;
};

// Evaluation of one device: unitary under the chosen model and its Schmidt data.
// With TocModel::magnus3 the Schmidt numbers are 2 pi sigma(J), not folded
// into [0, pi/2].
struct DeviceEvaluation {
    OneParticleUnitary unitary;
    SchmidtData schmidt;
};

DeviceEvaluation evaluate_device(const DeviceParams& params, const DeviceGrids& grids,
                                 const Numerics& numerics);

// 65 points over [0, 3.25].
std::vector<double> default_strength_grid();

// Efficiency of the Hermite-Gaussian input of the given order (f0 matched to
// mu_a by default) with and without time ordering. Points run concurrently,
// results are returned in input order; the first failing point (in input
// order) rethrows its exception.
SweepResult sweep_efficiency(const DeviceParams& params, const std::vector<double>& strengths,
                             const Numerics& numerics = {}, int input_order = 0, int top_k = 4);

// Same evaluation, reported as Schmidt spectra.
SweepResult sweep_schmidt(const DeviceParams& params, const std::vector<double>& strengths,
                          int top_k = 4, const Numerics& numerics = {}, int input_order = 0);

struct CascadeSpec {
    DeviceParams base;  // base.epsilon is the total coupling
    int stages = 1;

    void validate() const;
};

// Product of `stages` identical oracle unitaries at eps / stages each.
OneParticleUnitary cascade_unitary(const CascadeSpec& spec, const Numerics& numerics = {});

// Frobenius norm of the block-diagonal part of log U.
double rotation_norm(const OneParticleUnitary& unitary);

struct CascadePoint {
    int stages = 1;
    double strength = 0.0;
    double eff_toc = 0.0;
    double eff_no_toc = 0.0;
    double rotation_norm = 0.0;
};

std::vector<CascadePoint> cascade_sweep(const DeviceParams& params, double strength,
                                        const std::vector<int>& stages, const Numerics& numerics = {},
                                        int input_order = 0);

// tau = sqrt(-(s_p - s_a)(s_p - s_b)); throws InfeasibleDesign unless s_p lies
// strictly between s_a and s_b.
double design_mu_zero(double s_a, double s_b, double s_p);

}  // namespace qfc
