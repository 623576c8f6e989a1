#include "qfc/schmidt.hpp"

#include "qfc/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace qfc {

namespace {

void require_finite(const Eigen::MatrixXcd& m, const char* where) {
    if (!m.allFinite()) throw std::invalid_argument(std::string(where) + ": matrix has non-finite entries");
}

// Index of the first entry whose magnitude is within a relative 1e-9 of the maximum.
Eigen::Index leading_entry(const Eigen::VectorXcd& v) {
    const double top = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) >= top * (1.0 - 1e-9)) return i;
    }
    return 0;
}

SchmidtData decompose(const Eigen::MatrixXcd& m, const FrequencyGrid& ga, const FrequencyGrid& gb,
                      SchmidtSource source, const SchmidtOptions& options) {
    const Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    const Eigen::Index full = s.size();
    const double smax = full > 0 ? s(0) : 0.0;

    std::vector<Eigen::Index> kept;
    if (smax > 0.0) {
        for (Eigen::Index i = 0; i < full; ++i) {
            if (s(i) >= options.relative_cutoff * smax) kept.push_back(i);
        }
    }

    // degenerate values: order by the position of the leading input coefficient
    std::stable_sort(kept.begin(), kept.end(), [&](Eigen::Index x, Eigen::Index y) {
        const double tol = 1e-12 * std::max(1.0, smax);
        if (std::abs(s(x) - s(y)) > tol) return s(x) > s(y);
        return leading_entry(svd.matrixV().col(x)) < leading_entry(svd.matrixV().col(y));
    });

    const auto n = static_cast<Eigen::Index>(kept.size());
    SchmidtData sd{ga, gb, source, Eigen::VectorXd(n), Eigen::VectorXd(n),
                   Eigen::MatrixXcd(m.cols(), n), Eigen::MatrixXcd(m.rows(), n)};
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index i = kept[j];
        Eigen::VectorXcd k = svd.matrixV().col(i);
        Eigen::VectorXcd l = svd.matrixU().col(i);
        const cdouble lead = k(leading_entry(k));
        const cdouble phase = std::conj(lead) / std::abs(lead);
        sd.input_modes.col(j) = k * phase;
        sd.output_modes.col(j) = l * phase;
        sd.singular_values(j) = s(i);
    }
    return sd;
}

void require_grid(const FrequencyGrid& expected, const FrequencyGrid& actual, const char* where) {
    if (!(expected == actual)) throw GridMismatchError(std::string(where) + ": wave packet grid differs from grid_a");
}

}  // namespace

std::string_view to_string(SchmidtSource source) noexcept {
    switch (source) {
        case SchmidtSource::first_order: return "first_order";
        case SchmidtSource::effective_jca: return "effective_jca";
        case SchmidtSource::oracle_block: return "oracle_block";
    }
    return "?";
}

SchmidtData schmidt_decompose(const JcaMatrix& jca, const SchmidtOptions& options) {
    require_finite(jca.values, "schmidt_decompose");
    if (!jca.weighted) throw std::invalid_argument("schmidt_decompose: JCA must carry the mode weights");
    SchmidtData sd = decompose(jca.values, jca.grid_a, jca.grid_b, SchmidtSource::first_order, options);
    sd.r = 2.0 * std::numbers::pi * sd.singular_values;
    return sd;
}

SchmidtData schmidt_decompose(const EffectiveJca& jca, const SchmidtOptions& options) {
    require_finite(jca.values, "schmidt_decompose");
    SchmidtData sd = decompose(jca.values, jca.grid_a, jca.grid_b, SchmidtSource::effective_jca, options);
    sd.r = 2.0 * std::numbers::pi * sd.singular_values;
    return sd;
}

SchmidtData schmidt_decompose(const OneParticleUnitary& unitary, const SchmidtOptions& options) {
    const Eigen::MatrixXcd ba = unitary.ba();
    require_finite(ba, "schmidt_decompose");
    SchmidtData sd = decompose(ba, unitary.grid_a(), unitary.grid_b(), SchmidtSource::oracle_block, options);
    for (Eigen::Index i = 0; i < sd.singular_values.size(); ++i) {
        double& s = sd.singular_values(i);
        if (s > 1.0 + 1e-6) {
            std::ostringstream os;
            os << "schmidt_decompose: singular value " << s << " of U_ba exceeds 1";
            throw UnitarityError(os.str());
        }
        s = std::min(s, 1.0);
    }
    sd.r = sd.singular_values.unaryExpr([](double s) { return std::asin(s); });
    return sd;
}

double conversion_probability(const OneParticleUnitary& unitary, const WavePacket& g) {
    require_grid(unitary.grid_a(), g.grid(), "conversion_probability");
    return (unitary.ba() * g.amplitudes()).squaredNorm();
}

Eigen::VectorXcd mode_overlaps(const SchmidtData& sd, const WavePacket& g) {
    require_grid(sd.grid_a, g.grid(), "mode_overlaps");
    return sd.input_modes.adjoint() * g.amplitudes();
}

TransformedPhoton transform_photon(const OneParticleUnitary& unitary, const WavePacket& g) {
    require_grid(unitary.grid_a(), g.grid(), "transform_photon");
    return {unitary.aa() * g.amplitudes(), unitary.ba() * g.amplitudes()};
}

}  // namespace qfc
