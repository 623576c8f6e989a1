// schmidt.hpp - singular-value analysis of JCAs and of the converting block
// of a one-particle unitary, plus single-photon transformation helpers.

#pragma once

#include "qfc/propagate.hpp"

#include <vector>

namespace qfc {

enum class SchmidtSource { first_order, effective_jca, oracle_block };

std::string_view to_string(SchmidtSource source) noexcept;

struct SchmidtData {
    FrequencyGrid grid_a;
    FrequencyGrid grid_b;
    SchmidtSource source = SchmidtSource::first_order;
    Eigen::VectorXd r;                // Schmidt numbers, descending, radians
    Eigen::VectorXd singular_values;  // sigma_theta of the decomposed matrix
    Eigen::MatrixXcd input_modes;     // N_a x n_kept, columns k_theta
    Eigen::MatrixXcd output_modes;    // N_b x n_kept, columns l_theta

    int size() const noexcept { return static_cast<int>(r.size()); }
};

struct SchmidtOptions {
    // Modes with sigma < relative_cutoff * sigma_max are dropped; 0 keeps all.
    double relative_cutoff = 1e-8;
};

// Weighted JCA: r = 2 pi sigma, so that r equals eps r~_theta for J1.
SchmidtData schmidt_decompose(const JcaMatrix& jca, const SchmidtOptions& options = {});
SchmidtData schmidt_decompose(const EffectiveJca& jca, const SchmidtOptions& options = {});
// Converting block U_ba: r = arcsin(sigma). Singular values up to 1 + 1e-9 are
// clamped; above 1 + 1e-6 throws UnitarityError.
SchmidtData schmidt_decompose(const OneParticleUnitary& unitary, const SchmidtOptions& options = {});

// ||U_ba g||^2.
double conversion_probability(const OneParticleUnitary& unitary, const WavePacket& g);

// c_theta = <k_theta, g>.
Eigen::VectorXcd mode_overlaps(const SchmidtData& sd, const WavePacket& g);

struct TransformedPhoton {
    Eigen::VectorXcd a;  // U_aa g, on grid_a
    Eigen::VectorXcd b;  // U_ba g, on grid_b
};

TransformedPhoton transform_photon(const OneParticleUnitary& unitary, const WavePacket& g);

}  // namespace qfc
