#pragma once

#include <cstdint>
#include <vector>

#include "stitch3d/geometry.hpp"

namespace stitch3d {

// Translation cluster centers, meters. The camera branch convention uses 60.
struct TranslationBinSet {
    std::vector<Vec3> centroids;
};

// Rotation cluster centers on the unit quaternion sphere (double-cover
// aware). The camera branch convention uses 30.
struct RotationBinSet {
    std::vector<UnitQuaternion> centroids;
};

void validate_bins(const TranslationBinSet& bins);
void validate_bins(const RotationBinSet& bins);

// Binned multinomials over relative camera rotation and translation.
// Probabilities are validated to be non-negative and to sum to 1 within
// 1e-9 per marginal.
struct CameraPoseDistribution {
    RotationBinSet rotation_bins;
    std::vector<double> rotation_probs;
    TranslationBinSet translation_bins;
    std::vector<double> translation_probs;
};

void validate_distribution(const CameraPoseDistribution& dist);

// One candidate relative camera pose: a (rotation bin, translation bin)
// pair with the bins' probabilities. The pose maps camera-1-frame
// coordinates to camera-2-frame coordinates.
struct PoseHypothesis {
    UnitQuaternion rotation;
    Vec3 translation{0.0, 0.0, 0.0};
    double rotation_prob = 1.0;
    double translation_prob = 1.0;
    int rotation_bin = 0;
    int translation_bin = 0;

    RigidPose pose() const { return RigidPose{rotation, translation}; }
};

struct ClusterOptions {
    std::uint64_t seed = 0;
    int max_iter = 100;
    int threads = 1;
};

// Per-iteration assignment costs, for convergence checks.
struct ClusterTrace {
    std::vector<double> cost_history;
    int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding. Terminates when assignments
// stop changing or max_iter is reached; empty clusters are re-seeded from
// the sample farthest from its centroid.
TranslationBinSet kmeans_translations(const std::vector<Vec3>& samples, int k,
                                      const ClusterOptions& options = {},
                                      ClusterTrace* trace = nullptr);

// Spherical k-means on quaternions with |dot| similarity, so q and -q fall
// in the same cluster. Centroids are the normalized means of sign-aligned
// members; a cluster whose members cancel out is re-seeded from the sample
// farthest from its centroid.
RotationBinSet spherical_kmeans_rotations(const std::vector<UnitQuaternion>& samples, int k,
                                          const ClusterOptions& options = {},
                                          ClusterTrace* trace = nullptr);

// Cartesian product of the k_rot most likely rotation bins and k_trans most
// likely translation bins, ordered by descending joint probability; ties
// break toward lower bin indices.
std::vector<PoseHypothesis> top_k_hypotheses(const CameraPoseDistribution& dist, int k_rot,
                                             int k_trans);

int nearest_rotation_bin(const RotationBinSet& bins, const UnitQuaternion& q);
int nearest_translation_bin(const TranslationBinSet& bins, const Vec3& t);

}  // namespace stitch3d
