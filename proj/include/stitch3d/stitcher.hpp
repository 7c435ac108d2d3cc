#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "stitch3d/affinity.hpp"
#include "stitch3d/geometry.hpp"
#include "stitch3d/pose_space.hpp"

namespace stitch3d {

// Partial one-to-one matching between view-1 and view-2 object indices.
// Pairs are kept sorted; each row and column appears at most once.
class Correspondence {
public:
    Correspondence() = default;
    explicit Correspondence(std::vector<std::pair<int, int>> pairs);

    const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
    int size() const { return static_cast<int>(pairs_.size()); }
    bool empty() const { return pairs_.empty(); }
    bool contains(int i, int j) const;
    bool uses_row(int i) const;
    bool uses_col(int j) const;

    bool operator==(const Correspondence& rhs) const { return pairs_ == rhs.pairs_; }

private:
    std::vector<std::pair<int, int>> pairs_;
};

// Objective weights and search budget. Defaults follow the tuned stitching
// configuration: lambda_s = 5, lambda_u = 1, pose weights 5 (rotation) and
// 1 (translation), 128 correspondence samples, affinity threshold 0.5.
struct StitchWeights {
    double lambda_s = 5.0;
    double lambda_u = 1.0;
    double lambda_p_rot = 5.0;
    double lambda_p_trans = 1.0;
    int k_samples = 128;
    double affinity_threshold = 0.5;
};

void validate_weights(const StitchWeights& w);

// Unweighted objective components. distance is the mean chamfer over
// matched pairs; pose_rot/pose_trans are 1 minus the bin probabilities;
// similarity is the summed (1 - A_ij) over matched pairs; unmatched is
// min(N, M) - |C|.
struct ObjectiveTerms {
    double distance = 0.0;
    double pose_rot = 0.0;
    double pose_trans = 0.0;
    double similarity = 0.0;
    double unmatched = 0.0;
};

inline double weighted_total(const ObjectiveTerms& t, const StitchWeights& w) {
    return t.distance + w.lambda_p_rot * t.pose_rot + w.lambda_p_trans * t.pose_trans +
           w.lambda_s * t.similarity + w.lambda_u * t.unmatched;
}

struct StitchResult {
    PoseHypothesis pose;
    Correspondence correspondence;
    std::vector<SceneObject> merged;  // view-1 camera frame
    double objective = 0.0;
    ObjectiveTerms terms;
    std::uint64_t seed = 0;
};

// Mean chamfer distance between matched objects' edge clouds after mapping
// view-1 objects through their own transform and the camera pose, and
// view-2 objects through their own transform. Empty correspondence scores 0.
double stitch_distance(const std::vector<SceneObject>& view1, const std::vector<SceneObject>& view2,
                       const RigidPose& pose, const Correspondence& c,
                       const EdgeExtraction& edge = {});

// Full objective for one (pose, correspondence) candidate.
std::pair<double, ObjectiveTerms> objective(const std::vector<SceneObject>& view1,
                                            const std::vector<SceneObject>& view2,
                                            const PoseHypothesis& pose, const Correspondence& c,
                                            const AffinityMatrix& a, const StitchWeights& w,
                                            const EdgeExtraction& edge = {});

// Candidate correspondences over the feasible pairs. The empty
// correspondence is always candidate 0. When the feasible pairs admit at
// most k + 1 legal matchings the list is their complete enumeration;
// otherwise it holds k randomized greedy draws (pair picks weighted by
// affinity, with a chance to stop early), duplicates allowed.
std::vector<Correspondence> sample_correspondences(const std::vector<std::pair<int, int>>& feasible,
                                                   const AffinityMatrix& a, int k,
                                                   std::uint64_t seed);

struct SolveOptions {
    StitchWeights weights;
    EdgeExtraction edge;
    int k_rot = 3;
    int k_trans = 10;
    std::uint64_t seed = 0;
    int threads = 1;
};

// Joint search over the top pose hypotheses and sampled correspondences
// for the candidate minimizing the objective; ties break toward earlier
// hypotheses, then earlier samples. Deterministic given the seed for any
// thread count. The winning candidate is merged into a single view-1-frame
// scene.
StitchResult solve(const std::vector<SceneObject>& view1, const std::vector<SceneObject>& view2,
                   const AffinityMatrix& a, const CameraPoseDistribution& dist,
                   const SolveOptions& options = {});

// Fuses the two views given a chosen pose and correspondence: matched pairs
// average translation and scale, keep one rotation and one shape at random,
// and take the max score; unmatched view-2 objects are carried through the
// inverse pose.
std::vector<SceneObject> merge(const std::vector<SceneObject>& view1,
                               const std::vector<SceneObject>& view2, const RigidPose& pose,
                               const Correspondence& c, std::uint64_t seed);

}  // namespace stitch3d
