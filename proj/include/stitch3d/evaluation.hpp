#pragma once

#include <vector>

#include "stitch3d/affinity.hpp"
#include "stitch3d/geometry.hpp"
#include "stitch3d/pose_space.hpp"
#include "stitch3d/stitcher.hpp"

namespace stitch3d {

// 3D detection gates: translation under 1 m, mean log2 scale error under
// 0.2, geodesic rotation under 30 degrees, F-score@0.05 of at least 0.25.
struct DetectionThresholds {
    double trans_max = 1.0;
    double scale_max = 0.2;
    double rot_max = M_PI / 6.0;
    double fscore_min = 0.25;
    double fscore_tau = 0.05;
};

void validate_thresholds(const DetectionThresholds& th);

struct DetectionRecord {
    double confidence = 0.0;
    bool trans_ok = false;
    bool scale_ok = false;
    bool rot_ok = false;
    bool shape_ok = false;

    bool is_true_positive() const { return trans_ok && scale_ok && rot_ok && shape_ok; }
};

// Which gate(s) a record must pass to count as a true positive; `all`
// requires every gate, the others reproduce the per-metric AP columns.
enum class DetectionCriterion { all, translation, scale, rotation, shape };

// Greedy matching: predictions in descending confidence each claim the
// nearest unmatched ground-truth object by translation distance (matching
// categories when both sides carry one); per-metric flags are then scored
// against the claimed object. Predictions left without a ground-truth
// object fail every gate.
std::vector<DetectionRecord> match_and_score(const std::vector<SceneObject>& predictions,
                                             const std::vector<SceneObject>& ground_truth,
                                             const DetectionThresholds& th = {});

// Area under the precision-recall curve with the all-point interpolation:
// the precision envelope is made monotone non-increasing before summing
// over recall steps. Records are ranked by descending confidence, ties by
// input order.
double average_precision(const std::vector<DetectionRecord>& records, int num_ground_truth,
                         DetectionCriterion criterion = DetectionCriterion::all);

// Confidence for every (i, j) pair: A_ij when the pair is predicted to
// correspond, 0.5 * A_ij otherwise. Row-major N*M array.
std::vector<double> correspondence_confidence(const AffinityMatrix& a,
                                              const Correspondence& predicted);

// Binary AP over all N*M pairs with gt pairs as positives, ranked by
// confidence (ties in row-major order). Throws when gt is empty.
double correspondence_ap(const std::vector<double>& confidences, int n, int m,
                         const Correspondence& gt);

struct ErrorStats {
    double median = 0.0;
    double mean = 0.0;
    double frac_within = 0.0;  // fraction of errors <= the within threshold
};

struct RelativePoseStats {
    ErrorStats translation;  // meters; frac within 1 m by default
    ErrorStats rotation;     // radians; frac within 30 degrees by default
    int count = 0;
};

RelativePoseStats relative_pose_stats(const std::vector<PoseHypothesis>& predicted,
                                      const std::vector<RigidPose>& ground_truth,
                                      double trans_within = 1.0, double rot_within = M_PI / 6.0);

}  // namespace stitch3d
