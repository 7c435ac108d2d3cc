#include "stitch3d/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stitch3d {

void validate_thresholds(const DetectionThresholds& th) {
    if (!(th.trans_max > 0.0 && th.scale_max > 0.0 && th.rot_max > 0.0 && th.fscore_min > 0.0 &&
          th.fscore_tau > 0.0)) {
        fail_invalid("DetectionThresholds: all thresholds must be positive");
    }
}

namespace {

bool category_compatible(const SceneObject& a, const SceneObject& b) {
    if (!a.category || !b.category) return true;
    return *a.category == *b.category;
}

bool passes(const DetectionRecord& r, DetectionCriterion criterion) {
    switch (criterion) {
        case DetectionCriterion::all:
            return r.is_true_positive();
        case DetectionCriterion::translation:
            return r.trans_ok;
        case DetectionCriterion::scale:
            return r.scale_ok;
        case DetectionCriterion::rotation:
            return r.rot_ok;
        case DetectionCriterion::shape:
            return r.shape_ok;
    }
    return false;
}

}  // namespace

std::vector<DetectionRecord> match_and_score(const std::vector<SceneObject>& predictions,
                                             const std::vector<SceneObject>& ground_truth,
                                             const DetectionThresholds& th) {
    validate_thresholds(th);

    std::vector<int> order(predictions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return predictions[a].score > predictions[b].score;
    });

    // Edge clouds in the grid-normalized unit cube; shape is compared in
    // shape space, placement by the transform metrics.
    auto cloud_of = [](const SceneObject& obj) -> std::optional<PointCloud> {
        try {
            return edge_points_unit_cube(obj.voxels,
                                         EdgeExtraction{0.5, 1000, 0x5a5a5a5aULL});
        } catch (const Error&) {
            return std::nullopt;  // empty grid: shape gate cannot pass
        }
    };

    std::vector<bool> taken(ground_truth.size(), false);
    std::vector<DetectionRecord> records;
    records.reserve(predictions.size());

    for (int pi : order) {
        const SceneObject& pred = predictions[pi];
        int best_gt = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < ground_truth.size(); ++g) {
            if (taken[g] || !category_compatible(pred, ground_truth[g])) continue;
            const double d =
                (pred.transform.translation() - ground_truth[g].transform.translation()).norm();
            if (d < best_dist) {
                best_dist = d;
                best_gt = static_cast<int>(g);
            }
        }

        DetectionRecord rec;
        rec.confidence = pred.score;
        if (best_gt >= 0) {
            taken[best_gt] = true;
            const SceneObject& gt = ground_truth[best_gt];
            rec.trans_ok = best_dist < th.trans_max;
            rec.scale_ok = scale_error(pred.transform.scale(), gt.transform.scale()) < th.scale_max;
            rec.rot_ok =
                rotation_geodesic(pred.transform.rotation(), gt.transform.rotation()) < th.rot_max;
            const auto pc = cloud_of(pred);
            const auto gc = cloud_of(gt);
            if (pc && gc) rec.shape_ok = fscore(*pc, *gc, th.fscore_tau) >= th.fscore_min;
        }
        records.push_back(rec);
    }
    return records;
}

double average_precision(const std::vector<DetectionRecord>& records, int num_ground_truth,
                         DetectionCriterion criterion) {
    if (num_ground_truth < 1) fail(ErrorCode::eval, "average_precision: no ground truth");
    if (records.empty()) return 0.0;

    std::vector<int> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return records[a].confidence > records[b].confidence;
    });

    std::vector<double> precision(records.size());
    std::vector<double> recall(records.size());
    int tp = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (passes(records[order[k]], criterion)) ++tp;
        precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
        recall[k] = static_cast<double>(tp) / static_cast<double>(num_ground_truth);
    }

    // All-point interpolation: make the precision envelope monotone
    // non-increasing from the right, then sum over recall steps.
    for (std::size_t k = precision.size() - 1; k-- > 0;) {
        precision[k] = std::max(precision[k], precision[k + 1]);
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t k = 0; k < precision.size(); ++k) {
        ap += (recall[k] - prev_recall) * precision[k];
        prev_recall = recall[k];
    }
    return ap;
}

std::vector<double> correspondence_confidence(const AffinityMatrix& a,
                                              const Correspondence& predicted) {
    for (auto [i, j] : predicted.pairs()) {
        if (i >= a.rows() || j >= a.cols()) {
            fail_invalid("correspondence_confidence: predicted pair out of matrix range");
        }
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(a.rows()) * a.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) {
            const double gamma = predicted.contains(i, j) ? 1.0 : 0.5;
            out.push_back(gamma * a.at(i, j));
        }
    }
    return out;
}

double correspondence_ap(const std::vector<double>& confidences, int n, int m,
                         const Correspondence& gt) {
    if (confidences.size() != static_cast<std::size_t>(n) * m) {
        fail_invalid("correspondence_ap: confidence array does not match n*m");
    }
    if (gt.empty()) fail(ErrorCode::eval, "correspondence_ap: ground truth has no positive pair");
    for (auto [i, j] : gt.pairs()) {
        if (i >= n || j >= m) fail_invalid("correspondence_ap: ground-truth pair out of range");
    }

    std::vector<DetectionRecord> records(confidences.size());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const std::size_t k = static_cast<std::size_t>(i) * m + j;
            records[k].confidence = confidences[k];
            const bool positive = gt.contains(i, j);
            records[k].trans_ok = records[k].scale_ok = records[k].rot_ok = records[k].shape_ok =
                positive;
        }
    }
    return average_precision(records, gt.size());
}

namespace {

ErrorStats stats_of(std::vector<double> errors, double within) {
    ErrorStats s;
    const std::size_t n = errors.size();
    s.mean = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(n);
    std::sort(errors.begin(), errors.end());
    s.median = n % 2 == 1 ? errors[n / 2] : 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
    const auto hits = std::count_if(errors.begin(), errors.end(),
                                    [within](double e) { return e <= within; });
    s.frac_within = static_cast<double>(hits) / static_cast<double>(n);
    return s;
}

}  // namespace

RelativePoseStats relative_pose_stats(const std::vector<PoseHypothesis>& predicted,
                                      const std::vector<RigidPose>& ground_truth,
                                      double trans_within, double rot_within) {
    if (predicted.size() != ground_truth.size()) {
        fail_invalid("relative_pose_stats: prediction and ground-truth counts differ");
    }
    if (predicted.empty()) fail_invalid("relative_pose_stats: empty input");

    std::vector<double> trans_err, rot_err;
    trans_err.reserve(predicted.size());
    rot_err.reserve(predicted.size());
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        trans_err.push_back((predicted[i].translation - ground_truth[i].translation).norm());
        rot_err.push_back(rotation_geodesic(predicted[i].rotation, ground_truth[i].rotation));
    }

    RelativePoseStats out;
    out.translation = stats_of(std::move(trans_err), trans_within);
    out.rotation = stats_of(std::move(rot_err), rot_within);
    out.count = static_cast<int>(predicted.size());
    return out;
}

}  // namespace stitch3d
