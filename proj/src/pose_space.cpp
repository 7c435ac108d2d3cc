#include "stitch3d/pose_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "stitch3d/random.hpp"

namespace stitch3d {

void validate_bins(const TranslationBinSet& bins) {
    if (bins.centroids.empty()) fail_invalid("TranslationBinSet: at least one centroid required");
    for (std::size_t i = 0; i < bins.centroids.size(); ++i) {
        for (std::size_t j = i + 1; j < bins.centroids.size(); ++j) {
            if (bins.centroids[i] == bins.centroids[j]) {
                fail_invalid("TranslationBinSet: centroids " + std::to_string(i) + " and " +
                             std::to_string(j) + " coincide");
            }
        }
    }
}

void validate_bins(const RotationBinSet& bins) {
    if (bins.centroids.empty()) fail_invalid("RotationBinSet: at least one centroid required");
    // Unit norm is enforced by UnitQuaternion itself.
}

namespace {

void validate_probs(const std::vector<double>& probs, std::size_t bins, const char* what) {
    if (probs.size() != bins) {
        fail_invalid(std::string(what) + ": probability count does not match bin count");
    }
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) fail_invalid(std::string(what) + ": negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        fail_invalid(std::string(what) + ": probabilities sum to " + std::to_string(sum));
    }
}

}  // namespace

void validate_distribution(const CameraPoseDistribution& dist) {
    validate_bins(dist.rotation_bins);
    validate_bins(dist.translation_bins);
    validate_probs(dist.rotation_probs, dist.rotation_bins.centroids.size(), "rotation_probs");
    validate_probs(dist.translation_probs, dist.translation_bins.centroids.size(),
                   "translation_probs");
}

namespace {

// Shared Lloyd loop over an abstract geometry. Point: sample type.
// distance(): the clustering cost; mean over a cluster's members defines
// the centroid update.
template <typename Point, typename DistanceFn, typename MeanFn>
std::vector<Point> lloyd(const std::vector<Point>& samples, int k, const ClusterOptions& options,
                         ClusterTrace* trace, DistanceFn&& distance, MeanFn&& mean) {
    const int n = static_cast<int>(samples.size());
    if (k < 1) fail_invalid("kmeans: k must be >= 1");
    if (n < k) {
        fail(ErrorCode::invalid, "kmeans: k = " + std::to_string(k) + " exceeds sample count " +
                                     std::to_string(n));
    }

    Rng rng(options.seed);

    // k-means++ seeding.
    std::vector<Point> centroids;
    centroids.reserve(k);
    centroids.push_back(samples[rng.below(n)]);
    std::vector<double> d2(n);
    for (int c = 1; c < k; ++c) {
        for (int i = 0; i < n; ++i) {
            double best = distance(samples[i], centroids[0]);
            for (int j = 1; j < c; ++j) best = std::min(best, distance(samples[i], centroids[j]));
            d2[i] = best * best;
        }
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        if (total <= 0.0) {
            // All samples already sit on a centroid; any remaining pick works.
            centroids.push_back(samples[rng.below(n)]);
            continue;
        }
        centroids.push_back(samples[rng.weighted_pick(d2)]);
    }

    std::vector<int> assignment(n, -1);
    const int threads = std::max(1, options.threads);

    auto assign_range = [&](int begin, int end, std::vector<int>& out) {
        for (int i = begin; i < end; ++i) {
            int best = 0;
            double best_d = distance(samples[i], centroids[0]);
            for (int j = 1; j < k; ++j) {
                const double d = distance(samples[i], centroids[j]);
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            out[i] = best;
        }
    };

    if (trace) {
        trace->cost_history.clear();
        trace->iterations = 0;
    }

    for (int iter = 0; iter < options.max_iter; ++iter) {
        std::vector<int> next(n);
        if (threads == 1 || n < 256) {
            assign_range(0, n, next);
        } else {
            std::vector<std::thread> pool;
            const int chunk = (n + threads - 1) / threads;
            for (int t = 0; t < threads; ++t) {
                const int begin = t * chunk;
                const int end = std::min(n, begin + chunk);
                if (begin >= end) break;
                pool.emplace_back(assign_range, begin, end, std::ref(next));
            }
            for (auto& th : pool) th.join();
        }

        // Serial cost and update keep results identical for any thread count.
        if (trace) {
            double cost = 0.0;
            for (int i = 0; i < n; ++i) {
                const double d = distance(samples[i], centroids[next[i]]);
                cost += d * d;
            }
            trace->cost_history.push_back(cost);
            trace->iterations = iter + 1;
        }

        const bool converged = next == assignment;
        assignment = std::move(next);
        if (converged) break;

        for (int j = 0; j < k; ++j) {
            std::vector<int> members;
            for (int i = 0; i < n; ++i) {
                if (assignment[i] == j) members.push_back(i);
            }
            if (!members.empty()) {
                auto updated = mean(samples, members, centroids[j]);
                if (updated) {
                    centroids[j] = *updated;
                    continue;
                }
            }
            // Empty cluster (or a degenerate mean): re-seed from the sample
            // farthest from its assigned centroid.
            int far_idx = 0;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                const double d = distance(samples[i], centroids[assignment[i]]);
                if (d > far_d) {
                    far_d = d;
                    far_idx = i;
                }
            }
            centroids[j] = samples[far_idx];
        }
    }
    return centroids;
}

}  // namespace

TranslationBinSet kmeans_translations(const std::vector<Vec3>& samples, int k,
                                      const ClusterOptions& options, ClusterTrace* trace) {
    auto centroids = lloyd<Vec3>(
        samples, k, options, trace,
        [](const Vec3& a, const Vec3& b) { return (a - b).norm(); },
        [](const std::vector<Vec3>& pts, const std::vector<int>& members,
           const Vec3&) -> std::optional<Vec3> {
            Vec3 sum = Vec3::Zero();
            for (int i : members) sum += pts[i];
            return Vec3(sum / static_cast<double>(members.size()));
        });
    TranslationBinSet bins{std::move(centroids)};
    return bins;
}

RotationBinSet spherical_kmeans_rotations(const std::vector<UnitQuaternion>& samples, int k,
                                          const ClusterOptions& options, ClusterTrace* trace) {
    auto centroids = lloyd<UnitQuaternion>(
        samples, k, options, trace,
        [](const UnitQuaternion& a, const UnitQuaternion& b) {
            return 1.0 - std::abs(a.dot(b));  // double-cover aware
        },
        [](const std::vector<UnitQuaternion>& qs, const std::vector<int>& members,
           const UnitQuaternion& current) -> std::optional<UnitQuaternion> {
            // Mean of members sign-aligned to the current centroid.
            Eigen::Vector4d sum = Eigen::Vector4d::Zero();
            for (int i : members) {
                const UnitQuaternion& q = qs[i];
                const double sign = q.dot(current) < 0.0 ? -1.0 : 1.0;
                sum += sign * Eigen::Vector4d(q.w(), q.x(), q.y(), q.z());
            }
            if (sum.norm() < 1e-9) return std::nullopt;  // members cancel out
            return UnitQuaternion(sum[0], sum[1], sum[2], sum[3]);
        });
    RotationBinSet bins{std::move(centroids)};
    return bins;
}

std::vector<PoseHypothesis> top_k_hypotheses(const CameraPoseDistribution& dist, int k_rot,
                                             int k_trans) {
    validate_distribution(dist);
    const int n_rot = static_cast<int>(dist.rotation_bins.centroids.size());
    const int n_trans = static_cast<int>(dist.translation_bins.centroids.size());
    if (k_rot < 1 || k_rot > n_rot) fail_invalid("top_k_hypotheses: k_rot out of range");
    if (k_trans < 1 || k_trans > n_trans) fail_invalid("top_k_hypotheses: k_trans out of range");

    auto top_bins = [](const std::vector<double>& probs, int k) {
        std::vector<int> order(probs.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return probs[a] > probs[b];  // stable keeps index order on ties
        });
        order.resize(k);
        return order;
    };

    const auto rot_idx = top_bins(dist.rotation_probs, k_rot);
    const auto trans_idx = top_bins(dist.translation_probs, k_trans);

    std::vector<PoseHypothesis> hyps;
    hyps.reserve(static_cast<std::size_t>(k_rot) * k_trans);
    for (int r : rot_idx) {
        for (int t : trans_idx) {
            PoseHypothesis h;
            h.rotation = dist.rotation_bins.centroids[r];
            h.translation = dist.translation_bins.centroids[t];
            h.rotation_prob = dist.rotation_probs[r];
            h.translation_prob = dist.translation_probs[t];
            h.rotation_bin = r;
            h.translation_bin = t;
            hyps.push_back(h);
        }
    }
    std::stable_sort(hyps.begin(), hyps.end(), [](const PoseHypothesis& a, const PoseHypothesis& b) {
        const double pa = a.rotation_prob * a.translation_prob;
        const double pb = b.rotation_prob * b.translation_prob;
        if (pa != pb) return pa > pb;
        if (a.rotation_bin != b.rotation_bin) return a.rotation_bin < b.rotation_bin;
        return a.translation_bin < b.translation_bin;
    });
    return hyps;
}

int nearest_rotation_bin(const RotationBinSet& bins, const UnitQuaternion& q) {
    validate_bins(bins);
    int best = 0;
    double best_d = 1.0 - std::abs(bins.centroids[0].dot(q));
    for (std::size_t i = 1; i < bins.centroids.size(); ++i) {
        const double d = 1.0 - std::abs(bins.centroids[i].dot(q));
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

int nearest_translation_bin(const TranslationBinSet& bins, const Vec3& t) {
    validate_bins(bins);
    int best = 0;
    double best_d = (bins.centroids[0] - t).squaredNorm();
    for (std::size_t i = 1; i < bins.centroids.size(); ++i) {
        const double d = (bins.centroids[i] - t).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace stitch3d
