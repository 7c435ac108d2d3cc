#include "stitch3d/stitcher.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include "stitch3d/kdtree.hpp"
#include "stitch3d/random.hpp"

namespace stitch3d {

Correspondence::Correspondence(std::vector<std::pair<int, int>> pairs) : pairs_(std::move(pairs)) {
    std::sort(pairs_.begin(), pairs_.end());
    std::set<int> rows, cols;
    for (auto [i, j] : pairs_) {
        if (i < 0 || j < 0) fail_invalid("Correspondence: negative index");
        if (!rows.insert(i).second) {
            fail_invalid("Correspondence: view-1 object " + std::to_string(i) + " matched twice");
        }
        if (!cols.insert(j).second) {
            fail_invalid("Correspondence: view-2 object " + std::to_string(j) + " matched twice");
        }
    }
}

bool Correspondence::contains(int i, int j) const {
    return std::binary_search(pairs_.begin(), pairs_.end(), std::make_pair(i, j));
}

bool Correspondence::uses_row(int i) const {
    return std::any_of(pairs_.begin(), pairs_.end(), [i](auto& p) { return p.first == i; });
}

bool Correspondence::uses_col(int j) const {
    return std::any_of(pairs_.begin(), pairs_.end(), [j](auto& p) { return p.second == j; });
}

void validate_weights(const StitchWeights& w) {
    if (!(w.lambda_s >= 0.0 && w.lambda_u >= 0.0 && w.lambda_p_rot >= 0.0 &&
          w.lambda_p_trans >= 0.0)) {
        fail_invalid("StitchWeights: lambdas must be non-negative");
    }
    if (w.k_samples < 1) fail_invalid("StitchWeights: k_samples must be >= 1");
    if (!(w.affinity_threshold > 0.0 && w.affinity_threshold < 1.0)) {
        fail_invalid("StitchWeights: affinity_threshold must lie in (0, 1)");
    }
}

namespace {

void check_correspondence_shape(const Correspondence& c, int n, int m) {
    for (auto [i, j] : c.pairs()) {
        if (i >= n || j >= m) {
            fail_invalid("Correspondence: pair (" + std::to_string(i) + ", " + std::to_string(j) +
                         ") exceeds view sizes " + std::to_string(n) + "x" + std::to_string(m));
        }
    }
}

// Edge cloud of an object in its camera frame (object transform applied to
// the unit-cube edge points).
PointCloud camera_frame_edge_cloud(const SceneObject& obj, const EdgeExtraction& edge) {
    return apply_transform(obj.transform, edge_points_unit_cube(obj.voxels, edge));
}

}  // namespace

double stitch_distance(const std::vector<SceneObject>& view1, const std::vector<SceneObject>& view2,
                       const RigidPose& pose, const Correspondence& c, const EdgeExtraction& edge) {
    check_correspondence_shape(c, static_cast<int>(view1.size()), static_cast<int>(view2.size()));
    if (c.empty()) return 0.0;
    double sum = 0.0;
    for (auto [i, j] : c.pairs()) {
        const PointCloud a = apply_transform(SimilarityTransform::from_rigid(pose),
                                             camera_frame_edge_cloud(view1[i], edge));
        const PointCloud b = camera_frame_edge_cloud(view2[j], edge);
        sum += chamfer(a, b);
    }
    return sum / static_cast<double>(c.size());
}

std::pair<double, ObjectiveTerms> objective(const std::vector<SceneObject>& view1,
                                            const std::vector<SceneObject>& view2,
                                            const PoseHypothesis& pose, const Correspondence& c,
                                            const AffinityMatrix& a, const StitchWeights& w,
                                            const EdgeExtraction& edge) {
    validate_weights(w);
    const int n = static_cast<int>(view1.size());
    const int m = static_cast<int>(view2.size());
    if (a.rows() != n || a.cols() != m) fail_invalid("objective: affinity shape mismatch");
    check_correspondence_shape(c, n, m);

    ObjectiveTerms terms;
    terms.distance = stitch_distance(view1, view2, pose.pose(), c, edge);
    terms.pose_rot = 1.0 - pose.rotation_prob;
    terms.pose_trans = 1.0 - pose.translation_prob;
    for (auto [i, j] : c.pairs()) terms.similarity += 1.0 - a.at(i, j);
    terms.unmatched = static_cast<double>(std::min(n, m) - c.size());
    return {weighted_total(terms, w), terms};
}

namespace {

// Enumerates every one-to-one matching over `feasible` (DFS skipping or
// taking each pair in order, so the empty matching lands at index 0),
// stopping once `limit` matchings have been collected. Returns false when
// the limit was reached before the enumeration finished.
bool enumerate_matchings(const std::vector<std::pair<int, int>>& feasible, std::size_t limit,
                         std::vector<Correspondence>& out) {
    out.clear();
    std::vector<std::pair<int, int>> current;
    bool complete = true;

    auto rec = [&](auto&& self, std::size_t idx) -> bool {
        if (idx == feasible.size()) {
            if (out.size() >= limit) {
                complete = false;
                return false;
            }
            out.emplace_back(current);
            return true;
        }
        if (!self(self, idx + 1)) return false;  // without this pair
        const auto [i, j] = feasible[idx];
        const bool conflict = std::any_of(current.begin(), current.end(),
                                          [&](auto& p) { return p.first == i || p.second == j; });
        if (!conflict) {
            current.push_back(feasible[idx]);
            const bool ok = self(self, idx + 1);
            current.pop_back();
            if (!ok) return false;
        }
        return true;
    };
    rec(rec, 0);
    return complete;
}

}  // namespace

std::vector<Correspondence> sample_correspondences(const std::vector<std::pair<int, int>>& feasible,
                                                   const AffinityMatrix& a, int k,
                                                   std::uint64_t seed) {
    if (k < 1) fail_invalid("sample_correspondences: k must be >= 1");
    for (auto [i, j] : feasible) {
        if (i < 0 || i >= a.rows() || j < 0 || j >= a.cols()) {
            fail_invalid("sample_correspondences: feasible pair out of matrix range");
        }
    }

    // Small search spaces are enumerated outright, which guarantees the
    // optimum is among the candidates; randomized greedy kicks in only when
    // the matching count exceeds the sample budget.
    std::vector<Correspondence> out;
    if (enumerate_matchings(feasible, static_cast<std::size_t>(k) + 1, out)) return out;

    out.clear();
    out.emplace_back();  // empty correspondence is always candidate 0
    Rng rng(seed);
    std::vector<std::pair<int, int>> current;
    std::vector<double> weights;
    std::vector<std::size_t> available;
    for (int s = 0; s < k; ++s) {
        current.clear();
        for (;;) {
            weights.clear();
            available.clear();
            for (std::size_t p = 0; p < feasible.size(); ++p) {
                const auto [i, j] = feasible[p];
                const bool conflict = std::any_of(current.begin(), current.end(), [&](auto& q) {
                    return q.first == i || q.second == j;
                });
                if (!conflict) {
                    available.push_back(p);
                    weights.push_back(a.at(i, j));
                }
            }
            if (available.empty()) break;
            // A unit-weight stop pseudo-option keeps partial matchings
            // reachable; affinity weights bias picks toward likely pairs.
            weights.push_back(1.0);
            const int pick = rng.weighted_pick(weights);
            if (pick == static_cast<int>(available.size())) break;
            current.push_back(feasible[available[pick]]);
        }
        out.emplace_back(current);
    }
    return out;
}

std::vector<SceneObject> merge(const std::vector<SceneObject>& view1,
                               const std::vector<SceneObject>& view2, const RigidPose& pose,
                               const Correspondence& c, std::uint64_t seed) {
    const int n = static_cast<int>(view1.size());
    const int m = static_cast<int>(view2.size());
    check_correspondence_shape(c, n, m);

    const RigidPose to_view1 = pose.inverse();
    std::vector<int> partner_of_row(n, -1);
    std::vector<bool> col_used(m, false);
    for (auto [i, j] : c.pairs()) {
        partner_of_row[i] = j;
        col_used[j] = true;
    }

    Rng rng(mix_seed(seed, 0x6d657267));
    std::vector<SceneObject> out;
    out.reserve(static_cast<std::size_t>(n + m - c.size()));

    for (int i = 0; i < n; ++i) {
        const int j = partner_of_row[i];
        if (j < 0) {
            out.push_back(view1[i]);
            continue;
        }
        const SceneObject& a = view1[i];
        const SceneObject& b = view2[j];
        const SimilarityTransform b_in_view1 = compose_rigid(to_view1, b.transform);

        SceneObject fused;
        fused.id = a.id;
        const Vec3 t = 0.5 * (a.transform.translation() + b_in_view1.translation());
        const Vec3 s = 0.5 * (a.transform.scale() + b_in_view1.scale());
        // Rotation and shape each come whole from one side: averaging
        // rotations collapses symmetric modes, and averaging voxels of
        // partially observed objects produces ghosts.
        const bool rot_from_a = rng.bernoulli(0.5);
        const bool shape_from_a = rng.bernoulli(0.5);
        fused.transform = SimilarityTransform(
            rot_from_a ? a.transform.rotation() : b_in_view1.rotation(), t, s);
        fused.voxels = shape_from_a ? a.voxels : b.voxels;
        fused.score = std::max(a.score, b.score);
        fused.embedding = shape_from_a ? a.embedding : b.embedding;
        fused.category = a.category ? a.category : b.category;
        out.push_back(std::move(fused));
    }
    for (int j = 0; j < m; ++j) {
        if (col_used[j]) continue;
        SceneObject moved = view2[j];
        moved.transform = compose_rigid(to_view1, view2[j].transform);
        out.push_back(std::move(moved));
    }
    return out;
}

namespace {

// Indexed edge clouds per view object, built on first use: objects never
// named by a feasible pair are never extracted.
class CloudCache {
public:
    CloudCache(const std::vector<SceneObject>& objects, const EdgeExtraction& edge)
        : objects_(objects),
          edge_(edge),
          clouds_(objects.size()),
          flags_(std::make_unique<std::once_flag[]>(objects.size())) {}

    const IndexedCloud& get(int idx) {
        std::call_once(flags_[idx], [&] {
            clouds_[idx] = IndexedCloud(apply_transform(
                objects_[idx].transform, edge_points_unit_cube(objects_[idx].voxels, edge_)));
        });
        return clouds_[idx];
    }

private:
    const std::vector<SceneObject>& objects_;
    EdgeExtraction edge_;
    std::vector<IndexedCloud> clouds_;
    std::unique_ptr<std::once_flag[]> flags_;
};

struct Candidate {
    double total = std::numeric_limits<double>::infinity();
    ObjectiveTerms terms;
    int hypothesis = -1;
    int sample = -1;
    Correspondence correspondence;
};

// Argmin order: objective, then hypothesis rank, then sample rank.
bool better(const Candidate& a, const Candidate& b) {
    if (a.total != b.total) return a.total < b.total;
    if (a.hypothesis != b.hypothesis) return a.hypothesis < b.hypothesis;
    return a.sample < b.sample;
}

}  // namespace

StitchResult solve(const std::vector<SceneObject>& view1, const std::vector<SceneObject>& view2,
                   const AffinityMatrix& a, const CameraPoseDistribution& dist,
                   const SolveOptions& options) {
    validate_weights(options.weights);
    const int n = static_cast<int>(view1.size());
    const int m = static_cast<int>(view2.size());
    if (n == 0 || m == 0) fail_invalid("solve: both views must contain at least one object");
    for (int i = 0; i < n; ++i) validate_scene_object(view1[i], "view1[" + std::to_string(i) + "]");
    for (int j = 0; j < m; ++j) validate_scene_object(view2[j], "view2[" + std::to_string(j) + "]");
    if (a.rows() != n || a.cols() != m) {
        fail_invalid("solve: affinity is " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " but views have " + std::to_string(n) + " and " +
                     std::to_string(m) + " objects");
    }

    if (options.k_rot < 1 || options.k_trans < 1) {
        fail_invalid("solve: k_rot and k_trans must be >= 1");
    }
    // Distributions smaller than the requested search width are searched
    // exhaustively.
    const int k_rot =
        std::min<int>(options.k_rot, static_cast<int>(dist.rotation_bins.centroids.size()));
    const int k_trans =
        std::min<int>(options.k_trans, static_cast<int>(dist.translation_bins.centroids.size()));
    const auto hypotheses = top_k_hypotheses(dist, k_rot, k_trans);
    const auto feasible = feasible_pairs(a, options.weights.affinity_threshold);

    std::vector<int> pair_index(static_cast<std::size_t>(n) * m, -1);
    for (std::size_t p = 0; p < feasible.size(); ++p) {
        pair_index[static_cast<std::size_t>(feasible[p].first) * m + feasible[p].second] =
            static_cast<int>(p);
    }

    CloudCache clouds1(view1, options.edge);
    CloudCache clouds2(view2, options.edge);

    const int num_hyp = static_cast<int>(hypotheses.size());
    std::vector<Candidate> best_per_hyp(num_hyp);
    std::vector<std::string> failure(num_hyp);

    auto eval_hypothesis = [&](int f) {
        const PoseHypothesis& hyp = hypotheses[f];
        const RigidPose pose = hyp.pose();
        const auto candidates =
            sample_correspondences(feasible, a, options.weights.k_samples, mix_seed(options.seed, f));

        // Chamfer per feasible pair is shared by every candidate under this
        // hypothesis; memoize on first use.
        std::vector<double> pair_chamfer(feasible.size(),
                                         std::numeric_limits<double>::quiet_NaN());
        auto chamfer_of = [&](int i, int j) {
            const int p = pair_index[static_cast<std::size_t>(i) * m + j];
            if (std::isnan(pair_chamfer[p])) {
                pair_chamfer[p] = chamfer_posed(clouds1.get(i), clouds2.get(j), pose);
            }
            return pair_chamfer[p];
        };

        Candidate best;
        for (int s = 0; s < static_cast<int>(candidates.size()); ++s) {
            const Correspondence& c = candidates[s];
            try {
                ObjectiveTerms terms;
                double dist_sum = 0.0;
                for (auto [i, j] : c.pairs()) {
                    dist_sum += chamfer_of(i, j);
                    terms.similarity += 1.0 - a.at(i, j);
                }
                terms.distance = c.empty() ? 0.0 : dist_sum / c.size();
                terms.pose_rot = 1.0 - hyp.rotation_prob;
                terms.pose_trans = 1.0 - hyp.translation_prob;
                terms.unmatched = static_cast<double>(std::min(n, m) - c.size());
                Candidate cand;
                cand.total = weighted_total(terms, options.weights);
                cand.terms = terms;
                cand.hypothesis = f;
                cand.sample = s;
                cand.correspondence = c;
                if (better(cand, best)) best = cand;
            } catch (const Error& e) {
                // A degenerate voxel grid poisons only the candidates that
                // reference it.
                if (failure[f].empty()) failure[f] = e.what();
            }
        }
        best_per_hyp[f] = std::move(best);
    };

    const int threads = std::max(1, options.threads);
    if (threads == 1 || num_hyp <= 1) {
        for (int f = 0; f < num_hyp; ++f) eval_hypothesis(f);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        const int workers = std::min(threads, num_hyp);
        for (int t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const int f = next.fetch_add(1);
                    if (f >= num_hyp) return;
                    eval_hypothesis(f);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    Candidate best;
    for (const auto& cand : best_per_hyp) {
        if (cand.hypothesis >= 0 && better(cand, best)) best = cand;
    }
    if (best.hypothesis < 0) {
        std::string detail;
        for (const auto& msg : failure) {
            if (!msg.empty()) {
                detail = msg;
                break;
            }
        }
        fail(ErrorCode::solve, "solve: every candidate evaluation failed" +
                                   (detail.empty() ? std::string() : ": " + detail));
    }

    StitchResult result;
    result.pose = hypotheses[best.hypothesis];
    result.correspondence = best.correspondence;
    result.objective = best.total;
    result.terms = best.terms;
    result.seed = options.seed;
    result.merged = merge(view1, view2, result.pose.pose(), result.correspondence, options.seed);
    return result;
}

}  // namespace stitch3d
