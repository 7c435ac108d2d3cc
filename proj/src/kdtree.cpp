#include "stitch3d/kdtree.hpp"

#include <algorithm>

namespace stitch3d {

namespace {

constexpr int kLeafSize = 12;

double aabb_dist_sq(const Vec3& q, const Vec3& lo, const Vec3& hi) {
    double d = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double excess = std::max({lo[a] - q[a], q[a] - hi[a], 0.0});
        d += excess * excess;
    }
    return d;
}

}  // namespace

KdTree3::KdTree3(const PointCloud& cloud) : points_(cloud.points) {
    if (points_.empty()) return;
    nodes_.reserve(2 * points_.size() / kLeafSize + 4);
    root_ = build(0, static_cast<int>(points_.size()));
}

int KdTree3::build(int begin, int end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    Vec3 lo = points_[begin];
    Vec3 hi = points_[begin];
    for (int i = begin + 1; i < end; ++i) {
        lo = lo.cwiseMin(points_[i]);
        hi = hi.cwiseMax(points_[i]);
    }
    nodes_[id].lo = lo;
    nodes_[id].hi = hi;

    if (end - begin <= kLeafSize) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }

    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(points_.begin() + begin, points_.begin() + mid, points_.begin() + end,
                     [axis](const Vec3& a, const Vec3& b) { return a[axis] < b[axis]; });

    nodes_[id].axis = axis;
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

double KdTree3::nearest_sq(const Vec3& q) const {
    int hint = -1;
    return nearest_sq(q, hint);
}

double KdTree3::nearest_sq(const Vec3& q, int& hint) const {
    if (root_ < 0) fail_invalid("KdTree3::nearest_sq: empty index");
    double best = std::numeric_limits<double>::infinity();
    int best_index = -1;
    if (hint >= 0 && hint < static_cast<int>(points_.size())) {
        best = (points_[hint] - q).squaredNorm();
        best_index = hint;
    }
    if (aabb_dist_sq(q, nodes_[root_].lo, nodes_[root_].hi) < best) {
        query(root_, q, best, best_index);
    }
    hint = best_index;
    return best;
}

// Branch-and-bound on node bounding boxes. Box distance (rather than
// split-plane distance) keeps pruning effective for queries far from the
// cloud, where every splitting plane would look crossable.
void KdTree3::query(int node, const Vec3& q, double& best, int& best_index) const {
    const Node& n = nodes_[node];
    if (n.axis < 0) {
        for (int i = n.begin; i < n.end; ++i) {
            const double d = (points_[i] - q).squaredNorm();
            if (d < best) {
                best = d;
                best_index = i;
            }
        }
        return;
    }
    const double dl = aabb_dist_sq(q, nodes_[n.left].lo, nodes_[n.left].hi);
    const double dr = aabb_dist_sq(q, nodes_[n.right].lo, nodes_[n.right].hi);
    const int near = dl <= dr ? n.left : n.right;
    const int far = dl <= dr ? n.right : n.left;
    const double d_near = std::min(dl, dr);
    const double d_far = std::max(dl, dr);
    if (d_near < best) query(near, q, best, best_index);
    if (d_far < best) query(far, q, best, best_index);
}

double chamfer_posed(const IndexedCloud& x, const IndexedCloud& y, const RigidPose& pose) {
    if (x.cloud.empty() || y.cloud.empty()) fail_invalid("chamfer_posed: empty cloud");
    const Eigen::Matrix3d rot = pose.rotation.matrix();
    // Edge clouds come in grid-scan order, so consecutive queries are close
    // and the carried hint starts each search with a tight bound.
    int hint = -1;
    double sum_x = 0.0;
    for (const Vec3& p : x.cloud.points) {
        sum_x += y.tree.nearest_sq(rot * p + pose.translation, hint);
    }
    const RigidPose inv = pose.inverse();
    const Eigen::Matrix3d inv_rot = inv.rotation.matrix();
    hint = -1;
    double sum_y = 0.0;
    for (const Vec3& p : y.cloud.points) {
        sum_y += x.tree.nearest_sq(inv_rot * p + inv.translation, hint);
    }
    return sum_x / static_cast<double>(x.cloud.size()) + sum_y / static_cast<double>(y.cloud.size());
}

}  // namespace stitch3d
