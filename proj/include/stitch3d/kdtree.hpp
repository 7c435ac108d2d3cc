#pragma once

#include <vector>

#include "stitch3d/geometry.hpp"

namespace stitch3d {

// Exact nearest-neighbor index over a 3D point set. Median-split kd-tree
// with small leaves; queries return the squared distance to the nearest
// point. Build is O(n log n), queries are O(log n) on distributed clouds.
class KdTree3 {
public:
    KdTree3() = default;
    explicit KdTree3(const PointCloud& cloud);

    bool empty() const { return points_.empty(); }
    std::size_t size() const { return points_.size(); }

    // Squared distance from q to the nearest indexed point. Requires a
    // non-empty index.
    double nearest_sq(const Vec3& q) const;

    // Same, carrying a hint between calls: seeded with the previous
    // answer's point index, the search starts from a tight true bound.
    // Exact either way; a big win when consecutive queries are close.
    double nearest_sq(const Vec3& q, int& hint) const;

private:
    struct Node {
        Vec3 lo{0, 0, 0};     // bounding box of the node's points
        Vec3 hi{0, 0, 0};
        int axis = -1;        // -1 marks a leaf
        int left = -1;        // child node index
        int right = -1;
        int begin = 0;        // leaf point range
        int end = 0;
    };

    int build(int begin, int end);
    void query(int node, const Vec3& q, double& best, int& best_index) const;

    std::vector<Vec3> points_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

// Point cloud bundled with its nearest-neighbor index.
struct IndexedCloud {
    PointCloud cloud;
    KdTree3 tree;

    IndexedCloud() = default;
    explicit IndexedCloud(PointCloud c) : cloud(std::move(c)), tree(cloud) {}
};

// chamfer(pose(X), Y) without re-indexing: the forward direction queries
// Y's tree with posed X points, the reverse direction queries X's tree with
// inverse-posed Y points (rigid poses preserve distances).
double chamfer_posed(const IndexedCloud& x, const IndexedCloud& y, const RigidPose& pose);

}  // namespace stitch3d
