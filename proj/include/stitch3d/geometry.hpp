#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stitch3d/error.hpp"

namespace stitch3d {

using Vec3 = Eigen::Vector3d;

// Unit quaternion with a canonical sign: w >= 0, and when w == 0 the first
// nonzero of (x, y, z) is positive. The double cover of SO(3) therefore maps
// to a unique representative and equality tests are meaningful.
class UnitQuaternion {
public:
    UnitQuaternion() : w_(1), x_(0), y_(0), z_(0) {}

    // Normalizes and canonicalizes; rejects near-zero input.
    UnitQuaternion(double w, double x, double y, double z);

    static UnitQuaternion from_axis_angle(const Vec3& axis, double angle);
    static UnitQuaternion from_matrix(const Eigen::Matrix3d& m);

    double w() const { return w_; }
    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }

    Eigen::Matrix3d matrix() const;
    Vec3 rotate(const Vec3& p) const;

    UnitQuaternion conjugate() const { return UnitQuaternion(w_, -x_, -y_, -z_); }

    // Hamilton product, re-canonicalized.
    UnitQuaternion operator*(const UnitQuaternion& rhs) const;

    double dot(const UnitQuaternion& rhs) const {
        return w_ * rhs.w_ + x_ * rhs.x_ + y_ * rhs.y_ + z_ * rhs.z_;
    }

    bool operator==(const UnitQuaternion& rhs) const {
        return w_ == rhs.w_ && x_ == rhs.x_ && y_ == rhs.y_ && z_ == rhs.z_;
    }

private:
    double w_, x_, y_, z_;
};

// Angle of the relative rotation r1^-1 * r2, in [0, pi]. Agrees with
// 2^{-1/2} * ||log(R1^T R2)||_F on the corresponding rotation matrices.
double rotation_geodesic(const UnitQuaternion& r1, const UnitQuaternion& r2);

// Rigid motion p -> R p + t. Closed under composition and inversion.
struct RigidPose {
    UnitQuaternion rotation;
    Vec3 translation{0.0, 0.0, 0.0};

    Vec3 apply(const Vec3& p) const { return rotation.rotate(p) + translation; }

    RigidPose inverse() const {
        UnitQuaternion r = rotation.conjugate();
        return RigidPose{r, -r.rotate(translation)};
    }

    // this ∘ rhs: applies rhs first.
    RigidPose operator*(const RigidPose& rhs) const {
        return RigidPose{rotation * rhs.rotation, apply(rhs.translation)};
    }
};

struct PointCloud {
    std::vector<Vec3> points;

    bool empty() const { return points.empty(); }
    std::size_t size() const { return points.size(); }
};

// Anisotropic similarity p -> R (s ⊙ p) + t with s > 0 componentwise.
// Scale is applied before rotation, so two of these compose into another
// one only in special cases; see compose() below.
class SimilarityTransform {
public:
    SimilarityTransform() : scale_(1.0, 1.0, 1.0) {}
    SimilarityTransform(const UnitQuaternion& rotation, const Vec3& translation, const Vec3& scale);

    static SimilarityTransform from_rigid(const RigidPose& pose) {
        return SimilarityTransform(pose.rotation, pose.translation, Vec3(1.0, 1.0, 1.0));
    }

    const UnitQuaternion& rotation() const { return rotation_; }
    const Vec3& translation() const { return translation_; }
    const Vec3& scale() const { return scale_; }

    Vec3 apply(const Vec3& p) const {
        return rotation_.rotate(scale_.cwiseProduct(p)) + translation_;
    }

    // Linear part R * diag(s).
    Eigen::Matrix3d linear() const { return rotation_.matrix() * scale_.asDiagonal(); }

    // Inverse in the same scale-then-rotate form; empty when the inverse's
    // linear part does not factor as rotation * diagonal (anisotropic scale
    // under a rotation that is not axis-aligned).
    std::optional<SimilarityTransform> inverse() const;

private:
    UnitQuaternion rotation_;
    Vec3 translation_{0.0, 0.0, 0.0};
    Vec3 scale_;
};

PointCloud apply_transform(const SimilarityTransform& t, const PointCloud& cloud);

// Ordered pair of similarity transforms acting by function composition:
// apply(p) = outer(inner(p)). factored() recovers a single
// SimilarityTransform when the combined linear part admits the canonical
// rotation * diagonal factorization, and is empty otherwise.
class ComposedTransform {
public:
    ComposedTransform(SimilarityTransform outer, SimilarityTransform inner)
        : outer_(std::move(outer)), inner_(std::move(inner)) {}

    Vec3 apply(const Vec3& p) const { return outer_.apply(inner_.apply(p)); }
    PointCloud apply(const PointCloud& cloud) const;

    const SimilarityTransform& outer() const { return outer_; }
    const SimilarityTransform& inner() const { return inner_; }

    std::optional<SimilarityTransform> factored() const;

private:
    SimilarityTransform outer_;
    SimilarityTransform inner_;
};

ComposedTransform compose(const SimilarityTransform& outer, const SimilarityTransform& inner);

// Rigid ∘ similarity is always representable: the outer scale is isotropic.
SimilarityTransform compose_rigid(const RigidPose& outer, const SimilarityTransform& inner);

// Attempts M = R * diag(s) with R in SO(3) and s > 0.
std::optional<std::pair<UnitQuaternion, Vec3>> factor_rotation_scale(const Eigen::Matrix3d& m);

// Cubic occupancy grid, values in [0, 1], linear layout x*R^2 + y*R + z.
class VoxelGrid {
public:
    explicit VoxelGrid(int resolution);
    VoxelGrid(int resolution, std::vector<double> occupancy);

    int resolution() const { return resolution_; }
    const std::vector<double>& occupancy() const { return occupancy_; }

    static std::size_t index(int resolution, int x, int y, int z) {
        return (static_cast<std::size_t>(x) * resolution + y) * resolution + z;
    }

    double at(int x, int y, int z) const { return occupancy_[index(resolution_, x, y, z)]; }
    void set(int x, int y, int z, double v);

private:
    int resolution_;
    std::vector<double> occupancy_;
};

struct EdgeExtraction {
    double threshold = 0.5;
    int max_points = 1000;
    std::uint64_t seed = 0;
};

// Centers of boundary cells: occupied cells (occupancy >= threshold) with a
// 6-neighbor below threshold or lying on the grid border. Coordinates are
// cell_size * (index + 0.5 - R/2) per axis, so the grid is centered at the
// origin. Deterministically subsamples to max_points with the seeded
// generator. Throws when no cell reaches the threshold.
PointCloud voxels_to_edge_points(const VoxelGrid& grid, double threshold, double cell_size,
                                 int max_points, std::uint64_t seed);

// Same, with cell_size = 1/resolution: the grid spans the unit cube, the
// frame in which F-score@tau is measured. Object transforms carry the world
// scale.
PointCloud edge_points_unit_cube(const VoxelGrid& grid, const EdgeExtraction& params = {});

// Symmetric mean-of-squared-nearest-neighbor distance between two clouds.
double chamfer(const PointCloud& x, const PointCloud& y);

// Mean absolute log2 difference of the scale factors.
double scale_error(const Vec3& s, const Vec3& s_hat);

// Harmonic mean of point-proximity precision and recall at distance tau.
double fscore(const PointCloud& x, const PointCloud& y, double tau);

// One detected object: shape, placement, confidence and an optional
// matching embedding (unit norm when present).
struct SceneObject {
    std::string id;
    VoxelGrid voxels{1};
    SimilarityTransform transform;
    double score = 1.0;
    std::optional<Eigen::VectorXd> embedding;
    std::optional<std::string> category;
};

// Validates score in [0, 1] and unit embedding; `where` prefixes messages.
void validate_scene_object(const SceneObject& obj, const std::string& where);

}  // namespace stitch3d
