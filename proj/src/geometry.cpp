#include "stitch3d/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "stitch3d/kdtree.hpp"
#include "stitch3d/random.hpp"

namespace stitch3d {

namespace {

// Canonical sign for the double cover: w > 0, or w == 0 and the first
// nonzero of (x, y, z) positive.
void canonicalize(double& w, double& x, double& y, double& z) {
    bool flip = false;
    if (w < 0.0) {
        flip = true;
    } else if (w == 0.0) {
        if (x < 0.0) {
            flip = true;
        } else if (x == 0.0) {
            if (y < 0.0) {
                flip = true;
            } else if (y == 0.0 && z < 0.0) {
                flip = true;
            }
        }
    }
    if (flip) {
        w = -w;
        x = -x;
        y = -y;
        z = -z;
    }
}

}  // namespace

UnitQuaternion::UnitQuaternion(double w, double x, double y, double z) {
    const double sumsq = w * w + x * x + y * y + z * z;
    if (!(sumsq > 1e-24)) fail_invalid("UnitQuaternion: near-zero norm");
    // Skip the division when already unit so construction is idempotent and
    // values survive serialization bit for bit.
    if (std::abs(sumsq - 1.0) > 1e-12) {
        const double norm = std::sqrt(sumsq);
        w /= norm;
        x /= norm;
        y /= norm;
        z /= norm;
    }
    w_ = w;
    x_ = x;
    y_ = y;
    z_ = z;
    canonicalize(w_, x_, y_, z_);
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle) {
    const double n = axis.norm();
    if (!(n > 1e-12)) fail_invalid("UnitQuaternion::from_axis_angle: zero axis");
    const double half = 0.5 * angle;
    const double s = std::sin(half) / n;
    return UnitQuaternion(std::cos(half), axis.x() * s, axis.y() * s, axis.z() * s);
}

UnitQuaternion UnitQuaternion::from_matrix(const Eigen::Matrix3d& m) {
    Eigen::Quaterniond q(m);
    return UnitQuaternion(q.w(), q.x(), q.y(), q.z());
}

Eigen::Matrix3d UnitQuaternion::matrix() const {
    return Eigen::Quaterniond(w_, x_, y_, z_).toRotationMatrix();
}

Vec3 UnitQuaternion::rotate(const Vec3& p) const {
    // q p q* expanded via the cross-product form.
    const Vec3 v(x_, y_, z_);
    const Vec3 t = 2.0 * v.cross(p);
    return p + w_ * t + v.cross(t);
}

UnitQuaternion UnitQuaternion::operator*(const UnitQuaternion& r) const {
    return UnitQuaternion(w_ * r.w_ - x_ * r.x_ - y_ * r.y_ - z_ * r.z_,
                          w_ * r.x_ + x_ * r.w_ + y_ * r.z_ - z_ * r.y_,
                          w_ * r.y_ - x_ * r.z_ + y_ * r.w_ + z_ * r.x_,
                          w_ * r.z_ + x_ * r.y_ - y_ * r.x_ + z_ * r.w_);
}

double rotation_geodesic(const UnitQuaternion& r1, const UnitQuaternion& r2) {
    // Angle of r1^-1 * r2 as 2 atan2(||vec||, |w|): same value as
    // 2 acos(|<r1, r2>|) but stable near 0 and pi.
    const double w = r1.w() * r2.w() + r1.x() * r2.x() + r1.y() * r2.y() + r1.z() * r2.z();
    const double x = r1.w() * r2.x() - r1.x() * r2.w() - r1.y() * r2.z() + r1.z() * r2.y();
    const double y = r1.w() * r2.y() + r1.x() * r2.z() - r1.y() * r2.w() - r1.z() * r2.x();
    const double z = r1.w() * r2.z() - r1.x() * r2.y() + r1.y() * r2.x() - r1.z() * r2.w();
    return 2.0 * std::atan2(std::sqrt(x * x + y * y + z * z), std::abs(w));
}

SimilarityTransform::SimilarityTransform(const UnitQuaternion& rotation, const Vec3& translation,
                                         const Vec3& scale)
    : rotation_(rotation), translation_(translation), scale_(scale) {
    for (int i = 0; i < 3; ++i) {
        if (!(scale_[i] > 0.0)) fail_invalid("SimilarityTransform: scale components must be positive");
    }
}

std::optional<SimilarityTransform> SimilarityTransform::inverse() const {
    // Inverse linear part is diag(1/s) R^T; factor it back into the
    // rotation * diagonal form when possible.
    const Eigen::Matrix3d inv_linear =
        scale_.cwiseInverse().asDiagonal() * rotation_.matrix().transpose();
    auto factors = factor_rotation_scale(inv_linear);
    if (!factors) return std::nullopt;
    const Vec3 inv_t = inv_linear * (-translation_);
    return SimilarityTransform(factors->first, inv_t, factors->second);
}

PointCloud apply_transform(const SimilarityTransform& t, const PointCloud& cloud) {
    PointCloud out;
    out.points.reserve(cloud.points.size());
    for (const Vec3& p : cloud.points) out.points.push_back(t.apply(p));
    return out;
}

PointCloud ComposedTransform::apply(const PointCloud& cloud) const {
    PointCloud out;
    out.points.reserve(cloud.points.size());
    for (const Vec3& p : cloud.points) out.points.push_back(apply(p));
    return out;
}

std::optional<SimilarityTransform> ComposedTransform::factored() const {
    const Eigen::Matrix3d m = outer_.linear() * inner_.linear();
    auto factors = factor_rotation_scale(m);
    if (!factors) return std::nullopt;
    const Vec3 t = outer_.apply(inner_.translation());
    return SimilarityTransform(factors->first, t, factors->second);
}

ComposedTransform compose(const SimilarityTransform& outer, const SimilarityTransform& inner) {
    return ComposedTransform(outer, inner);
}

SimilarityTransform compose_rigid(const RigidPose& outer, const SimilarityTransform& inner) {
    return SimilarityTransform(outer.rotation * inner.rotation(), outer.apply(inner.translation()),
                               inner.scale());
}

std::optional<std::pair<UnitQuaternion, Vec3>> factor_rotation_scale(const Eigen::Matrix3d& m) {
    // M = R diag(s) requires M^T M = diag(s^2).
    const Eigen::Matrix3d gram = m.transpose() * m;
    const double scale_ref = std::max(gram.diagonal().maxCoeff(), 1e-30);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (i != j && std::abs(gram(i, j)) > 1e-9 * scale_ref) return std::nullopt;
        }
        if (!(gram(i, i) > 0.0)) return std::nullopt;
    }
    const Vec3 s = gram.diagonal().cwiseSqrt();
    const Eigen::Matrix3d r = m * s.cwiseInverse().asDiagonal();
    if (r.determinant() < 0.0) return std::nullopt;
    return std::make_pair(UnitQuaternion::from_matrix(r), s);
}

VoxelGrid::VoxelGrid(int resolution) : resolution_(resolution) {
    if (resolution < 1) fail_invalid("VoxelGrid: resolution must be positive");
    occupancy_.assign(static_cast<std::size_t>(resolution) * resolution * resolution, 0.0);
}

VoxelGrid::VoxelGrid(int resolution, std::vector<double> occupancy)
    : resolution_(resolution), occupancy_(std::move(occupancy)) {
    if (resolution < 1) fail_invalid("VoxelGrid: resolution must be positive");
    const std::size_t expected = static_cast<std::size_t>(resolution) * resolution * resolution;
    if (occupancy_.size() != expected) {
        fail_invalid("VoxelGrid: occupancy length " + std::to_string(occupancy_.size()) +
                     " does not match resolution^3 = " + std::to_string(expected));
    }
    for (double v : occupancy_) {
        if (!(v >= 0.0 && v <= 1.0)) fail_invalid("VoxelGrid: occupancy values must lie in [0, 1]");
    }
}

void VoxelGrid::set(int x, int y, int z, double v) {
    if (!(v >= 0.0 && v <= 1.0)) fail_invalid("VoxelGrid::set: value must lie in [0, 1]");
    occupancy_[index(resolution_, x, y, z)] = v;
}

PointCloud voxels_to_edge_points(const VoxelGrid& grid, double threshold, double cell_size,
                                 int max_points, std::uint64_t seed) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        fail_invalid("voxels_to_edge_points: threshold must lie in (0, 1)");
    }
    if (max_points < 1) fail_invalid("voxels_to_edge_points: max_points must be >= 1");

    const int r = grid.resolution();
    const auto occupied = [&](int x, int y, int z) { return grid.at(x, y, z) >= threshold; };

    std::vector<Eigen::Vector3i> cells;
    for (int x = 0; x < r; ++x) {
        for (int y = 0; y < r; ++y) {
            for (int z = 0; z < r; ++z) {
                if (!occupied(x, y, z)) continue;
                const bool border = x == 0 || x == r - 1 || y == 0 || y == r - 1 || z == 0 || z == r - 1;
                const bool exposed = border || !occupied(x - 1, y, z) || !occupied(x + 1, y, z) ||
                                     !occupied(x, y - 1, z) || !occupied(x, y + 1, z) ||
                                     !occupied(x, y, z - 1) || !occupied(x, y, z + 1);
                if (exposed) cells.emplace_back(x, y, z);
            }
        }
    }
    if (cells.empty()) fail_invalid("voxels_to_edge_points: no cell reaches the threshold");

    if (static_cast<int>(cells.size()) > max_points) {
        // Partial Fisher-Yates, then restore scan order so the output does
        // not depend on the shuffle trajectory beyond the chosen set.
        Rng rng(seed);
        std::vector<std::uint32_t> idx(cells.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
        for (int i = 0; i < max_points; ++i) {
            const std::size_t j = i + rng.below(idx.size() - i);
            std::swap(idx[i], idx[j]);
        }
        idx.resize(max_points);
        std::sort(idx.begin(), idx.end());
        std::vector<Eigen::Vector3i> chosen;
        chosen.reserve(max_points);
        for (std::uint32_t i : idx) chosen.push_back(cells[i]);
        cells = std::move(chosen);
    }

    const double half = 0.5 * r;
    PointCloud out;
    out.points.reserve(cells.size());
    for (const auto& c : cells) {
        out.points.emplace_back(cell_size * (c.x() + 0.5 - half), cell_size * (c.y() + 0.5 - half),
                                cell_size * (c.z() + 0.5 - half));
    }
    return out;
}

PointCloud edge_points_unit_cube(const VoxelGrid& grid, const EdgeExtraction& params) {
    return voxels_to_edge_points(grid, params.threshold, 1.0 / grid.resolution(), params.max_points,
                                 params.seed);
}

double chamfer(const PointCloud& x, const PointCloud& y) {
    if (x.empty() || y.empty()) fail_invalid("chamfer: point clouds must be non-empty");
    const KdTree3 tx(x);
    const KdTree3 ty(y);
    int hint = -1;
    double sum_x = 0.0;
    for (const Vec3& p : x.points) sum_x += ty.nearest_sq(p, hint);
    hint = -1;
    double sum_y = 0.0;
    for (const Vec3& p : y.points) sum_y += tx.nearest_sq(p, hint);
    return sum_x / static_cast<double>(x.size()) + sum_y / static_cast<double>(y.size());
}

double scale_error(const Vec3& s, const Vec3& s_hat) {
    for (int i = 0; i < 3; ++i) {
        if (!(s[i] > 0.0 && s_hat[i] > 0.0)) fail_invalid("scale_error: scales must be positive");
    }
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) sum += std::abs(std::log2(s[i]) - std::log2(s_hat[i]));
    return sum / 3.0;
}

double fscore(const PointCloud& x, const PointCloud& y, double tau) {
    if (x.empty() || y.empty()) fail_invalid("fscore: point clouds must be non-empty");
    if (!(tau > 0.0)) fail_invalid("fscore: tau must be positive");
    const double tau_sq = tau * tau;
    const KdTree3 tx(x);
    const KdTree3 ty(y);
    int hint = -1;
    std::size_t hits_x = 0;
    for (const Vec3& p : x.points) {
        if (ty.nearest_sq(p, hint) <= tau_sq) ++hits_x;
    }
    hint = -1;
    std::size_t hits_y = 0;
    for (const Vec3& p : y.points) {
        if (tx.nearest_sq(p, hint) <= tau_sq) ++hits_y;
    }
    const double precision = static_cast<double>(hits_x) / static_cast<double>(x.size());
    const double recall = static_cast<double>(hits_y) / static_cast<double>(y.size());
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

void validate_scene_object(const SceneObject& obj, const std::string& where) {
    if (!(obj.score >= 0.0 && obj.score <= 1.0)) {
        fail_invalid(where + ".score: must lie in [0, 1]");
    }
    if (obj.embedding) {
        const double norm = obj.embedding->norm();
        if (std::abs(norm - 1.0) > 1e-6) {
            fail_invalid(where + ".embedding: norm " + std::to_string(norm) + " is not unit");
        }
    }
}

}  // namespace stitch3d
