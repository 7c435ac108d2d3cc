#include "stitch3d/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "stitch3d/random.hpp"

namespace stitch3d {

void validate_noise(const NoiseModel& noise) {
    if (!(noise.trans_sigma >= 0.0 && noise.rot_sigma >= 0.0 && noise.scale_sigma >= 0.0 &&
          noise.embedding_noise >= 0.0)) {
        fail_invalid("NoiseModel: sigmas must be non-negative");
    }
    if (!(noise.pose_top1_accuracy >= 0.0 && noise.pose_top1_accuracy <= 1.0)) {
        fail_invalid("NoiseModel: pose_top1_accuracy must lie in [0, 1]");
    }
    if (!(noise.duplicate_shape_prob >= 0.0 && noise.duplicate_shape_prob <= 1.0)) {
        fail_invalid("NoiseModel: duplicate_shape_prob must lie in [0, 1]");
    }
}

VoxelGrid make_box_grid(int resolution) {
    VoxelGrid grid(resolution);
    const int lo = resolution / 8;
    const int hi = resolution - lo;
    for (int x = lo; x < hi; ++x) {
        for (int y = lo; y < hi; ++y) {
            for (int z = 0; z < hi; ++z) grid.set(x, y, z, 1.0);
        }
    }
    return grid;
}

VoxelGrid make_lshape_grid(int resolution) {
    VoxelGrid grid(resolution);
    const int lo = resolution / 8;
    const int hi = resolution - lo;
    const int mid = resolution / 2;
    for (int x = lo; x < hi; ++x) {
        for (int y = lo; y < hi; ++y) {
            // Full-height back slab plus a low front seat.
            for (int z = 0; z < hi; ++z) {
                if (y < mid || z < mid) grid.set(x, y, z, 1.0);
            }
        }
    }
    return grid;
}

VoxelGrid make_table_grid(int resolution) {
    VoxelGrid grid(resolution);
    const int lo = resolution / 8;
    const int hi = resolution - lo;
    const int top = (3 * resolution) / 4;
    const int leg = std::max(2, resolution / 6);
    for (int x = lo; x < hi; ++x) {
        for (int y = lo; y < hi; ++y) {
            for (int z = top; z < hi; ++z) grid.set(x, y, z, 1.0);
        }
    }
    const int corners[4][2] = {{lo, lo}, {lo, hi - leg}, {hi - leg, lo}, {hi - leg, hi - leg}};
    for (const auto& c : corners) {
        for (int x = c[0]; x < c[0] + leg; ++x) {
            for (int y = c[1]; y < c[1] + leg; ++y) {
                for (int z = 0; z < top; ++z) grid.set(x, y, z, 1.0);
            }
        }
    }
    return grid;
}

namespace {

struct ShapeModel {
    VoxelGrid grid;
    std::string category;
};

ShapeModel pick_shape(int resolution, Rng& rng) {
    switch (rng.below(3)) {
        case 0:
            return {make_box_grid(resolution), "box"};
        case 1:
            return {make_lshape_grid(resolution), "lshape"};
        default:
            return {make_table_grid(resolution), "table"};
    }
}

// Camera-to-world pose looking from `position` toward `target`, CV frame
// convention: +z forward, +x right, +y down.
RigidPose look_at(const Vec3& position, const Vec3& target) {
    const Vec3 forward = (target - position).normalized();
    Vec3 right = forward.cross(Vec3(0.0, 0.0, 1.0));
    if (right.norm() < 1e-9) right = Vec3(1.0, 0.0, 0.0);  // looking straight up/down
    right.normalize();
    const Vec3 down = forward.cross(right);
    Eigen::Matrix3d m;
    m.col(0) = right;
    m.col(1) = down;
    m.col(2) = forward;
    return RigidPose{UnitQuaternion::from_matrix(m), position};
}

RigidPose sample_camera(const SceneParams& params, Rng& rng) {
    const double angle = rng.uniform(0.0, 2.0 * M_PI);
    const Vec3 position(params.camera_ring_radius * std::cos(angle),
                        params.camera_ring_radius * std::sin(angle),
                        params.camera_height + rng.uniform(-0.2, 0.2));
    const Vec3 target(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                      params.camera_height * 0.6 + rng.uniform(-0.2, 0.2));
    return look_at(position, target);
}

bool in_frustum(const SceneParams& params, const RigidPose& camera, const Vec3& world_point) {
    const Vec3 p = camera.inverse().apply(world_point);
    if (p.z() < params.near_clip || p.z() > params.far_clip) return false;
    const double tan_h = std::tan(0.5 * params.hfov_deg * M_PI / 180.0);
    const double tan_v = std::tan(0.5 * params.vfov_deg * M_PI / 180.0);
    return std::abs(p.x()) <= p.z() * tan_h && std::abs(p.y()) <= p.z() * tan_v;
}

}  // namespace

GroundTruthScene generate_scene(const SceneParams& params, std::uint64_t seed) {
    if (params.objects < 1) fail_invalid("generate_scene: at least one object required");
    if (params.resolution < 4) fail_invalid("generate_scene: resolution too small");

    Rng rng(mix_seed(seed, 0x7363656eULL));

    for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
        GroundTruthScene scene;

        // Object placements: upright primitives on the floor, yaw-only
        // rotation, anisotropic scale, pairwise spaced centers.
        std::vector<Vec3> centers;
        bool placed_all = true;
        for (int k = 0; k < params.objects; ++k) {
            Vec3 center;
            bool ok = false;
            for (int tries = 0; tries < 64 && !ok; ++tries) {
                const double margin = 0.5;
                center = Vec3(rng.uniform(-params.room_half_extent + margin,
                                          params.room_half_extent - margin),
                              rng.uniform(-params.room_half_extent + margin,
                                          params.room_half_extent - margin),
                              0.0);
                ok = std::all_of(centers.begin(), centers.end(), [&](const Vec3& c) {
                    return (c - center).norm() >= params.min_spacing;
                });
            }
            if (!ok) {
                placed_all = false;
                break;
            }
            centers.push_back(center);

            SceneObject obj;
            obj.id = "obj" + std::to_string(k);
            if (k > 0 && rng.bernoulli(params.duplicate_shape_prob)) {
                const auto source = rng.below(static_cast<std::uint64_t>(k));
                obj.voxels = scene.objects[source].voxels;
                obj.category = scene.objects[source].category;
                scene.model_ids.push_back(scene.model_ids[source]);
            } else {
                ShapeModel shape = pick_shape(params.resolution, rng);
                obj.voxels = std::move(shape.grid);
                obj.category = shape.category;
                scene.model_ids.push_back(k);
            }
            const Vec3 scale(std::exp(rng.uniform(std::log(0.5), std::log(1.1))),
                             std::exp(rng.uniform(std::log(0.5), std::log(1.1))),
                             std::exp(rng.uniform(std::log(0.5), std::log(1.1))));
            const UnitQuaternion yaw =
                UnitQuaternion::from_axis_angle(Vec3(0.0, 0.0, 1.0), rng.uniform(0.0, 2.0 * M_PI));
            center.z() = 0.5 * scale.z();
            obj.transform = SimilarityTransform(yaw, center, scale);
            obj.score = 1.0;
            scene.objects.push_back(std::move(obj));
        }
        if (!placed_all) continue;

        scene.camera1 = sample_camera(params, rng);
        scene.camera2 = sample_camera(params, rng);

        scene.visible1.resize(scene.objects.size());
        scene.visible2.resize(scene.objects.size());
        for (std::size_t k = 0; k < scene.objects.size(); ++k) {
            const Vec3& center = scene.objects[k].transform.translation();
            scene.visible1[k] = in_frustum(params, scene.camera1, center);
            scene.visible2[k] = in_frustum(params, scene.camera2, center);
        }

        int shared = 0, only1 = 0, only2 = 0;
        for (std::size_t k = 0; k < scene.objects.size(); ++k) {
            if (scene.visible1[k] && scene.visible2[k]) ++shared;
            if (scene.visible1[k] && !scene.visible2[k]) ++only1;
            if (!scene.visible1[k] && scene.visible2[k]) ++only2;
        }
        // Keep pairs with at least one shared object where neither view's
        // object set is a proper subset of the other (equal sets pass).
        const bool proper_subset = (only1 == 0) != (only2 == 0);
        if (shared < 1 || proper_subset) continue;

        auto build_order = [&](const std::vector<bool>& visible) {
            std::vector<int> order;
            for (std::size_t k = 0; k < scene.objects.size(); ++k) {
                if (visible[k]) order.push_back(static_cast<int>(k));
            }
            // Shuffle so view indices carry no correspondence hint.
            for (std::size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1], order[rng.below(i)]);
            }
            return order;
        };
        scene.view1_order = build_order(scene.visible1);
        scene.view2_order = build_order(scene.visible2);

        std::vector<std::pair<int, int>> pairs;
        for (std::size_t s1 = 0; s1 < scene.view1_order.size(); ++s1) {
            for (std::size_t s2 = 0; s2 < scene.view2_order.size(); ++s2) {
                if (scene.view1_order[s1] == scene.view2_order[s2]) {
                    pairs.emplace_back(static_cast<int>(s1), static_cast<int>(s2));
                }
            }
        }
        scene.gt_correspondence = Correspondence(std::move(pairs));
        return scene;
    }
    fail(ErrorCode::invalid, "generate_scene: visibility constraints unsatisfiable after " +
                                 std::to_string(params.max_attempts) + " attempts");
}

std::vector<RigidPose> sample_pose_corpus(const SceneParams& params, int count,
                                          std::uint64_t seed) {
    if (count < 1) fail_invalid("sample_pose_corpus: count must be >= 1");
    Rng rng(mix_seed(seed, 0x636f7270ULL));
    std::vector<RigidPose> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        const RigidPose c1 = sample_camera(params, rng);
        const RigidPose c2 = sample_camera(params, rng);
        out.push_back(c2.inverse() * c1);
    }
    return out;
}

namespace {

// Angle between embedding bases of two instances of the same voxel model.
// Their zero-noise affinity is sigmoid(5 cos 0.35) ~ 0.99, so duplicates
// look nearly as good as true matches to the affinity alone.
constexpr double kSameModelAngle = 0.35;

// Base embedding per world object. Distinct models sit on a regular
// simplex (pairwise dot -1/(g-1), so non-matching affinities fall below
// 0.5); same-model instances share the model anchor up to a small tilt.
std::vector<Eigen::VectorXd> embedding_bases(const std::vector<int>& model_ids, int dim,
                                             Rng& rng) {
    const int count = static_cast<int>(model_ids.size());
    std::vector<int> group_of(count);
    std::vector<int> first_seen;
    for (int o = 0; o < count; ++o) {
        int g = -1;
        for (std::size_t k = 0; k < first_seen.size(); ++k) {
            if (model_ids[first_seen[k]] == model_ids[o]) g = static_cast<int>(k);
        }
        if (g < 0) {
            g = static_cast<int>(first_seen.size());
            first_seen.push_back(o);
        }
        group_of[o] = g;
    }
    const int groups = static_cast<int>(first_seen.size());
    if (groups + count > dim) {
        fail_invalid("corrupt_to_observations: too many objects for the embedding dimension");
    }

    // Orthonormal frame: one column per model anchor, one per object tilt.
    Eigen::MatrixXd gauss(dim, groups + count);
    for (int j = 0; j < groups + count; ++j) {
        for (int i = 0; i < dim; ++i) gauss(i, j) = rng.normal();
    }
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ() *
                              Eigen::MatrixXd::Identity(dim, groups + count);

    std::vector<Eigen::VectorXd> anchors(groups);
    if (groups == 1) {
        anchors[0] = q.col(0);
    } else {
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
        for (int g = 0; g < groups; ++g) centroid += q.col(g);
        centroid /= groups;
        for (int g = 0; g < groups; ++g) anchors[g] = (q.col(g) - centroid).normalized();
    }

    std::vector<Eigen::VectorXd> bases(count);
    std::vector<bool> anchor_taken(groups, false);
    for (int o = 0; o < count; ++o) {
        const int g = group_of[o];
        if (!anchor_taken[g]) {
            anchor_taken[g] = true;
            bases[o] = anchors[g];
        } else {
            bases[o] = (std::cos(kSameModelAngle) * anchors[g] +
                        std::sin(kSameModelAngle) * q.col(groups + o))
                           .normalized();
        }
    }
    return bases;
}

Eigen::VectorXd perturb_on_sphere(const Eigen::VectorXd& base, double sigma, Rng& rng) {
    if (sigma == 0.0) return base;
    Eigen::VectorXd tangent(base.size());
    for (int i = 0; i < base.size(); ++i) tangent[i] = rng.normal();
    tangent -= tangent.dot(base) * base;
    const double norm = tangent.norm();
    if (norm < 1e-12) return base;
    tangent /= norm;
    const double theta = sigma * rng.normal();
    return (std::cos(theta) * base + std::sin(theta) * tangent).normalized();
}

UnitQuaternion perturb_rotation(const UnitQuaternion& q, double sigma, Rng& rng) {
    if (sigma == 0.0) return q;
    const Vec3 w(sigma * rng.normal(), sigma * rng.normal(), sigma * rng.normal());
    const double angle = w.norm();
    if (angle < 1e-12) return q;
    return q * UnitQuaternion::from_axis_angle(w / angle, angle);
}

// One marginal of the camera distribution: the winner bin (the true bin
// with probability top1_accuracy, otherwise a distance-biased impostor)
// receives the largest mass, every other bin decays with distance from the
// truth. The true bin is never ranked below second. Impostor draws use a
// wider decay (gamma_draw) than the probability profile (gamma_prob), so
// a confident distribution still concentrates mass near the truth.
std::vector<double> binned_probs(int true_bin, const std::vector<double>& distance_to_true,
                                 double top1_accuracy, double gamma_draw, double gamma_prob,
                                 Rng& rng) {
    const int bins = static_cast<int>(distance_to_true.size());
    int winner = true_bin;
    if (bins > 1 && !rng.bernoulli(top1_accuracy)) {
        std::vector<double> w(bins, 0.0);
        for (int i = 0; i < bins; ++i) {
            if (i != true_bin) w[i] = std::exp(-distance_to_true[i] / gamma_draw);
        }
        winner = rng.weighted_pick(w);
    }
    std::vector<double> raw(bins);
    for (int i = 0; i < bins; ++i) raw[i] = 0.5 * std::exp(-distance_to_true[i] / gamma_prob);
    raw[winner] = 1.0;
    const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
    for (double& p : raw) p /= total;
    return raw;
}

}  // namespace

Observations corrupt_to_observations(const GroundTruthScene& scene, const NoiseModel& noise,
                                     const RotationBinSet& rotation_bins,
                                     const TranslationBinSet& translation_bins,
                                     std::uint64_t seed) {
    validate_noise(noise);
    validate_bins(rotation_bins);
    validate_bins(translation_bins);

    Rng rng(mix_seed(seed, 0x6f627376ULL));
    if (scene.model_ids.size() != scene.objects.size()) {
        fail_invalid("corrupt_to_observations: scene is missing model ids");
    }
    const int embedding_dim = 64;
    const auto bases = embedding_bases(scene.model_ids, embedding_dim, rng);

    auto render_view = [&](const RigidPose& camera, const std::vector<int>& order,
                           const char* prefix) {
        const RigidPose world_to_cam = camera.inverse();
        std::vector<SceneObject> view;
        view.reserve(order.size());
        for (std::size_t slot = 0; slot < order.size(); ++slot) {
            const SceneObject& world_obj = scene.objects[order[slot]];
            SceneObject obj;
            obj.id = prefix + std::to_string(slot);
            obj.voxels = world_obj.voxels;
            obj.category = world_obj.category;

            SimilarityTransform in_cam = compose_rigid(world_to_cam, world_obj.transform);
            const Vec3 t = in_cam.translation() +
                           noise.trans_sigma * Vec3(rng.normal(), rng.normal(), rng.normal());
            const UnitQuaternion r = perturb_rotation(in_cam.rotation(), noise.rot_sigma, rng);
            Vec3 s = in_cam.scale();
            for (int i = 0; i < 3; ++i) s[i] *= std::exp(noise.scale_sigma * rng.normal());
            obj.transform = SimilarityTransform(r, t, s);

            obj.score = rng.uniform(0.65, 1.0);
            obj.embedding = perturb_on_sphere(bases[order[slot]], noise.embedding_noise, rng);
            view.push_back(std::move(obj));
        }
        return view;
    };

    Observations obs;
    obs.view1 = render_view(scene.camera1, scene.view1_order, "v1_");
    obs.view2 = render_view(scene.camera2, scene.view2_order, "v2_");

    std::vector<Eigen::VectorXd> e1, e2;
    for (const auto& o : obs.view1) e1.push_back(*o.embedding);
    for (const auto& o : obs.view2) e2.push_back(*o.embedding);
    obs.affinity = build_affinity(e1, e2);

    const RigidPose true_pose = scene.relative_pose();

    std::vector<double> rot_dist(rotation_bins.centroids.size());
    for (std::size_t i = 0; i < rotation_bins.centroids.size(); ++i) {
        rot_dist[i] = rotation_geodesic(rotation_bins.centroids[i], true_pose.rotation);
    }
    std::vector<double> trans_dist(translation_bins.centroids.size());
    for (std::size_t i = 0; i < translation_bins.centroids.size(); ++i) {
        trans_dist[i] = (translation_bins.centroids[i] - true_pose.translation).norm();
    }

    const double rot_gamma_draw = 0.5;     // radians
    const double rot_gamma_prob = 0.25;
    const double trans_gamma_draw = 0.75;  // meters
    const double trans_gamma_prob = 0.3;
    obs.camera.rotation_bins = rotation_bins;
    obs.camera.translation_bins = translation_bins;
    obs.camera.rotation_probs =
        binned_probs(nearest_rotation_bin(rotation_bins, true_pose.rotation), rot_dist,
                     noise.pose_top1_accuracy, rot_gamma_draw, rot_gamma_prob, rng);
    obs.camera.translation_probs =
        binned_probs(nearest_translation_bin(translation_bins, true_pose.translation), trans_dist,
                     noise.pose_top1_accuracy, trans_gamma_draw, trans_gamma_prob, rng);
    return obs;
}

}  // namespace stitch3d
