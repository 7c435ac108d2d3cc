#pragma once

#include <cstdint>
#include <vector>

#include "stitch3d/affinity.hpp"
#include "stitch3d/geometry.hpp"
#include "stitch3d/pose_space.hpp"
#include "stitch3d/stitcher.hpp"

namespace stitch3d {

// Stand-in for network error when corrupting a ground-truth scene into
// observations. Sigmas act in tangent/log spaces; pose_top1_accuracy is the
// probability that the true bin ends up ranked first in each marginal.
struct NoiseModel {
    double trans_sigma = 0.0;       // meters
    double rot_sigma = 0.0;         // radians
    double scale_sigma = 0.0;       // natural-log units
    double embedding_noise = 0.0;   // radians of tangent perturbation
    double pose_top1_accuracy = 1.0;
    double duplicate_shape_prob = 0.0;
};

void validate_noise(const NoiseModel& noise);

struct SceneParams {
    int objects = 5;
    int resolution = 32;
    double room_half_extent = 2.2;   // meters, x/y
    double camera_ring_radius = 3.0; // meters from room center
    double camera_height = 1.4;
    double hfov_deg = 70.0;
    double vfov_deg = 55.0;
    double near_clip = 0.3;
    double far_clip = 12.0;
    double min_spacing = 0.7;        // minimum distance between object centers
    double duplicate_shape_prob = 0.0;
    int max_attempts = 500;
};

// A fully known two-view scene: world-frame objects, the two camera poses
// (camera-to-world), per-view visibility, and the view-index correspondence.
struct GroundTruthScene {
    std::vector<SceneObject> objects;  // world frame
    RigidPose camera1;                 // camera-to-world
    RigidPose camera2;
    std::vector<bool> visible1;        // per world object
    std::vector<bool> visible2;
    std::vector<int> view1_order;      // world index of each view-1 slot
    std::vector<int> view2_order;
    std::vector<int> model_ids;        // shared voxel model per object; duplicates share one
    Correspondence gt_correspondence;  // (view-1 slot, view-2 slot)

    // Maps camera-1-frame coordinates to camera-2-frame coordinates; the
    // quantity the pose bins discretize and the stitcher searches over.
    RigidPose relative_pose() const { return camera2.inverse() * camera1; }
};

// Places primitive objects in a room box and two cameras on a surrounding
// ring such that the views share at least one object and neither view's
// object set is a proper subset of the other. Throws after max_attempts
// failed placements.
GroundTruthScene generate_scene(const SceneParams& params, std::uint64_t seed);

struct Observations {
    std::vector<SceneObject> view1;  // camera-1 frame
    std::vector<SceneObject> view2;  // camera-2 frame
    AffinityMatrix affinity;
    CameraPoseDistribution camera;
};

// Renders the scene into per-view object hypotheses with Gaussian pose
// noise, embeddings with tangent perturbation, the induced affinity
// matrix, and a binned camera distribution whose top-1 bin is the true
// pose's nearest bin with probability pose_top1_accuracy (the true bin is
// always ranked at least second). Embedding bases form a regular simplex
// across distinct voxel models (non-matching affinities land below 0.5);
// objects sharing a model get near-parallel bases, so duplicates confuse
// the affinity the way same-looking instances do.
Observations corrupt_to_observations(const GroundTruthScene& scene, const NoiseModel& noise,
                                     const RotationBinSet& rotation_bins,
                                     const TranslationBinSet& translation_bins,
                                     std::uint64_t seed);

// Relative poses drawn from the same camera-placement distribution as
// generate_scene; clustering this corpus yields matched bin sets.
std::vector<RigidPose> sample_pose_corpus(const SceneParams& params, int count, std::uint64_t seed);

// Primitive shape voxelizations used by the generator (all binary grids).
VoxelGrid make_box_grid(int resolution);
VoxelGrid make_lshape_grid(int resolution);
VoxelGrid make_table_grid(int resolution);

}  // namespace stitch3d
