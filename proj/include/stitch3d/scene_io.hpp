#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stitch3d/geometry.hpp"
#include "stitch3d/pose_space.hpp"
#include "stitch3d/stitcher.hpp"
#include "stitch3d/synthetic.hpp"

namespace stitch3d {

// In-memory form of a scene-pair file: two views of object records, an
// optional affinity matrix, the binned camera distribution, and an optional
// ground-truth block. Quaternions serialize as [w, x, y, z]; voxels as
// base64 bit-packed occupancy.
struct ScenePair {
    int version = 1;
    std::vector<SceneObject> view1;
    std::vector<SceneObject> view2;
    std::optional<AffinityMatrix> affinity;
    CameraPoseDistribution camera;
    std::optional<GroundTruthScene> ground_truth;
};

ScenePair parse_scene_pair(const std::string& json_text);
ScenePair load_scene_pair(const std::string& path);
std::string write_scene_pair(const ScenePair& pair);
void save_scene_pair(const ScenePair& pair, const std::string& path);

// Stitch output: the chosen pose and correspondence, the merged scene, the
// objective breakdown, and run metadata.
struct StitchReport {
    int version = 1;
    StitchResult result;
    StitchWeights weights;
    double wall_clock_sec = 0.0;
};

std::string write_stitch_report(const StitchReport& report);
StitchReport parse_stitch_report(const std::string& json_text);
StitchReport load_stitch_report(const std::string& path);
void save_stitch_report(const StitchReport& report, const std::string& path);

// Bin-set files: {"rotation_bins": [{"q_wxyz": [...]}], "translation_bins":
// [{"t": [...]}]}.
void save_bin_sets(const RotationBinSet& rotation, const TranslationBinSet& translation,
                   const std::string& path);
std::pair<RotationBinSet, TranslationBinSet> load_bin_sets(const std::string& path);

// Pose corpus files: {"poses": [{"rotation_wxyz": [...], "translation": [...]}]}.
void save_pose_corpus(const std::vector<RigidPose>& poses, const std::string& path);
std::vector<RigidPose> load_pose_corpus(const std::string& path);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

// Bit b of byte k encodes linear voxel index 8k + b (little-endian bit
// order) under the x*R^2 + y*R + z layout; occupancy >= 0.5 packs as 1.
std::vector<std::uint8_t> pack_voxel_bits(const VoxelGrid& grid);
VoxelGrid unpack_voxel_bits(int resolution, const std::vector<std::uint8_t>& bytes);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace stitch3d
