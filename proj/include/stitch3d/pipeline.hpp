#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stitch3d/evaluation.hpp"
#include "stitch3d/scene_io.hpp"

namespace stitch3d {

// Command-level operations shared by the C API and the CLI.

// Runs the solver on a loaded scene pair. If the pair carries no affinity
// matrix, one is built from the object embeddings; missing both is a
// validation error.
StitchReport run_stitch(const ScenePair& pair, const SolveOptions& options);

struct EvaluateOptions {
    DetectionThresholds thresholds;
    bool text = false;  // text table instead of JSON
};

// Pairs of prediction (stitch report) and ground-truth (scene pair) files.
// Each argument is either a single .json file or a directory, in which case
// the sorted *.json entries (manifest.json excluded) are paired
// positionally.
std::pair<std::vector<std::string>, std::vector<std::string>> expand_eval_inputs(
    const std::string& predictions_path, const std::string& ground_truth_path);

// Scores reports against scenes: detection AP (all + per-metric),
// correspondence AP with the stitched-vs-raw comparison, and the relative
// pose error table for both the stitched pose and the raw top-1 bins.
// Returns the rendered report (JSON or text).
std::string run_evaluate(const std::vector<std::string>& report_paths,
                         const std::vector<std::string>& scene_paths,
                         const EvaluateOptions& options);

struct GenerateOptions {
    int scenes = 5;
    SceneParams scene;
    NoiseModel noise;
    int corpus_size = 512;  // pose corpus behind the internal bin sets
    int k_rot = 30;
    int k_trans = 60;
    std::uint64_t seed = 0;
    std::optional<std::string> bins_path;  // use these bins instead of clustering
};

// Writes scene_NNNN.json files plus manifest.json into out_dir; returns the
// manifest text.
std::string run_generate(const GenerateOptions& options, const std::string& out_dir);

// Clusters a pose corpus file into bin sets and writes them.
void run_cluster(const std::string& corpus_path, int k_rot, int k_trans, std::uint64_t seed,
                 const std::string& out_path);

}  // namespace stitch3d
