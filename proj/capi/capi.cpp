#include "stitch3d.h"

#include <cstring>
#include <string>

#include "stitch3d/pipeline.hpp"
#include "stitch3d/scene_io.hpp"

namespace {

thread_local std::string g_last_error;

s3d_status status_of(const stitch3d::Error& e) {
    switch (e.code()) {
        case stitch3d::ErrorCode::io:
            return S3D_ERROR_IO;
        case stitch3d::ErrorCode::parse:
            return S3D_ERROR_PARSE;
        case stitch3d::ErrorCode::invalid:
            return S3D_ERROR_INVALID;
        case stitch3d::ErrorCode::solve:
            return S3D_ERROR_SOLVE;
        case stitch3d::ErrorCode::eval:
            return S3D_ERROR_EVAL;
    }
    return S3D_ERROR_INVALID;
}

// Runs fn, routing exceptions into the status + thread-local message.
template <typename Fn>
s3d_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return S3D_OK;
    } catch (const stitch3d::Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return S3D_ERROR_INVALID;
    }
}

s3d_status invalid_argument(const char* message) {
    g_last_error = message;
    return S3D_ERROR_INVALID;
}

char* copy_string(const std::string& text) {
    char* out = new char[text.size() + 1];
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

}  // namespace

struct s3d_scene_pair {
    stitch3d::ScenePair pair;
};

struct s3d_stitch_result {
    stitch3d::StitchReport report;
};

extern "C" {

const char* s3d_version(void) { return "1.0.0"; }

const char* s3d_last_error(void) { return g_last_error.c_str(); }

void s3d_string_free(char* text) { delete[] text; }

/* ------------------------------------------------------------------ */

s3d_status s3d_scene_pair_load(const char* path, s3d_scene_pair** out) {
    if (!path || !out) return invalid_argument("s3d_scene_pair_load: null argument");
    *out = nullptr;
    return guarded([&] { *out = new s3d_scene_pair{stitch3d::load_scene_pair(path)}; });
}

s3d_status s3d_scene_pair_parse(const char* json_text, s3d_scene_pair** out) {
    if (!json_text || !out) return invalid_argument("s3d_scene_pair_parse: null argument");
    *out = nullptr;
    return guarded([&] { *out = new s3d_scene_pair{stitch3d::parse_scene_pair(json_text)}; });
}

void s3d_scene_pair_free(s3d_scene_pair* pair) { delete pair; }

int s3d_scene_pair_view_size(const s3d_scene_pair* pair, int view) {
    if (!pair || (view != 0 && view != 1)) return -1;
    return static_cast<int>(view == 0 ? pair->pair.view1.size() : pair->pair.view2.size());
}

int s3d_scene_pair_has_ground_truth(const s3d_scene_pair* pair) {
    return pair && pair->pair.ground_truth ? 1 : 0;
}

/* ------------------------------------------------------------------ */

void s3d_stitch_params_init(s3d_stitch_params* params) {
    if (!params) return;
    const stitch3d::StitchWeights weights;
    const stitch3d::EdgeExtraction edge;
    const stitch3d::SolveOptions options;
    params->lambda_similarity = weights.lambda_s;
    params->lambda_unmatched = weights.lambda_u;
    params->lambda_pose_rotation = weights.lambda_p_rot;
    params->lambda_pose_translation = weights.lambda_p_trans;
    params->affinity_threshold = weights.affinity_threshold;
    params->edge_threshold = edge.threshold;
    params->samples = weights.k_samples;
    params->top_rotations = options.k_rot;
    params->top_translations = options.k_trans;
    params->max_edge_points = edge.max_points;
    params->threads = options.threads;
    params->seed = options.seed;
}

s3d_status s3d_stitch(const s3d_scene_pair* pair, const s3d_stitch_params* params,
                      s3d_stitch_result** out) {
    if (!pair || !out) return invalid_argument("s3d_stitch: null argument");
    *out = nullptr;

    s3d_stitch_params defaults;
    s3d_stitch_params_init(&defaults);
    const s3d_stitch_params& p = params ? *params : defaults;

    stitch3d::SolveOptions options;
    options.weights.lambda_s = p.lambda_similarity;
    options.weights.lambda_u = p.lambda_unmatched;
    options.weights.lambda_p_rot = p.lambda_pose_rotation;
    options.weights.lambda_p_trans = p.lambda_pose_translation;
    options.weights.affinity_threshold = p.affinity_threshold;
    options.weights.k_samples = p.samples;
    options.edge.threshold = p.edge_threshold;
    options.edge.max_points = p.max_edge_points;
    options.k_rot = p.top_rotations;
    options.k_trans = p.top_translations;
    options.threads = p.threads;
    options.seed = p.seed;

    return guarded([&] { *out = new s3d_stitch_result{stitch3d::run_stitch(pair->pair, options)}; });
}

void s3d_stitch_result_free(s3d_stitch_result* result) { delete result; }

double s3d_stitch_result_objective(const s3d_stitch_result* result) {
    return result ? result->report.result.objective : -1.0;
}

void s3d_stitch_result_pose(const s3d_stitch_result* result, double quat_wxyz[4],
                            double translation[3]) {
    if (!result) return;
    const stitch3d::PoseHypothesis& pose = result->report.result.pose;
    if (quat_wxyz) {
        quat_wxyz[0] = pose.rotation.w();
        quat_wxyz[1] = pose.rotation.x();
        quat_wxyz[2] = pose.rotation.y();
        quat_wxyz[3] = pose.rotation.z();
    }
    if (translation) {
        translation[0] = pose.translation.x();
        translation[1] = pose.translation.y();
        translation[2] = pose.translation.z();
    }
}

int s3d_stitch_result_pair_count(const s3d_stitch_result* result) {
    return result ? result->report.result.correspondence.size() : -1;
}

s3d_status s3d_stitch_result_pair(const s3d_stitch_result* result, int index, int* view1_index,
                                  int* view2_index) {
    if (!result || !view1_index || !view2_index) {
        return invalid_argument("s3d_stitch_result_pair: null argument");
    }
    const auto& pairs = result->report.result.correspondence.pairs();
    if (index < 0 || index >= static_cast<int>(pairs.size())) {
        return invalid_argument("s3d_stitch_result_pair: index out of range");
    }
    *view1_index = pairs[index].first;
    *view2_index = pairs[index].second;
    return S3D_OK;
}

int s3d_stitch_result_merged_count(const s3d_stitch_result* result) {
    return result ? static_cast<int>(result->report.result.merged.size()) : -1;
}

s3d_status s3d_stitch_result_to_json(const s3d_stitch_result* result, char** json_out) {
    if (!result || !json_out) return invalid_argument("s3d_stitch_result_to_json: null argument");
    *json_out = nullptr;
    return guarded([&] { *json_out = copy_string(stitch3d::write_stitch_report(result->report)); });
}

s3d_status s3d_stitch_result_save(const s3d_stitch_result* result, const char* path) {
    if (!result || !path) return invalid_argument("s3d_stitch_result_save: null argument");
    return guarded([&] { stitch3d::save_stitch_report(result->report, path); });
}

/* ------------------------------------------------------------------ */

void s3d_eval_thresholds_init(s3d_eval_thresholds* thresholds) {
    if (!thresholds) return;
    const stitch3d::DetectionThresholds defaults;
    thresholds->translation_max = defaults.trans_max;
    thresholds->scale_max = defaults.scale_max;
    thresholds->rotation_max_rad = defaults.rot_max;
    thresholds->fscore_min = defaults.fscore_min;
    thresholds->fscore_tau = defaults.fscore_tau;
}

s3d_status s3d_evaluate(const char* predictions_path, const char* ground_truth_path,
                        const s3d_eval_thresholds* thresholds, int text_format, char** report_out) {
    if (!predictions_path || !ground_truth_path || !report_out) {
        return invalid_argument("s3d_evaluate: null argument");
    }
    *report_out = nullptr;

    stitch3d::EvaluateOptions options;
    if (thresholds) {
        options.thresholds.trans_max = thresholds->translation_max;
        options.thresholds.scale_max = thresholds->scale_max;
        options.thresholds.rot_max = thresholds->rotation_max_rad;
        options.thresholds.fscore_min = thresholds->fscore_min;
        options.thresholds.fscore_tau = thresholds->fscore_tau;
    }
    options.text = text_format != 0;

    return guarded([&] {
        const auto [reports, scenes] =
            stitch3d::expand_eval_inputs(predictions_path, ground_truth_path);
        *report_out = copy_string(stitch3d::run_evaluate(reports, scenes, options));
    });
}

/* ------------------------------------------------------------------ */

void s3d_generate_params_init(s3d_generate_params* params) {
    if (!params) return;
    const stitch3d::GenerateOptions defaults;
    params->scenes = defaults.scenes;
    params->objects = defaults.scene.objects;
    params->resolution = defaults.scene.resolution;
    params->rotation_bins = defaults.k_rot;
    params->translation_bins = defaults.k_trans;
    params->corpus_size = defaults.corpus_size;
    params->translation_noise = defaults.noise.trans_sigma;
    params->rotation_noise = defaults.noise.rot_sigma;
    params->scale_noise = defaults.noise.scale_sigma;
    params->embedding_noise = defaults.noise.embedding_noise;
    params->pose_top1_accuracy = defaults.noise.pose_top1_accuracy;
    params->duplicate_shape_prob = defaults.noise.duplicate_shape_prob;
    params->seed = defaults.seed;
    params->bins_path = nullptr;
}

s3d_status s3d_generate(const s3d_generate_params* params, const char* out_dir,
                        char** manifest_json_out) {
    if (!out_dir) return invalid_argument("s3d_generate: null out_dir");
    if (manifest_json_out) *manifest_json_out = nullptr;

    s3d_generate_params defaults;
    s3d_generate_params_init(&defaults);
    const s3d_generate_params& p = params ? *params : defaults;

    stitch3d::GenerateOptions options;
    options.scenes = p.scenes;
    options.scene.objects = p.objects;
    options.scene.resolution = p.resolution;
    options.k_rot = p.rotation_bins;
    options.k_trans = p.translation_bins;
    options.corpus_size = p.corpus_size;
    options.noise.trans_sigma = p.translation_noise;
    options.noise.rot_sigma = p.rotation_noise;
    options.noise.scale_sigma = p.scale_noise;
    options.noise.embedding_noise = p.embedding_noise;
    options.noise.pose_top1_accuracy = p.pose_top1_accuracy;
    options.noise.duplicate_shape_prob = p.duplicate_shape_prob;
    options.seed = p.seed;
    if (p.bins_path) options.bins_path = std::string(p.bins_path);

    return guarded([&] {
        const std::string manifest = stitch3d::run_generate(options, out_dir);
        if (manifest_json_out) *manifest_json_out = copy_string(manifest);
    });
}

/* ------------------------------------------------------------------ */

s3d_status s3d_cluster_poses(const char* corpus_path, int rotation_bins, int translation_bins,
                             uint64_t seed, const char* out_path) {
    if (!corpus_path || !out_path) return invalid_argument("s3d_cluster_poses: null argument");
    return guarded([&] {
        stitch3d::run_cluster(corpus_path, rotation_bins, translation_bins, seed, out_path);
    });
}

}  // extern "C"
