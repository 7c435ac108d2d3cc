// Command-line front end for the stitching library. Talks to the shared
// library exclusively through the C API in stitch3d.h.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stitch3d.h"

namespace {

// Exit codes: 0 success, 1 validation/input error, 2 solve failure.
int exit_code_of(s3d_status status) {
    if (status == S3D_OK) return 0;
    if (status == S3D_ERROR_SOLVE) return 2;
    return 1;
}

int report_failure(s3d_status status) {
    std::cerr << "error: " << s3d_last_error() << "\n";
    return exit_code_of(status);
}

uint64_t default_seed() {
    if (const char* env = std::getenv("SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            std::cerr << "warning: ignoring non-numeric SEED environment variable\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-view 3D scene stitching: joint camera pose and object "
                 "correspondence selection over voxel scenes"};
    app.require_subcommand(1);

    // ---------------------------------------------------------------- stitch
    auto* stitch = app.add_subcommand("stitch", "Stitch a scene-pair file into one scene");
    std::string stitch_input;
    std::string stitch_out;
    s3d_stitch_params params;
    s3d_stitch_params_init(&params);
    params.seed = default_seed();
    stitch->add_option("input", stitch_input, "Scene-pair JSON file")->required();
    stitch->add_option("--out", stitch_out, "Write the stitch report here (default: stdout)");
    stitch->add_option("--seed", params.seed, "Random seed (overrides $SEED)")
        ->capture_default_str();
    stitch->add_option("--k-samples", params.samples, "Correspondence samples per pose hypothesis")
        ->capture_default_str();
    stitch->add_option("--k-rot", params.top_rotations, "Rotation bins searched")
        ->capture_default_str();
    stitch->add_option("--k-trans", params.top_translations, "Translation bins searched")
        ->capture_default_str();
    stitch->add_option("--lambda-s", params.lambda_similarity, "Affinity similarity weight")
        ->capture_default_str();
    stitch->add_option("--lambda-u", params.lambda_unmatched, "Unmatched-object weight")
        ->capture_default_str();
    stitch->add_option("--lambda-p-rot", params.lambda_pose_rotation, "Rotation pose weight")
        ->capture_default_str();
    stitch->add_option("--lambda-p-trans", params.lambda_pose_translation,
                       "Translation pose weight")
        ->capture_default_str();
    stitch->add_option("--affinity-threshold", params.affinity_threshold,
                       "Feasible-pair affinity threshold")
        ->capture_default_str();
    stitch->add_option("--edge-threshold", params.edge_threshold,
                       "Voxel occupancy threshold for edge extraction")
        ->capture_default_str();
    stitch->add_option("--max-edge-points", params.max_edge_points,
                       "Edge points kept per object")
        ->capture_default_str();
    stitch->add_option("--threads", params.threads, "Worker threads (same result for any count)")
        ->capture_default_str();

    // -------------------------------------------------------------- evaluate
    auto* evaluate = app.add_subcommand(
        "evaluate", "Score stitch reports against scene files with ground truth");
    std::string eval_pred, eval_gt, eval_format = "json";
    s3d_eval_thresholds thresholds;
    s3d_eval_thresholds_init(&thresholds);
    double rot_max_deg = thresholds.rotation_max_rad * 180.0 / 3.14159265358979323846;
    evaluate->add_option("predictions", eval_pred, "Stitch report file or directory")->required();
    evaluate->add_option("ground-truth", eval_gt, "Scene-pair file or directory")->required();
    evaluate->add_option("--format", eval_format, "Output format: json or text")
        ->check(CLI::IsMember({"json", "text"}))
        ->capture_default_str();
    evaluate->add_option("--trans-max", thresholds.translation_max, "Translation gate, meters")
        ->capture_default_str();
    evaluate->add_option("--scale-max", thresholds.scale_max, "Scale gate, mean |log2| units")
        ->capture_default_str();
    evaluate->add_option("--rot-max-deg", rot_max_deg, "Rotation gate, degrees")
        ->capture_default_str();
    evaluate->add_option("--fscore-min", thresholds.fscore_min, "Shape gate, minimum F-score")
        ->capture_default_str();
    evaluate->add_option("--fscore-tau", thresholds.fscore_tau, "F-score distance tau")
        ->capture_default_str();

    // -------------------------------------------------------------- generate
    auto* generate =
        app.add_subcommand("generate", "Generate synthetic scene-pair benchmarks with ground truth");
    std::string gen_out, gen_bins;
    s3d_generate_params gen;
    s3d_generate_params_init(&gen);
    gen.seed = default_seed();
    generate->add_option("--out", gen_out, "Output directory")->required();
    generate->add_option("--scenes", gen.scenes, "Number of scene pairs")->capture_default_str();
    generate->add_option("--objects", gen.objects, "Objects per scene")->capture_default_str();
    generate->add_option("--resolution", gen.resolution, "Voxel grid resolution")
        ->capture_default_str();
    generate->add_option("--noise-trans", gen.translation_noise, "Translation noise sigma, meters")
        ->capture_default_str();
    generate->add_option("--noise-rot", gen.rotation_noise, "Rotation noise sigma, radians")
        ->capture_default_str();
    generate->add_option("--noise-scale", gen.scale_noise, "Scale noise sigma, log units")
        ->capture_default_str();
    generate->add_option("--noise-embedding", gen.embedding_noise,
                         "Embedding tangent noise, radians")
        ->capture_default_str();
    generate->add_option("--pose-top1-accuracy", gen.pose_top1_accuracy,
                         "Probability the true bin ranks first")
        ->capture_default_str();
    generate->add_option("--duplicate-shape-prob", gen.duplicate_shape_prob,
                         "Probability an object reuses an earlier voxel model")
        ->capture_default_str();
    generate->add_option("--seed", gen.seed, "Random seed (overrides $SEED)")
        ->capture_default_str();
    generate->add_option("--bins", gen_bins, "Bin-set file (default: cluster internally)");
    generate->add_option("--k-rot", gen.rotation_bins, "Rotation bins when clustering internally")
        ->capture_default_str();
    generate->add_option("--k-trans", gen.translation_bins,
                         "Translation bins when clustering internally")
        ->capture_default_str();
    generate->add_option("--corpus-size", gen.corpus_size, "Pose corpus size behind the bins")
        ->capture_default_str();

    // --------------------------------------------------------------- cluster
    auto* cluster =
        app.add_subcommand("cluster", "Cluster a pose corpus into rotation/translation bins");
    std::string cluster_poses, cluster_out;
    int cluster_k_rot = 30, cluster_k_trans = 60;
    uint64_t cluster_seed = default_seed();
    cluster->add_option("--poses", cluster_poses, "Pose corpus JSON file")->required();
    cluster->add_option("--out", cluster_out, "Bin-set output file")->required();
    cluster->add_option("--k-rot", cluster_k_rot, "Rotation bin count")->capture_default_str();
    cluster->add_option("--k-trans", cluster_k_trans, "Translation bin count")
        ->capture_default_str();
    cluster->add_option("--seed", cluster_seed, "Random seed (overrides $SEED)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the parse error
        return code == 0 ? 0 : 1;
    }

    if (stitch->parsed()) {
        s3d_scene_pair* pair = nullptr;
        s3d_status status = s3d_scene_pair_load(stitch_input.c_str(), &pair);
        if (status != S3D_OK) return report_failure(status);

        s3d_stitch_result* result = nullptr;
        status = s3d_stitch(pair, &params, &result);
        s3d_scene_pair_free(pair);
        if (status != S3D_OK) return report_failure(status);

        if (stitch_out.empty()) {
            char* json = nullptr;
            status = s3d_stitch_result_to_json(result, &json);
            if (status == S3D_OK) {
                std::cout << json;
                s3d_string_free(json);
            }
        } else {
            status = s3d_stitch_result_save(result, stitch_out.c_str());
        }
        s3d_stitch_result_free(result);
        return status == S3D_OK ? 0 : report_failure(status);
    }

    if (evaluate->parsed()) {
        thresholds.rotation_max_rad = rot_max_deg * 3.14159265358979323846 / 180.0;
        char* report = nullptr;
        const s3d_status status = s3d_evaluate(eval_pred.c_str(), eval_gt.c_str(), &thresholds,
                                               eval_format == "text" ? 1 : 0, &report);
        if (status != S3D_OK) return report_failure(status);
        std::cout << report;
        s3d_string_free(report);
        return 0;
    }

    if (generate->parsed()) {
        gen.bins_path = gen_bins.empty() ? nullptr : gen_bins.c_str();
        const s3d_status status = s3d_generate(&gen, gen_out.c_str(), nullptr);
        if (status != S3D_OK) return report_failure(status);
        std::cout << "wrote " << gen.scenes << " scene pairs to " << gen_out << "\n";
        return 0;
    }

    if (cluster->parsed()) {
        const s3d_status status = s3d_cluster_poses(cluster_poses.c_str(), cluster_k_rot,
                                                    cluster_k_trans, cluster_seed,
                                                    cluster_out.c_str());
        if (status != S3D_OK) return report_failure(status);
        std::cout << "wrote bin sets to " << cluster_out << "\n";
        return 0;
    }
    return 1;
}
