#include "stitch3d/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "stitch3d/random.hpp"

namespace stitch3d {

namespace fs = std::filesystem;
using njson = nlohmann::ordered_json;

StitchReport run_stitch(const ScenePair& pair, const SolveOptions& options) {
    AffinityMatrix affinity;
    if (pair.affinity) {
        affinity = *pair.affinity;
    } else {
        auto collect = [](const std::vector<SceneObject>& view, const char* view_path) {
            std::vector<Eigen::VectorXd> out;
            for (std::size_t i = 0; i < view.size(); ++i) {
                if (!view[i].embedding) {
                    fail_invalid(std::string("$.affinity is missing and $.views[") + view_path +
                                 "][" + std::to_string(i) +
                                 "].embedding is missing: provide either an affinity matrix or "
                                 "embeddings on every object");
                }
                out.push_back(*view[i].embedding);
            }
            return out;
        };
        affinity = build_affinity(collect(pair.view1, "0"), collect(pair.view2, "1"));
    }

    const auto start = std::chrono::steady_clock::now();
    StitchReport report;
    report.result = solve(pair.view1, pair.view2, affinity, pair.camera, options);
    report.weights = options.weights;
    report.wall_clock_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::pair<std::vector<std::string>, std::vector<std::string>> expand_eval_inputs(
    const std::string& predictions_path, const std::string& ground_truth_path) {
    auto expand = [](const std::string& path) {
        std::vector<std::string> files;
        if (fs::is_directory(path)) {
            for (const auto& entry : fs::directory_iterator(path)) {
                if (!entry.is_regular_file()) continue;
                const auto name = entry.path().filename().string();
                if (entry.path().extension() == ".json" && name != "manifest.json") {
                    files.push_back(entry.path().string());
                }
            }
            std::sort(files.begin(), files.end());
        } else if (fs::exists(path)) {
            files.push_back(path);
        } else {
            fail_io(path + ": no such file or directory");
        }
        if (files.empty()) fail_io(path + ": no .json files found");
        return files;
    };

    auto predictions = expand(predictions_path);
    auto ground_truth = expand(ground_truth_path);
    if (predictions.size() != ground_truth.size()) {
        fail_invalid("evaluate: " + std::to_string(predictions.size()) + " prediction files vs " +
                     std::to_string(ground_truth.size()) +
                     " ground-truth files; directory contents must pair up");
    }
    return {std::move(predictions), std::move(ground_truth)};
}

namespace {

std::string format_double(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

njson pose_stats_json(const RelativePoseStats& stats) {
    return njson{
        {"translation",
         {{"median_m", stats.translation.median},
          {"mean_m", stats.translation.mean},
          {"pct_within_1m", 100.0 * stats.translation.frac_within}}},
        {"rotation",
         {{"median_deg", stats.rotation.median * 180.0 / M_PI},
          {"mean_deg", stats.rotation.mean * 180.0 / M_PI},
          {"pct_within_30deg", 100.0 * stats.rotation.frac_within}}},
    };
}

std::string render_text_report(const njson& j) {
    std::string out;
    const auto& det = j["detection"];
    out += "detection AP (" + std::to_string(det["num_predictions"].get<int>()) +
           " predictions, " + std::to_string(det["num_ground_truth"].get<int>()) +
           " ground truth)\n";
    const auto& ap = det["ap"];
    out += "  all=" + format_double("%.4f", ap["all"].get<double>()) +
           "  shape=" + format_double("%.4f", ap["shape"].get<double>()) +
           "  translation=" + format_double("%.4f", ap["translation"].get<double>()) +
           "  rotation=" + format_double("%.4f", ap["rotation"].get<double>()) +
           "  scale=" + format_double("%.4f", ap["scale"].get<double>()) + "\n";

    if (j.contains("correspondence")) {
        const auto& c = j["correspondence"];
        out += "correspondence AP (" + std::to_string(c["num_pairs"].get<int>()) + " pairs, " +
               std::to_string(c["num_positives"].get<int>()) + " positives)\n";
        out += "  stitched=" + format_double("%.4f", c["ap_stitched"].get<double>()) +
               "  raw-affinity=" + format_double("%.4f", c["ap_raw_affinity"].get<double>()) + "\n";
    }

    if (j.contains("pose")) {
        const auto& p = j["pose"];
        out += "relative pose (" + std::to_string(p["count"].get<int>()) + " pairs)\n";
        char line[128];
        auto row = [&](const char* name, const njson& block, const char* part,
                       const char* within_key) {
            const auto& b = block[part];
            std::snprintf(line, sizeof(line), "  %-24s%10.3f%10.3f%13.2f\n", name,
                          b[part == std::string("translation") ? "median_m" : "median_deg"]
                              .get<double>(),
                          b[part == std::string("translation") ? "mean_m" : "mean_deg"]
                              .get<double>(),
                          b[within_key].get<double>());
            out += line;
        };
        std::snprintf(line, sizeof(line), "  %-24s%10s%10s%13s\n", "translation (m)", "median",
                      "mean", "(<= 1m)%");
        out += line;
        row("  top-1", p["top1"], "translation", "pct_within_1m");
        row("  stitched", p["stitched"], "translation", "pct_within_1m");
        std::snprintf(line, sizeof(line), "  %-24s%10s%10s%13s\n", "rotation (deg)", "median",
                      "mean", "(<= 30deg)%");
        out += line;
        row("  top-1", p["top1"], "rotation", "pct_within_30deg");
        row("  stitched", p["stitched"], "rotation", "pct_within_30deg");
    }
    return out;
}

}  // namespace

std::string run_evaluate(const std::vector<std::string>& report_paths,
                         const std::vector<std::string>& scene_paths,
                         const EvaluateOptions& options) {
    validate_thresholds(options.thresholds);
    if (report_paths.size() != scene_paths.size() || report_paths.empty()) {
        fail_invalid("evaluate: prediction and ground-truth file lists must pair up");
    }

    std::vector<DetectionRecord> detection_records;
    int num_ground_truth = 0;
    int num_predictions = 0;

    std::vector<DetectionRecord> corr_stitched;
    std::vector<DetectionRecord> corr_raw;
    int corr_pairs = 0;
    int corr_positives = 0;

    std::vector<PoseHypothesis> stitched_poses;
    std::vector<PoseHypothesis> top1_poses;
    std::vector<RigidPose> gt_poses;

    for (std::size_t idx = 0; idx < report_paths.size(); ++idx) {
        const StitchReport report = load_stitch_report(report_paths[idx]);
        const ScenePair scene = load_scene_pair(scene_paths[idx]);
        if (!scene.ground_truth) {
            fail(ErrorCode::eval, scene_paths[idx] + ": no ground_truth block");
        }
        const GroundTruthScene& gt = *scene.ground_truth;

        // Detection: merged predictions live in the camera-1 frame, so the
        // ground truth (every object seen by either view) is brought there.
        const RigidPose world_to_cam1 = gt.camera1.inverse();
        std::vector<SceneObject> gt_objects;
        for (std::size_t k = 0; k < gt.objects.size(); ++k) {
            if (!gt.visible1[k] && !gt.visible2[k]) continue;
            SceneObject obj = gt.objects[k];
            obj.transform = compose_rigid(world_to_cam1, obj.transform);
            gt_objects.push_back(std::move(obj));
        }
        auto records = match_and_score(report.result.merged, gt_objects, options.thresholds);
        detection_records.insert(detection_records.end(), records.begin(), records.end());
        num_ground_truth += static_cast<int>(gt_objects.size());
        num_predictions += static_cast<int>(report.result.merged.size());

        // Correspondence AP needs the scene's affinity and a non-empty
        // ground-truth matching.
        if (scene.affinity && !gt.gt_correspondence.empty()) {
            const auto conf =
                correspondence_confidence(*scene.affinity, report.result.correspondence);
            const int n = scene.affinity->rows();
            const int m = scene.affinity->cols();
            for (int i = 0; i < n; ++i) {
                for (int jj = 0; jj < m; ++jj) {
                    const bool positive = gt.gt_correspondence.contains(i, jj);
                    DetectionRecord rec;
                    rec.trans_ok = rec.scale_ok = rec.rot_ok = rec.shape_ok = positive;
                    rec.confidence = conf[static_cast<std::size_t>(i) * m + jj];
                    corr_stitched.push_back(rec);
                    rec.confidence = scene.affinity->at(i, jj);
                    corr_raw.push_back(rec);
                    ++corr_pairs;
                    if (positive) ++corr_positives;
                }
            }
        }

        stitched_poses.push_back(report.result.pose);
        top1_poses.push_back(top_k_hypotheses(scene.camera, 1, 1).front());
        gt_poses.push_back(gt.relative_pose());
    }

    if (num_ground_truth == 0) {
        fail(ErrorCode::eval, "evaluate: ground truth contains no objects");
    }

    njson out;
    out["detection"] = {
        {"num_predictions", num_predictions},
        {"num_ground_truth", num_ground_truth},
        {"ap",
         {{"all", average_precision(detection_records, num_ground_truth, DetectionCriterion::all)},
          {"shape",
           average_precision(detection_records, num_ground_truth, DetectionCriterion::shape)},
          {"translation",
           average_precision(detection_records, num_ground_truth, DetectionCriterion::translation)},
          {"rotation",
           average_precision(detection_records, num_ground_truth, DetectionCriterion::rotation)},
          {"scale",
           average_precision(detection_records, num_ground_truth, DetectionCriterion::scale)}}}};

    if (corr_positives > 0) {
        out["correspondence"] = {
            {"num_pairs", corr_pairs},
            {"num_positives", corr_positives},
            {"ap_stitched", average_precision(corr_stitched, corr_positives)},
            {"ap_raw_affinity", average_precision(corr_raw, corr_positives)}};
    }

    const RelativePoseStats stitched_stats = relative_pose_stats(stitched_poses, gt_poses);
    const RelativePoseStats top1_stats = relative_pose_stats(top1_poses, gt_poses);
    out["pose"] = {{"count", stitched_stats.count},
                   {"top1", pose_stats_json(top1_stats)},
                   {"stitched", pose_stats_json(stitched_stats)}};

    if (options.text) return render_text_report(out);
    return out.dump(2) + "\n";
}

std::string run_generate(const GenerateOptions& options, const std::string& out_dir) {
    if (options.scenes < 1) fail_invalid("generate: scene count must be >= 1");
    validate_noise(options.noise);

    RotationBinSet rotation_bins;
    TranslationBinSet translation_bins;
    if (options.bins_path) {
        std::tie(rotation_bins, translation_bins) = load_bin_sets(*options.bins_path);
    } else {
        const auto corpus =
            sample_pose_corpus(options.scene, options.corpus_size, mix_seed(options.seed, 0xb125));
        std::vector<UnitQuaternion> rotations;
        std::vector<Vec3> translations;
        rotations.reserve(corpus.size());
        translations.reserve(corpus.size());
        for (const auto& pose : corpus) {
            rotations.push_back(pose.rotation);
            translations.push_back(pose.translation);
        }
        ClusterOptions cluster;
        cluster.seed = mix_seed(options.seed, 0xc105);
        rotation_bins = spherical_kmeans_rotations(rotations, options.k_rot, cluster);
        translation_bins = kmeans_translations(translations, options.k_trans, cluster);
    }

    fs::create_directories(out_dir);

    SceneParams scene_params = options.scene;
    scene_params.duplicate_shape_prob = options.noise.duplicate_shape_prob;

    njson files = njson::array();
    for (int i = 0; i < options.scenes; ++i) {
        const std::uint64_t scene_seed = mix_seed(options.seed, 0x5eed, i);
        const GroundTruthScene gt = generate_scene(scene_params, scene_seed);
        const Observations obs =
            corrupt_to_observations(gt, options.noise, rotation_bins, translation_bins, scene_seed);

        ScenePair pair;
        pair.view1 = obs.view1;
        pair.view2 = obs.view2;
        pair.affinity = obs.affinity;
        pair.camera = obs.camera;
        pair.ground_truth = gt;

        char name[32];
        std::snprintf(name, sizeof(name), "scene_%04d.json", i);
        save_scene_pair(pair, (fs::path(out_dir) / name).string());
        files.push_back({{"file", name}, {"seed", scene_seed}});
    }

    njson manifest{{"version", 1},
                   {"seed", options.seed},
                   {"count", options.scenes},
                   {"files", std::move(files)}};
    const std::string text = manifest.dump(2) + "\n";
    write_text_file((fs::path(out_dir) / "manifest.json").string(), text);
    return text;
}

void run_cluster(const std::string& corpus_path, int k_rot, int k_trans, std::uint64_t seed,
                 const std::string& out_path) {
    const auto corpus = load_pose_corpus(corpus_path);
    std::vector<UnitQuaternion> rotations;
    std::vector<Vec3> translations;
    rotations.reserve(corpus.size());
    translations.reserve(corpus.size());
    for (const auto& pose : corpus) {
        rotations.push_back(pose.rotation);
        translations.push_back(pose.translation);
    }
    ClusterOptions options;
    options.seed = seed;
    const RotationBinSet rotation_bins = spherical_kmeans_rotations(rotations, k_rot, options);
    const TranslationBinSet translation_bins = kmeans_translations(translations, k_trans, options);
    save_bin_sets(rotation_bins, translation_bins, out_path);
}

}  // namespace stitch3d
