#include "stitch3d/scene_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace stitch3d {

using njson = nlohmann::ordered_json;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in.good() && !in.eof()) fail_io("error while reading " + path);
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_io("cannot open " + path + " for writing");
    out << text;
    if (!out.good()) fail_io("error while writing " + path);
}

// ---------------------------------------------------------------------------
// base64 and voxel bit packing

namespace {
constexpr char kB64Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    for (std::size_t i = 0; i < bytes.size(); i += 3) {
        std::uint32_t chunk = static_cast<std::uint32_t>(bytes[i]) << 16;
        if (i + 1 < bytes.size()) chunk |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
        if (i + 2 < bytes.size()) chunk |= bytes[i + 2];
        out.push_back(kB64Alphabet[(chunk >> 18) & 63]);
        out.push_back(kB64Alphabet[(chunk >> 12) & 63]);
        out.push_back(i + 1 < bytes.size() ? kB64Alphabet[(chunk >> 6) & 63] : '=');
        out.push_back(i + 2 < bytes.size() ? kB64Alphabet[chunk & 63] : '=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    if (text.size() % 4 != 0) fail_parse("base64: length must be a multiple of 4");
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=') {
                if (i + 4 != text.size() || k < 2) fail_parse("base64: misplaced padding");
                vals[k] = 0;
                ++pad;
            } else {
                if (pad > 0) fail_parse("base64: data after padding");
                vals[k] = value_of(c);
                if (vals[k] < 0) fail_parse("base64: invalid character");
            }
        }
        const std::uint32_t chunk = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
        out.push_back(static_cast<std::uint8_t>((chunk >> 16) & 0xff));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>((chunk >> 8) & 0xff));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(chunk & 0xff));
    }
    return out;
}

std::vector<std::uint8_t> pack_voxel_bits(const VoxelGrid& grid) {
    const std::size_t cells = grid.occupancy().size();
    std::vector<std::uint8_t> bytes((cells + 7) / 8, 0);
    for (std::size_t idx = 0; idx < cells; ++idx) {
        if (grid.occupancy()[idx] >= 0.5) {
            bytes[idx / 8] |= static_cast<std::uint8_t>(1u << (idx % 8));
        }
    }
    return bytes;
}

VoxelGrid unpack_voxel_bits(int resolution, const std::vector<std::uint8_t>& bytes) {
    if (resolution < 1) fail_parse("voxels: resolution must be positive");
    const std::size_t cells =
        static_cast<std::size_t>(resolution) * resolution * resolution;
    if (bytes.size() != (cells + 7) / 8) {
        fail_parse("voxels: payload is " + std::to_string(bytes.size()) + " bytes, expected " +
                   std::to_string((cells + 7) / 8));
    }
    std::vector<double> occupancy(cells, 0.0);
    for (std::size_t idx = 0; idx < cells; ++idx) {
        if (bytes[idx / 8] & (1u << (idx % 8))) occupancy[idx] = 1.0;
    }
    return VoxelGrid(resolution, std::move(occupancy));
}

// ---------------------------------------------------------------------------
// JSON helpers with field paths in error messages

namespace {

const njson& req(const njson& j, const char* key, const std::string& path) {
    if (!j.is_object()) fail_parse(path + ": expected an object");
    const auto it = j.find(key);
    if (it == j.end()) fail_parse(path + "." + key + ": missing");
    return *it;
}

double num(const njson& j, const std::string& path) {
    if (!j.is_number()) fail_parse(path + ": expected a number");
    return j.get<double>();
}

std::vector<double> num_array(const njson& j, std::size_t count, const std::string& path) {
    if (!j.is_array() || j.size() != count) {
        fail_parse(path + ": expected an array of " + std::to_string(count) + " numbers");
    }
    std::vector<double> out;
    out.reserve(count);
    for (const auto& v : j) {
        if (!v.is_number()) fail_parse(path + ": expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

Vec3 vec3_of(const njson& j, const std::string& path) {
    const auto v = num_array(j, 3, path);
    return Vec3(v[0], v[1], v[2]);
}

UnitQuaternion quat_of(const njson& j, const std::string& path) {
    const auto v = num_array(j, 4, path);
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
    if (std::abs(norm - 1.0) > 1e-3) {
        fail_parse(path + ": quaternion norm " + std::to_string(norm) + " is not unit");
    }
    return UnitQuaternion(v[0], v[1], v[2], v[3]);
}

njson quat_json(const UnitQuaternion& q) { return njson::array({q.w(), q.x(), q.y(), q.z()}); }

njson vec3_json(const Vec3& v) { return njson::array({v.x(), v.y(), v.z()}); }

njson object_json(const SceneObject& obj) {
    njson j;
    j["id"] = obj.id;
    j["score"] = obj.score;
    if (obj.category) j["category"] = *obj.category;
    j["voxels"] = {{"resolution", obj.voxels.resolution()},
                   {"encoding", "b64bits"},
                   {"data", base64_encode(pack_voxel_bits(obj.voxels))}};
    j["translation"] = vec3_json(obj.transform.translation());
    j["rotation_wxyz"] = quat_json(obj.transform.rotation());
    j["scale"] = vec3_json(obj.transform.scale());
    if (obj.embedding) {
        njson e = njson::array();
        for (int i = 0; i < obj.embedding->size(); ++i) e.push_back((*obj.embedding)[i]);
        j["embedding"] = e;
    }
    return j;
}

SceneObject object_of(const njson& j, const std::string& path) {
    SceneObject obj;
    const njson& id = req(j, "id", path);
    if (!id.is_string()) fail_parse(path + ".id: expected a string");
    obj.id = id.get<std::string>();

    obj.score = num(req(j, "score", path), path + ".score");
    if (!(obj.score >= 0.0 && obj.score <= 1.0)) {
        fail_parse(path + ".score: must lie in [0, 1]");
    }

    if (j.contains("category")) {
        if (!j["category"].is_string()) fail_parse(path + ".category: expected a string");
        obj.category = j["category"].get<std::string>();
    }

    const njson& vox = req(j, "voxels", path);
    const njson& enc = req(vox, "encoding", path + ".voxels");
    if (!enc.is_string() || enc.get<std::string>() != "b64bits") {
        fail_parse(path + ".voxels.encoding: expected \"b64bits\"");
    }
    const njson& res = req(vox, "resolution", path + ".voxels");
    if (!res.is_number_integer() || res.get<int>() < 1) {
        fail_parse(path + ".voxels.resolution: expected a positive integer");
    }
    const njson& data = req(vox, "data", path + ".voxels");
    if (!data.is_string()) fail_parse(path + ".voxels.data: expected a base64 string");
    try {
        obj.voxels = unpack_voxel_bits(res.get<int>(), base64_decode(data.get<std::string>()));
    } catch (const Error& e) {
        fail_parse(path + ".voxels.data: " + e.what());
    }

    const Vec3 t = vec3_of(req(j, "translation", path), path + ".translation");
    const UnitQuaternion r = quat_of(req(j, "rotation_wxyz", path), path + ".rotation_wxyz");
    const Vec3 s = vec3_of(req(j, "scale", path), path + ".scale");
    for (int i = 0; i < 3; ++i) {
        if (!(s[i] > 0.0)) fail_parse(path + ".scale: components must be positive");
    }
    obj.transform = SimilarityTransform(r, t, s);

    if (j.contains("embedding")) {
        const njson& e = j["embedding"];
        if (!e.is_array() || e.size() != 64) {
            fail_parse(path + ".embedding: expected 64 numbers");
        }
        Eigen::VectorXd vec(e.size());
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (!e[i].is_number()) fail_parse(path + ".embedding: expected numbers");
            vec[static_cast<int>(i)] = e[i].get<double>();
        }
        if (std::abs(vec.norm() - 1.0) > 1e-6) {
            fail_parse(path + ".embedding: norm " + std::to_string(vec.norm()) + " is not unit");
        }
        obj.embedding = std::move(vec);
    }
    return obj;
}

njson camera_json(const CameraPoseDistribution& dist) {
    njson rot = njson::array();
    for (std::size_t i = 0; i < dist.rotation_bins.centroids.size(); ++i) {
        rot.push_back({{"q_wxyz", quat_json(dist.rotation_bins.centroids[i])},
                       {"prob", dist.rotation_probs[i]}});
    }
    njson trans = njson::array();
    for (std::size_t i = 0; i < dist.translation_bins.centroids.size(); ++i) {
        trans.push_back({{"t", vec3_json(dist.translation_bins.centroids[i])},
                         {"prob", dist.translation_probs[i]}});
    }
    return njson{{"rotation_bins", rot}, {"translation_bins", trans}};
}

CameraPoseDistribution camera_of(const njson& j, const std::string& path) {
    CameraPoseDistribution dist;
    const njson& rot = req(j, "rotation_bins", path);
    if (!rot.is_array() || rot.empty()) fail_parse(path + ".rotation_bins: expected a non-empty array");
    for (std::size_t i = 0; i < rot.size(); ++i) {
        const std::string bp = path + ".rotation_bins[" + std::to_string(i) + "]";
        dist.rotation_bins.centroids.push_back(quat_of(req(rot[i], "q_wxyz", bp), bp + ".q_wxyz"));
        const double p = num(req(rot[i], "prob", bp), bp + ".prob");
        if (!(p >= 0.0)) fail_parse(bp + ".prob: must be non-negative");
        dist.rotation_probs.push_back(p);
    }
    const njson& trans = req(j, "translation_bins", path);
    if (!trans.is_array() || trans.empty()) {
        fail_parse(path + ".translation_bins: expected a non-empty array");
    }
    for (std::size_t i = 0; i < trans.size(); ++i) {
        const std::string bp = path + ".translation_bins[" + std::to_string(i) + "]";
        dist.translation_bins.centroids.push_back(vec3_of(req(trans[i], "t", bp), bp + ".t"));
        const double p = num(req(trans[i], "prob", bp), bp + ".prob");
        if (!(p >= 0.0)) fail_parse(bp + ".prob: must be non-negative");
        dist.translation_probs.push_back(p);
    }

    // Files tolerate 1e-6 drift in the sums; renormalize so the in-memory
    // distribution satisfies its tighter 1e-9 invariant. Sums already within
    // 1e-12 are left untouched, keeping parse -> write byte-stable.
    auto renormalize = [&](std::vector<double>& probs, const char* what) {
        double sum = 0.0;
        for (double p : probs) sum += p;
        if (std::abs(sum - 1.0) > 1e-6) {
            fail_parse(path + "." + what + ": probabilities sum to " + std::to_string(sum));
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            for (double& p : probs) p /= sum;
        }
    };
    renormalize(dist.rotation_probs, "rotation_bins");
    renormalize(dist.translation_probs, "translation_bins");
    validate_distribution(dist);
    return dist;
}

njson rigid_json(const RigidPose& pose) {
    return njson{{"rotation_wxyz", quat_json(pose.rotation)},
                 {"translation", vec3_json(pose.translation)}};
}

RigidPose rigid_of(const njson& j, const std::string& path) {
    return RigidPose{quat_of(req(j, "rotation_wxyz", path), path + ".rotation_wxyz"),
                     vec3_of(req(j, "translation", path), path + ".translation")};
}

std::vector<std::pair<int, int>> pairs_of(const njson& j, const std::string& path) {
    if (!j.is_array()) fail_parse(path + ": expected an array of [i, j] pairs");
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const njson& p = j[k];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
            !p[1].is_number_integer()) {
            fail_parse(path + "[" + std::to_string(k) + "]: expected [i, j] integers");
        }
        pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
    }
    return pairs;
}

njson pairs_json(const Correspondence& c) {
    njson out = njson::array();
    for (auto [i, j] : c.pairs()) out.push_back(njson::array({i, j}));
    return out;
}

njson ground_truth_json(const GroundTruthScene& gt) {
    njson j;
    njson objects = njson::array();
    for (const auto& obj : gt.objects) objects.push_back(object_json(obj));
    j["objects"] = std::move(objects);
    j["camera1"] = rigid_json(gt.camera1);
    j["camera2"] = rigid_json(gt.camera2);
    j["visibility"] = njson::array({njson(gt.visible1), njson(gt.visible2)});
    j["view_orders"] = njson::array({njson(gt.view1_order), njson(gt.view2_order)});
    j["model_ids"] = gt.model_ids;
    j["correspondence"] = pairs_json(gt.gt_correspondence);
    return j;
}

GroundTruthScene ground_truth_of(const njson& j, const std::string& path) {
    GroundTruthScene gt;
    const njson& objects = req(j, "objects", path);
    if (!objects.is_array()) fail_parse(path + ".objects: expected an array");
    for (std::size_t i = 0; i < objects.size(); ++i) {
        gt.objects.push_back(object_of(objects[i], path + ".objects[" + std::to_string(i) + "]"));
    }
    gt.camera1 = rigid_of(req(j, "camera1", path), path + ".camera1");
    gt.camera2 = rigid_of(req(j, "camera2", path), path + ".camera2");

    const njson& vis = req(j, "visibility", path);
    if (!vis.is_array() || vis.size() != 2) fail_parse(path + ".visibility: expected two arrays");
    auto bools_of = [&](const njson& a, const std::string& p) {
        if (!a.is_array() || a.size() != gt.objects.size()) {
            fail_parse(p + ": expected one flag per object");
        }
        std::vector<bool> out;
        for (const auto& v : a) {
            if (!v.is_boolean()) fail_parse(p + ": expected booleans");
            out.push_back(v.get<bool>());
        }
        return out;
    };
    gt.visible1 = bools_of(vis[0], path + ".visibility[0]");
    gt.visible2 = bools_of(vis[1], path + ".visibility[1]");

    const njson& orders = req(j, "view_orders", path);
    if (!orders.is_array() || orders.size() != 2) {
        fail_parse(path + ".view_orders: expected two arrays");
    }
    auto ints_of = [&](const njson& a, const std::string& p) {
        if (!a.is_array()) fail_parse(p + ": expected an integer array");
        std::vector<int> out;
        for (const auto& v : a) {
            if (!v.is_number_integer()) fail_parse(p + ": expected integers");
            const int idx = v.get<int>();
            if (idx < 0 || idx >= static_cast<int>(gt.objects.size())) {
                fail_parse(p + ": world index out of range");
            }
            out.push_back(idx);
        }
        return out;
    };
    gt.view1_order = ints_of(orders[0], path + ".view_orders[0]");
    gt.view2_order = ints_of(orders[1], path + ".view_orders[1]");

    const njson& models = req(j, "model_ids", path);
    if (!models.is_array() || models.size() != gt.objects.size()) {
        fail_parse(path + ".model_ids: expected one id per object");
    }
    for (const auto& v : models) {
        if (!v.is_number_integer()) fail_parse(path + ".model_ids: expected integers");
        gt.model_ids.push_back(v.get<int>());
    }

    try {
        gt.gt_correspondence =
            Correspondence(pairs_of(req(j, "correspondence", path), path + ".correspondence"));
    } catch (const Error& e) {
        fail_parse(path + ".correspondence: " + e.what());
    }
    return gt;
}

njson parse_json(const std::string& text) {
    njson j = njson::parse(text, nullptr, false);
    if (j.is_discarded()) fail_parse("malformed JSON");
    return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// scene-pair files

ScenePair parse_scene_pair(const std::string& json_text) {
    const njson j = parse_json(json_text);

    ScenePair pair;
    const njson& version = req(j, "version", "$");
    if (!version.is_number_integer()) fail_parse("$.version: expected an integer");
    pair.version = version.get<int>();

    const njson& views = req(j, "views", "$");
    if (!views.is_array() || views.size() != 2) {
        fail_parse("$.views: expected exactly two views");
    }
    auto view_of = [&](const njson& v, const std::string& path) {
        if (!v.is_array()) fail_parse(path + ": expected an array of objects");
        std::vector<SceneObject> objs;
        for (std::size_t i = 0; i < v.size(); ++i) {
            objs.push_back(object_of(v[i], path + "[" + std::to_string(i) + "]"));
        }
        return objs;
    };
    pair.view1 = view_of(views[0], "$.views[0]");
    pair.view2 = view_of(views[1], "$.views[1]");

    if (j.contains("affinity")) {
        const std::size_t n = pair.view1.size();
        const std::size_t m = pair.view2.size();
        const auto values = num_array(j["affinity"], n * m, "$.affinity");
        for (double v : values) {
            if (!(v >= 0.0 && v <= 1.0)) fail_parse("$.affinity: entries must lie in [0, 1]");
        }
        pair.affinity = AffinityMatrix(static_cast<int>(n), static_cast<int>(m), values);
    }

    pair.camera = camera_of(req(j, "camera", "$"), "$.camera");

    if (j.contains("ground_truth")) {
        pair.ground_truth = ground_truth_of(j["ground_truth"], "$.ground_truth");
    }
    return pair;
}

ScenePair load_scene_pair(const std::string& path) {
    try {
        return parse_scene_pair(read_text_file(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::io) throw;
        throw Error(e.code(), path + ": " + e.what());
    }
}

std::string write_scene_pair(const ScenePair& pair) {
    njson j;
    j["version"] = pair.version;
    njson v1 = njson::array();
    for (const auto& o : pair.view1) v1.push_back(object_json(o));
    njson v2 = njson::array();
    for (const auto& o : pair.view2) v2.push_back(object_json(o));
    j["views"] = njson::array({std::move(v1), std::move(v2)});
    if (pair.affinity) j["affinity"] = pair.affinity->values();
    j["camera"] = camera_json(pair.camera);
    if (pair.ground_truth) j["ground_truth"] = ground_truth_json(*pair.ground_truth);
    return j.dump(2) + "\n";
}

void save_scene_pair(const ScenePair& pair, const std::string& path) {
    write_text_file(path, write_scene_pair(pair));
}

// ---------------------------------------------------------------------------
// stitch reports

std::string write_stitch_report(const StitchReport& report) {
    const StitchResult& r = report.result;
    njson j;
    j["version"] = report.version;
    j["pose"] = {{"rotation_wxyz", quat_json(r.pose.rotation)},
                 {"translation", vec3_json(r.pose.translation)},
                 {"rotation_prob", r.pose.rotation_prob},
                 {"translation_prob", r.pose.translation_prob},
                 {"rotation_bin", r.pose.rotation_bin},
                 {"translation_bin", r.pose.translation_bin}};
    j["correspondence"] = pairs_json(r.correspondence);
    j["objective"] = r.objective;
    j["terms"] = {{"distance", r.terms.distance},
                  {"pose_rot", r.terms.pose_rot},
                  {"pose_trans", r.terms.pose_trans},
                  {"similarity", r.terms.similarity},
                  {"unmatched", r.terms.unmatched}};
    j["weighted_terms"] = {{"distance", r.terms.distance},
                           {"pose_rot", report.weights.lambda_p_rot * r.terms.pose_rot},
                           {"pose_trans", report.weights.lambda_p_trans * r.terms.pose_trans},
                           {"similarity", report.weights.lambda_s * r.terms.similarity},
                           {"unmatched", report.weights.lambda_u * r.terms.unmatched}};
    j["weights"] = {{"lambda_s", report.weights.lambda_s},
                    {"lambda_u", report.weights.lambda_u},
                    {"lambda_p_rot", report.weights.lambda_p_rot},
                    {"lambda_p_trans", report.weights.lambda_p_trans},
                    {"k_samples", report.weights.k_samples},
                    {"affinity_threshold", report.weights.affinity_threshold}};
    njson merged = njson::array();
    for (const auto& o : r.merged) merged.push_back(object_json(o));
    j["merged"] = std::move(merged);
    j["seed"] = r.seed;
    j["wall_clock_sec"] = report.wall_clock_sec;
    return j.dump(2) + "\n";
}

StitchReport parse_stitch_report(const std::string& json_text) {
    const njson j = parse_json(json_text);
    StitchReport report;

    const njson& version = req(j, "version", "$");
    if (!version.is_number_integer()) fail_parse("$.version: expected an integer");
    report.version = version.get<int>();

    const njson& pose = req(j, "pose", "$");
    report.result.pose.rotation = quat_of(req(pose, "rotation_wxyz", "$.pose"), "$.pose.rotation_wxyz");
    report.result.pose.translation =
        vec3_of(req(pose, "translation", "$.pose"), "$.pose.translation");
    report.result.pose.rotation_prob = num(req(pose, "rotation_prob", "$.pose"), "$.pose.rotation_prob");
    report.result.pose.translation_prob =
        num(req(pose, "translation_prob", "$.pose"), "$.pose.translation_prob");
    report.result.pose.rotation_bin =
        static_cast<int>(num(req(pose, "rotation_bin", "$.pose"), "$.pose.rotation_bin"));
    report.result.pose.translation_bin =
        static_cast<int>(num(req(pose, "translation_bin", "$.pose"), "$.pose.translation_bin"));

    try {
        report.result.correspondence =
            Correspondence(pairs_of(req(j, "correspondence", "$"), "$.correspondence"));
    } catch (const Error& e) {
        fail_parse(std::string("$.correspondence: ") + e.what());
    }

    report.result.objective = num(req(j, "objective", "$"), "$.objective");
    const njson& terms = req(j, "terms", "$");
    report.result.terms.distance = num(req(terms, "distance", "$.terms"), "$.terms.distance");
    report.result.terms.pose_rot = num(req(terms, "pose_rot", "$.terms"), "$.terms.pose_rot");
    report.result.terms.pose_trans = num(req(terms, "pose_trans", "$.terms"), "$.terms.pose_trans");
    report.result.terms.similarity = num(req(terms, "similarity", "$.terms"), "$.terms.similarity");
    report.result.terms.unmatched = num(req(terms, "unmatched", "$.terms"), "$.terms.unmatched");

    const njson& weights = req(j, "weights", "$");
    report.weights.lambda_s = num(req(weights, "lambda_s", "$.weights"), "$.weights.lambda_s");
    report.weights.lambda_u = num(req(weights, "lambda_u", "$.weights"), "$.weights.lambda_u");
    report.weights.lambda_p_rot =
        num(req(weights, "lambda_p_rot", "$.weights"), "$.weights.lambda_p_rot");
    report.weights.lambda_p_trans =
        num(req(weights, "lambda_p_trans", "$.weights"), "$.weights.lambda_p_trans");
    report.weights.k_samples =
        static_cast<int>(num(req(weights, "k_samples", "$.weights"), "$.weights.k_samples"));
    report.weights.affinity_threshold =
        num(req(weights, "affinity_threshold", "$.weights"), "$.weights.affinity_threshold");

    const double expected = weighted_total(report.result.terms, report.weights);
    if (std::abs(expected - report.result.objective) > 1e-9) {
        fail_parse("$.objective: term breakdown sums to " + std::to_string(expected) +
                   ", not the stated objective");
    }

    const njson& merged = req(j, "merged", "$");
    if (!merged.is_array()) fail_parse("$.merged: expected an array");
    for (std::size_t i = 0; i < merged.size(); ++i) {
        report.result.merged.push_back(
            object_of(merged[i], "$.merged[" + std::to_string(i) + "]"));
    }

    const njson& seed = req(j, "seed", "$");
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
        fail_parse("$.seed: expected an integer");
    }
    report.result.seed = seed.get<std::uint64_t>();
    report.wall_clock_sec = num(req(j, "wall_clock_sec", "$"), "$.wall_clock_sec");
    return report;
}

StitchReport load_stitch_report(const std::string& path) {
    try {
        return parse_stitch_report(read_text_file(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::io) throw;
        throw Error(e.code(), path + ": " + e.what());
    }
}

void save_stitch_report(const StitchReport& report, const std::string& path) {
    write_text_file(path, write_stitch_report(report));
}

// ---------------------------------------------------------------------------
// bin sets and pose corpora

void save_bin_sets(const RotationBinSet& rotation, const TranslationBinSet& translation,
                   const std::string& path) {
    njson rot = njson::array();
    for (const auto& q : rotation.centroids) rot.push_back({{"q_wxyz", quat_json(q)}});
    njson trans = njson::array();
    for (const auto& t : translation.centroids) trans.push_back({{"t", vec3_json(t)}});
    write_text_file(path, njson{{"rotation_bins", rot}, {"translation_bins", trans}}.dump(2) + "\n");
}

std::pair<RotationBinSet, TranslationBinSet> load_bin_sets(const std::string& path) {
    const njson j = parse_json(read_text_file(path));
    RotationBinSet rotation;
    TranslationBinSet translation;
    const njson& rot = req(j, "rotation_bins", "$");
    if (!rot.is_array() || rot.empty()) fail_parse("$.rotation_bins: expected a non-empty array");
    for (std::size_t i = 0; i < rot.size(); ++i) {
        const std::string bp = "$.rotation_bins[" + std::to_string(i) + "]";
        rotation.centroids.push_back(quat_of(req(rot[i], "q_wxyz", bp), bp + ".q_wxyz"));
    }
    const njson& trans = req(j, "translation_bins", "$");
    if (!trans.is_array() || trans.empty()) {
        fail_parse("$.translation_bins: expected a non-empty array");
    }
    for (std::size_t i = 0; i < trans.size(); ++i) {
        const std::string bp = "$.translation_bins[" + std::to_string(i) + "]";
        translation.centroids.push_back(vec3_of(req(trans[i], "t", bp), bp + ".t"));
    }
    validate_bins(rotation);
    validate_bins(translation);
    return {std::move(rotation), std::move(translation)};
}

void save_pose_corpus(const std::vector<RigidPose>& poses, const std::string& path) {
    njson arr = njson::array();
    for (const auto& p : poses) arr.push_back(rigid_json(p));
    write_text_file(path, njson{{"poses", std::move(arr)}}.dump(2) + "\n");
}

std::vector<RigidPose> load_pose_corpus(const std::string& path) {
    const njson j = parse_json(read_text_file(path));
    const njson& poses = req(j, "poses", "$");
    if (!poses.is_array() || poses.empty()) fail_parse("$.poses: expected a non-empty array");
    std::vector<RigidPose> out;
    for (std::size_t i = 0; i < poses.size(); ++i) {
        out.push_back(rigid_of(poses[i], "$.poses[" + std::to_string(i) + "]"));
    }
    return out;
}

}  // namespace stitch3d
