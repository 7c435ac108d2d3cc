#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "stitch3d/random.hpp"
#include "stitch3d/stitcher.hpp"
#include "stitch3d/synthetic.hpp"

using namespace stitch3d;

namespace {

std::pair<RotationBinSet, TranslationBinSet> bins_from_corpus(const SceneParams& params, int k_rot,
                                                              int k_trans, int corpus_size,
                                                              std::uint64_t seed) {
    const auto corpus = sample_pose_corpus(params, corpus_size, seed);
    std::vector<UnitQuaternion> rotations;
    std::vector<Vec3> translations;
    for (const auto& pose : corpus) {
        rotations.push_back(pose.rotation);
        translations.push_back(pose.translation);
    }
    ClusterOptions options;
    options.seed = seed;
    return {spherical_kmeans_rotations(rotations, k_rot, options),
            kmeans_translations(translations, k_trans, options)};
}

}  // namespace

TEST_CASE("primitive shapes are non-empty binary grids") {
    for (const VoxelGrid& grid : {make_box_grid(16), make_lshape_grid(16), make_table_grid(16)}) {
        std::size_t occupied = 0;
        for (double v : grid.occupancy()) {
            CHECK((v == 0.0 || v == 1.0));
            occupied += v == 1.0;
        }
        CHECK(occupied > 0);
        CHECK(occupied < grid.occupancy().size());
    }
}

TEST_CASE("generate_scene satisfies the two-view filter") {
    SceneParams params;
    params.objects = 5;
    params.resolution = 16;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto scene = generate_scene(params, seed);
        REQUIRE(scene.objects.size() == 5);
        REQUIRE(scene.visible1.size() == 5);

        int shared = 0, only1 = 0, only2 = 0;
        for (std::size_t k = 0; k < scene.objects.size(); ++k) {
            if (scene.visible1[k] && scene.visible2[k]) ++shared;
            if (scene.visible1[k] && !scene.visible2[k]) ++only1;
            if (!scene.visible1[k] && scene.visible2[k]) ++only2;
        }
        CHECK(shared >= 1);
        // Neither view's set is a proper subset of the other.
        CHECK_FALSE((only1 == 0) != (only2 == 0));

        CHECK(scene.gt_correspondence.size() == shared);
        // Correspondence pairs world objects with themselves across views.
        for (auto [s1, s2] : scene.gt_correspondence.pairs()) {
            CHECK(scene.view1_order[s1] == scene.view2_order[s2]);
        }
    }
}

TEST_CASE("single-object scene has exactly one correspondence pair") {
    SceneParams params;
    params.objects = 1;
    params.resolution = 16;
    const auto scene = generate_scene(params, 3);
    CHECK(scene.gt_correspondence.size() == 1);
}

TEST_CASE("duplicate_shape_prob=1 duplicates voxel models") {
    SceneParams params;
    params.objects = 3;
    params.resolution = 16;
    params.duplicate_shape_prob = 1.0;
    const auto scene = generate_scene(params, 9);
    int identical = 0;
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            identical += scene.objects[i].voxels.occupancy() == scene.objects[j].voxels.occupancy();
        }
    }
    CHECK(identical >= 1);  // with prob 1 every later object copies an earlier one
    CHECK(scene.model_ids == std::vector<int>{0, 0, 0});

    // Duplicate instances get near-parallel embeddings: affinity alone
    // cannot tell them apart.
    SceneParams bin_params = params;
    const auto corpus = sample_pose_corpus(bin_params, 100, 1);
    std::vector<UnitQuaternion> rots;
    std::vector<Vec3> trans;
    for (const auto& p : corpus) {
        rots.push_back(p.rotation);
        trans.push_back(p.translation);
    }
    const auto rot_bins = spherical_kmeans_rotations(rots, 4, {1, 100});
    const auto trans_bins = kmeans_translations(trans, 4, {1, 100});
    const auto obs = corrupt_to_observations(scene, NoiseModel{}, rot_bins, trans_bins, 9);
    for (int i = 0; i < obs.affinity.rows(); ++i) {
        for (int j = 0; j < obs.affinity.cols(); ++j) {
            CHECK(obs.affinity.at(i, j) > 0.9);  // every pair looks like a match
        }
    }
}

TEST_CASE("generate_scene is deterministic given the seed") {
    SceneParams params;
    params.objects = 4;
    params.resolution = 16;
    const auto a = generate_scene(params, 77);
    const auto b = generate_scene(params, 77);
    REQUIRE(a.objects.size() == b.objects.size());
    for (std::size_t i = 0; i < a.objects.size(); ++i) {
        CHECK(a.objects[i].transform.translation() == b.objects[i].transform.translation());
        CHECK(a.objects[i].transform.rotation() == b.objects[i].transform.rotation());
    }
    CHECK(a.view1_order == b.view1_order);
    CHECK(a.gt_correspondence == b.gt_correspondence);
}

TEST_CASE("zero-noise observations reproduce exact affinities and the nearest bin") {
    SceneParams params;
    params.objects = 4;
    params.resolution = 16;
    const auto [rot_bins, trans_bins] = bins_from_corpus(params, 12, 24, 300, 5);

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto scene = generate_scene(params, seed);
        const auto obs = corrupt_to_observations(scene, NoiseModel{}, rot_bins, trans_bins, seed);

        REQUIRE(obs.view1.size() == scene.view1_order.size());
        REQUIRE(obs.view2.size() == scene.view2_order.size());
        REQUIRE(obs.affinity.rows() == static_cast<int>(obs.view1.size()));

        // Matching objects share a base embedding (dot 1); distinct models
        // sit on a regular simplex with pairwise dot -1/(g-1).
        const double sig5 = 1.0 / (1.0 + std::exp(-5.0));
        const double nonpair = 1.0 / (1.0 + std::exp(5.0 / (params.objects - 1)));
        for (int i = 0; i < obs.affinity.rows(); ++i) {
            for (int j = 0; j < obs.affinity.cols(); ++j) {
                const bool is_pair = scene.gt_correspondence.contains(i, j);
                if (is_pair) {
                    CHECK(obs.affinity.at(i, j) == doctest::Approx(sig5).epsilon(1e-9));
                } else {
                    CHECK(obs.affinity.at(i, j) == doctest::Approx(nonpair).epsilon(1e-9));
                    CHECK(obs.affinity.at(i, j) < 0.5);
                }
            }
        }

        // Top-1 bins quantize the true pose.
        const RigidPose truth = scene.relative_pose();
        const auto top = top_k_hypotheses(obs.camera, 1, 1).front();
        CHECK(top.rotation_bin == nearest_rotation_bin(rot_bins, truth.rotation));
        CHECK(top.translation_bin == nearest_translation_bin(trans_bins, truth.translation));

        // Object transforms are exact in their own camera frames.
        for (std::size_t slot = 0; slot < obs.view1.size(); ++slot) {
            const auto& world = scene.objects[scene.view1_order[slot]];
            const SimilarityTransform expected =
                compose_rigid(scene.camera1.inverse(), world.transform);
            CHECK((obs.view1[slot].transform.translation() - expected.translation()).norm() <
                  1e-12);
        }
    }
}

TEST_CASE("observation embeddings are unit and statistically separated") {
    SceneParams params;
    params.objects = 4;
    params.resolution = 16;
    const auto [rot_bins, trans_bins] = bins_from_corpus(params, 8, 12, 200, 6);

    NoiseModel noise;
    noise.embedding_noise = 0.4;

    double pair_sum = 0.0, nonpair_sum = 0.0;
    int pair_count = 0, nonpair_count = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto scene = generate_scene(params, seed);
        const auto obs = corrupt_to_observations(scene, noise, rot_bins, trans_bins, seed);
        for (const auto& o : obs.view1) {
            REQUIRE(o.embedding.has_value());
            CHECK(std::abs(o.embedding->norm() - 1.0) < 1e-9);
        }
        for (int i = 0; i < obs.affinity.rows(); ++i) {
            for (int j = 0; j < obs.affinity.cols(); ++j) {
                if (scene.gt_correspondence.contains(i, j)) {
                    pair_sum += obs.affinity.at(i, j);
                    ++pair_count;
                } else {
                    nonpair_sum += obs.affinity.at(i, j);
                    ++nonpair_count;
                }
            }
        }
    }
    REQUIRE(pair_count > 0);
    REQUIRE(nonpair_count > 0);
    CHECK(pair_sum / pair_count > nonpair_sum / nonpair_count + 0.2);
}

TEST_CASE("pose_top1_accuracy controls how often the true bin ranks first") {
    SceneParams params;
    params.objects = 2;
    params.resolution = 8;
    const auto [rot_bins, trans_bins] = bins_from_corpus(params, 10, 16, 200, 7);

    NoiseModel noise;
    noise.pose_top1_accuracy = 0.4;

    const auto scene = generate_scene(params, 11);
    const RigidPose truth = scene.relative_pose();
    const int true_rot = nearest_rotation_bin(rot_bins, truth.rotation);
    const int true_trans = nearest_translation_bin(trans_bins, truth.translation);

    int rot_hits = 0, trans_hits = 0;
    const int draws = 1000;
    for (int d = 0; d < draws; ++d) {
        const auto obs = corrupt_to_observations(scene, noise, rot_bins, trans_bins, 1000 + d);
        const auto top = top_k_hypotheses(obs.camera, 1, 1).front();
        rot_hits += top.rotation_bin == true_rot;
        trans_hits += top.translation_bin == true_trans;

        // The true bin is never ranked below second in either marginal.
        const auto top2r = top_k_hypotheses(obs.camera, 2, 1);
        CHECK((top2r[0].rotation_bin == true_rot || top2r[1].rotation_bin == true_rot));
    }
    CHECK(rot_hits / static_cast<double>(draws) == doctest::Approx(0.4).epsilon(0.1));
    CHECK(std::abs(rot_hits / static_cast<double>(draws) - 0.4) < 0.04);
    CHECK(std::abs(trans_hits / static_cast<double>(draws) - 0.4) < 0.04);
}

TEST_CASE("zero-noise round trip recovers the ground truth through solve") {
    SceneParams params;
    params.objects = 4;
    params.resolution = 16;
    const auto [rot_bins, trans_bins] = bins_from_corpus(params, 24, 48, 1500, 8);

    int recovered = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        const auto scene = generate_scene(params, 500 + t);
        const auto obs =
            corrupt_to_observations(scene, NoiseModel{}, rot_bins, trans_bins, 500 + t);

        SolveOptions options;
        options.k_rot = 3;
        options.k_trans = 10;
        options.seed = t;
        options.edge.max_points = 400;
        const auto result = solve(obs.view1, obs.view2, obs.affinity, obs.camera, options);

        const RigidPose truth = scene.relative_pose();
        const bool pose_ok =
            result.pose.rotation_bin == nearest_rotation_bin(rot_bins, truth.rotation) &&
            result.pose.translation_bin == nearest_translation_bin(trans_bins, truth.translation);
        const bool corr_ok = result.correspondence == scene.gt_correspondence;
        recovered += pose_ok && corr_ok;
    }
    CHECK(recovered >= trials - 2);  // the acceptance suite runs the strict version
}

TEST_CASE("observations are deterministic given the seed") {
    SceneParams params;
    params.objects = 3;
    params.resolution = 8;
    const auto [rot_bins, trans_bins] = bins_from_corpus(params, 6, 8, 100, 9);
    const auto scene = generate_scene(params, 21);
    NoiseModel noise;
    noise.trans_sigma = 0.1;
    noise.rot_sigma = 0.05;
    noise.embedding_noise = 0.2;
    noise.pose_top1_accuracy = 0.6;
    const auto a = corrupt_to_observations(scene, noise, rot_bins, trans_bins, 31);
    const auto b = corrupt_to_observations(scene, noise, rot_bins, trans_bins, 31);
    CHECK(a.affinity.values() == b.affinity.values());
    CHECK(a.camera.rotation_probs == b.camera.rotation_probs);
    for (std::size_t i = 0; i < a.view1.size(); ++i) {
        CHECK(a.view1[i].transform.translation() == b.view1[i].transform.translation());
    }
}

TEST_CASE("noise model validation") {
    NoiseModel bad;
    bad.pose_top1_accuracy = 1.5;
    CHECK_THROWS_AS(validate_noise(bad), Error);
    bad = NoiseModel{};
    bad.trans_sigma = -0.1;
    CHECK_THROWS_AS(validate_noise(bad), Error);
}
