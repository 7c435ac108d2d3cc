#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "stitch3d/evaluation.hpp"
#include "stitch3d/random.hpp"
#include "stitch3d/synthetic.hpp"

using namespace stitch3d;

namespace {

SceneObject box_at(const Vec3& translation, double score = 1.0, const char* category = nullptr) {
    SceneObject obj;
    obj.id = "o";
    obj.voxels = make_box_grid(16);
    obj.transform = SimilarityTransform(UnitQuaternion(), translation, Vec3(1, 1, 1));
    obj.score = score;
    if (category) obj.category = category;
    return obj;
}

DetectionRecord record(double confidence, bool tp) {
    DetectionRecord r;
    r.confidence = confidence;
    r.trans_ok = r.scale_ok = r.rot_ok = r.shape_ok = tp;
    return r;
}

}  // namespace

TEST_CASE("match_and_score examples") {
    SUBCASE("identical prediction passes every gate") {
        const auto records = match_and_score({box_at(Vec3(1, 2, 0))}, {box_at(Vec3(1, 2, 0))});
        REQUIRE(records.size() == 1);
        CHECK(records[0].trans_ok);
        CHECK(records[0].scale_ok);
        CHECK(records[0].rot_ok);
        CHECK(records[0].shape_ok);
        CHECK(records[0].is_true_positive());
    }

    SUBCASE("2 m translation offset fails only the translation gate") {
        const auto records = match_and_score({box_at(Vec3(2, 0, 0))}, {box_at(Vec3(0, 0, 0))});
        REQUIRE(records.size() == 1);
        CHECK_FALSE(records[0].trans_ok);
        CHECK(records[0].scale_ok);
        CHECK(records[0].rot_ok);
        CHECK(records[0].shape_ok);
        CHECK_FALSE(records[0].is_true_positive());
    }

    SUBCASE("two predictions claiming one object: the confident one wins") {
        const auto records = match_and_score(
            {box_at(Vec3(0.1, 0, 0), 0.6), box_at(Vec3(0, 0, 0), 0.9)}, {box_at(Vec3(0, 0, 0))});
        REQUIRE(records.size() == 2);
        // Records come back in confidence order: 0.9 first.
        CHECK(records[0].confidence == doctest::Approx(0.9));
        CHECK(records[0].is_true_positive());
        CHECK_FALSE(records[1].is_true_positive());
        CHECK_FALSE(records[1].trans_ok);  // nothing left to match
    }

    SUBCASE("categories restrict matching when both sides carry them") {
        const auto records = match_and_score({box_at(Vec3(0, 0, 0), 1.0, "table")},
                                             {box_at(Vec3(0, 0, 0), 1.0, "box")});
        REQUIRE(records.size() == 1);
        CHECK_FALSE(records[0].is_true_positive());

        const auto untyped = match_and_score({box_at(Vec3(0, 0, 0), 1.0, "table")},
                                             {box_at(Vec3(0, 0, 0))});
        CHECK(untyped[0].is_true_positive());  // one side untyped: compatible
    }

    SUBCASE("true positives never exceed the ground-truth count") {
        Rng rng(51);
        std::vector<SceneObject> preds, gts;
        for (int i = 0; i < 6; ++i) {
            preds.push_back(box_at(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 0),
                                   rng.uniform(0.2, 1.0)));
        }
        for (int i = 0; i < 2; ++i) gts.push_back(box_at(Vec3(rng.uniform(-1, 1), 0, 0)));
        const auto records = match_and_score(preds, gts);
        REQUIRE(records.size() == preds.size());
        int tp = 0;
        for (const auto& r : records) tp += r.is_true_positive() ? 1 : 0;
        CHECK(tp <= 2);
    }
}

TEST_CASE("average precision examples") {
    SUBCASE("single true positive over one object scores 1") {
        CHECK(average_precision({record(0.8, true)}, 1) == doctest::Approx(1.0));
    }
    SUBCASE("single false positive scores 0") {
        CHECK(average_precision({record(0.8, false)}, 1) == doctest::Approx(0.0));
    }
    SUBCASE("TP, FP, TP at confidences 0.9, 0.8, 0.7 with 2 objects") {
        const std::vector<DetectionRecord> records{record(0.9, true), record(0.8, false),
                                                   record(0.7, true)};
        // Envelope interpolation: 0.5 * 1 + 0.5 * (2/3) = 5/6.
        const double expected = oracle::average_precision_naive(records, 2);
        CHECK(expected == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
        CHECK(average_precision(records, 2) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("zero ground truth is rejected") {
        CHECK_THROWS_AS(average_precision({record(0.9, true)}, 0), Error);
    }
    SUBCASE("no records scores 0") { CHECK(average_precision({}, 3) == doctest::Approx(0.0)); }
}

TEST_CASE("average precision agrees with the brute-force oracle") {
    Rng rng(52);
    for (int trial = 0; trial < 100; ++trial) {
        const int count = 1 + static_cast<int>(rng.below(20));
        const int num_gt = 1 + static_cast<int>(rng.below(10));
        std::vector<DetectionRecord> records;
        int tp_budget = num_gt;
        for (int i = 0; i < count; ++i) {
            // Duplicated confidences exercise the tie-break path.
            const double conf = rng.bernoulli(0.3) ? 0.5 : rng.uniform();
            const bool tp = tp_budget > 0 && rng.bernoulli(0.5);
            if (tp) --tp_budget;
            records.push_back(record(conf, tp));
        }
        const double fast = average_precision(records, num_gt);
        const double slow = oracle::average_precision_naive(records, num_gt);
        CHECK(std::abs(fast - slow) < 1e-12);
        CHECK(fast >= 0.0);
        CHECK(fast <= 1.0);
    }
}

TEST_CASE("AP is 1 exactly when every TP outranks every FP and all objects are found") {
    const std::vector<DetectionRecord> perfect{record(0.9, true), record(0.8, true),
                                               record(0.7, false)};
    CHECK(average_precision(perfect, 2) == doctest::Approx(1.0));

    const std::vector<DetectionRecord> swapped{record(0.9, true), record(0.8, false),
                                               record(0.7, true)};
    CHECK(average_precision(swapped, 2) < 1.0);

    const std::vector<DetectionRecord> missing{record(0.9, true)};
    CHECK(average_precision(missing, 2) < 1.0);
}

TEST_CASE("AP is invariant under strictly monotone confidence transforms") {
    Rng rng(53);
    std::vector<DetectionRecord> records;
    for (int i = 0; i < 30; ++i) records.push_back(record(rng.uniform(), rng.bernoulli(0.4)));
    const double base = average_precision(records, 12);
    std::vector<DetectionRecord> squashed = records;
    for (auto& r : squashed) r.confidence = 1.0 / (1.0 + std::exp(-7.0 * r.confidence));
    CHECK(average_precision(squashed, 12) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("per-metric AP uses the requested gate only") {
    DetectionRecord r;
    r.confidence = 0.9;
    r.trans_ok = true;
    r.scale_ok = false;
    r.rot_ok = true;
    r.shape_ok = true;
    CHECK(average_precision({r}, 1, DetectionCriterion::all) == doctest::Approx(0.0));
    CHECK(average_precision({r}, 1, DetectionCriterion::translation) == doctest::Approx(1.0));
    CHECK(average_precision({r}, 1, DetectionCriterion::scale) == doctest::Approx(0.0));
    CHECK(average_precision({r}, 1, DetectionCriterion::rotation) == doctest::Approx(1.0));
    CHECK(average_precision({r}, 1, DetectionCriterion::shape) == doctest::Approx(1.0));
}

TEST_CASE("correspondence confidence gamma reweighting") {
    const AffinityMatrix a(2, 2, {0.9, 0.8, 0.3, 0.4});
    SUBCASE("predicted pairs keep their affinity") {
        const auto conf = correspondence_confidence(a, Correspondence({{0, 0}}));
        CHECK(conf[0] == doctest::Approx(0.9));
        CHECK(conf[1] == doctest::Approx(0.4));  // halved
        CHECK(conf[2] == doctest::Approx(0.15));
        CHECK(conf[3] == doctest::Approx(0.2));
    }
    SUBCASE("empty prediction halves the whole matrix") {
        const auto conf = correspondence_confidence(a, Correspondence());
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                CHECK(conf[i * 2 + j] == 0.5 * a.at(i, j));  // exact
            }
        }
    }
}

TEST_CASE("correspondence AP") {
    SUBCASE("indicator confidences give AP 1") {
        const Correspondence gt({{0, 1}, {1, 0}});
        const std::vector<double> conf{0.0, 1.0, 1.0, 0.0};
        CHECK(correspondence_ap(conf, 2, 2, gt) == doctest::Approx(1.0));
    }
    SUBCASE("uniform confidences rank by row-major order") {
        // 10 pairs, single positive. First position: AP 1; last: AP 0.1.
        std::vector<double> conf(10, 0.5);
        CHECK(correspondence_ap(conf, 2, 5, Correspondence({{0, 0}})) == doctest::Approx(1.0));
        CHECK(correspondence_ap(conf, 2, 5, Correspondence({{1, 4}})) == doctest::Approx(0.1));
    }
    SUBCASE("no positives is an error") {
        CHECK_THROWS_AS(correspondence_ap(std::vector<double>(4, 0.5), 2, 2, Correspondence()),
                        Error);
    }
}

TEST_CASE("relative pose stats") {
    const RigidPose identity;
    PoseHypothesis exact;

    SUBCASE("exact predictions: zero medians, 100% within") {
        const auto stats = relative_pose_stats({exact, exact}, {identity, identity});
        CHECK(stats.translation.median == doctest::Approx(0.0));
        CHECK(stats.translation.frac_within == doctest::Approx(1.0));
        CHECK(stats.rotation.median == doctest::Approx(0.0));
        CHECK(stats.rotation.frac_within == doctest::Approx(1.0));
    }

    SUBCASE("errors 0.5 and 1.5 m: median 1.0, half within 1 m") {
        PoseHypothesis near = exact, far = exact;
        near.translation = Vec3(0.5, 0, 0);
        far.translation = Vec3(1.5, 0, 0);
        const auto stats = relative_pose_stats({near, far}, {identity, identity});
        CHECK(stats.translation.median == doctest::Approx(1.0));
        CHECK(stats.translation.mean == doctest::Approx(1.0));
        CHECK(stats.translation.frac_within == doctest::Approx(0.5));
    }

    SUBCASE("a single 45-degree rotation error is outside the 30-degree gate") {
        PoseHypothesis pred = exact;
        pred.rotation = UnitQuaternion::from_axis_angle(Vec3(0, 1, 0), M_PI / 4);
        const auto stats = relative_pose_stats({pred}, {identity});
        CHECK(stats.rotation.frac_within == doctest::Approx(0.0));
        CHECK(stats.rotation.median == doctest::Approx(M_PI / 4));
    }

    SUBCASE("length mismatch is rejected") {
        CHECK_THROWS_AS(relative_pose_stats({exact}, {identity, identity}), Error);
    }
}
