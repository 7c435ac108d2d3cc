#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "stitch3d/geometry.hpp"
#include "stitch3d/kdtree.hpp"
#include "stitch3d/random.hpp"

using namespace stitch3d;

namespace {

UnitQuaternion random_rotation(Rng& rng) {
    // Uniform on SO(3) via normalized Gaussian 4-vector.
    return UnitQuaternion(rng.normal(), rng.normal(), rng.normal(), rng.normal());
}

Vec3 random_vec(Rng& rng, double scale = 1.0) {
    return Vec3(rng.normal(), rng.normal(), rng.normal()) * scale;
}

PointCloud random_cloud(Rng& rng, int count, double scale = 1.0) {
    PointCloud c;
    for (int i = 0; i < count; ++i) c.points.push_back(random_vec(rng, scale));
    return c;
}

}  // namespace

TEST_CASE("unit quaternion normalizes and canonicalizes") {
    const UnitQuaternion q(-2.0, 0.0, 0.0, 0.0);
    CHECK(q.w() == doctest::Approx(1.0));

    const UnitQuaternion r(0.0, -1.0, 0.0, 0.0);
    CHECK(r.x() == doctest::Approx(1.0));  // w == 0: first nonzero made positive

    Rng rng(11);
    for (int i = 0; i < 50; ++i) {
        const UnitQuaternion a = random_rotation(rng);
        const double norm = std::sqrt(a.w() * a.w() + a.x() * a.x() + a.y() * a.y() + a.z() * a.z());
        CHECK(std::abs(norm - 1.0) < 1e-9);
        CHECK(a.w() >= 0.0);
    }

    CHECK_THROWS_AS(UnitQuaternion(0.0, 0.0, 0.0, 0.0), Error);
}

TEST_CASE("quaternion rotation matches matrix rotation") {
    Rng rng(12);
    for (int i = 0; i < 50; ++i) {
        const UnitQuaternion q = random_rotation(rng);
        const Vec3 p = random_vec(rng);
        CHECK((q.rotate(p) - q.matrix() * p).norm() < 1e-12);
    }
}

TEST_CASE("apply_transform examples") {
    const PointCloud cloud{{Vec3(0.2, -1.0, 3.0), Vec3(1.0, 2.0, 3.0)}};

    SUBCASE("identity maps any cloud to itself") {
        const PointCloud out = apply_transform(SimilarityTransform(), cloud);
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
            CHECK((out.points[i] - cloud.points[i]).norm() == doctest::Approx(0.0));
        }
    }

    SUBCASE("pure translation") {
        const SimilarityTransform t(UnitQuaternion(), Vec3(1, 0, 0), Vec3(1, 1, 1));
        CHECK((t.apply(Vec3(0, 0, 0)) - Vec3(1, 0, 0)).norm() == doctest::Approx(0.0));
    }

    SUBCASE("scale then rotate: (1,0,0) -> scale 2 -> rot_z(90deg) -> (0,2,0)") {
        const SimilarityTransform t(UnitQuaternion::from_axis_angle(Vec3(0, 0, 1), M_PI / 2),
                                    Vec3(0, 0, 0), Vec3(2, 2, 2));
        CHECK((t.apply(Vec3(1, 0, 0)) - Vec3(0, 2, 0)).norm() < 1e-12);
    }
}

TEST_CASE("apply_transform preserves count and distinctness") {
    Rng rng(13);
    const SimilarityTransform t(random_rotation(rng), random_vec(rng),
                                Vec3(0.5, 1.5, 2.5));
    const PointCloud cloud = random_cloud(rng, 40);
    const PointCloud out = apply_transform(t, cloud);
    REQUIRE(out.size() == cloud.size());
    std::set<std::pair<double, double>> seen;
    for (const auto& p : out.points) seen.insert({p.x(), p.y()});
    CHECK(seen.size() == out.size());
}

TEST_CASE("compose: identity outer behaves as inner") {
    Rng rng(14);
    const SimilarityTransform t(random_rotation(rng), random_vec(rng), Vec3(1.2, 0.7, 2.0));
    const ComposedTransform c = compose(SimilarityTransform(), t);
    for (int i = 0; i < 100; ++i) {
        const Vec3 p = random_vec(rng);
        CHECK((c.apply(p) - t.apply(p)).norm() < 1e-12);
    }
}

TEST_CASE("compose with inverse behaves as identity") {
    Rng rng(15);
    // Isotropic scale keeps the inverse representable.
    const SimilarityTransform t(random_rotation(rng), random_vec(rng), Vec3(1.7, 1.7, 1.7));
    const auto inv = t.inverse();
    REQUIRE(inv.has_value());
    const ComposedTransform c = compose(t, *inv);
    for (int i = 0; i < 100; ++i) {
        const Vec3 p = random_vec(rng);
        CHECK((c.apply(p) - p).norm() < 1e-9);
    }
}

TEST_CASE("rigid composition matches 4x4 matrix product oracle") {
    Rng rng(16);
    for (int i = 0; i < 20; ++i) {
        const SimilarityTransform a(random_rotation(rng), random_vec(rng), Vec3(1, 1, 1));
        const SimilarityTransform b(random_rotation(rng), random_vec(rng), Vec3(1, 1, 1));
        const auto factored = compose(a, b).factored();
        REQUIRE(factored.has_value());
        const Eigen::Matrix4d expected = oracle::homogeneous(a) * oracle::homogeneous(b);
        const Eigen::Matrix4d actual = oracle::homogeneous(*factored);
        CHECK((expected - actual).norm() < 1e-9);

        const Vec3 p(1, 2, 3);
        const Eigen::Vector4d hp(1, 2, 3, 1);
        CHECK((factored->apply(p) - (expected * hp).head<3>()).norm() < 1e-9);
    }
}

TEST_CASE("compose factorization fails for anisotropic scale under a generic rotation") {
    const SimilarityTransform outer(UnitQuaternion(), Vec3(0, 0, 0), Vec3(1, 2, 3));
    const SimilarityTransform inner(UnitQuaternion::from_axis_angle(Vec3(1, 1, 0), 0.7),
                                    Vec3(0, 0, 0), Vec3(1, 1, 1));
    CHECK_FALSE(compose(outer, inner).factored().has_value());

    // The operator form still composes pointwise.
    const ComposedTransform c = compose(outer, inner);
    Rng rng(17);
    for (int i = 0; i < 20; ++i) {
        const Vec3 p = random_vec(rng);
        CHECK((c.apply(p) - outer.apply(inner.apply(p))).norm() < 1e-12);
    }

    // Axis-aligned inner rotation brings it back.
    const SimilarityTransform aligned(UnitQuaternion::from_axis_angle(Vec3(0, 0, 1), M_PI / 2),
                                      Vec3(0, 0, 0), Vec3(1, 1, 1));
    CHECK(compose(outer, aligned).factored().has_value());
}

TEST_CASE("compose_rigid agrees with the generic factorization") {
    Rng rng(18);
    for (int i = 0; i < 20; ++i) {
        const RigidPose pose{random_rotation(rng), random_vec(rng)};
        const SimilarityTransform inner(random_rotation(rng), random_vec(rng), Vec3(0.5, 1.0, 2.0));
        const SimilarityTransform fast = compose_rigid(pose, inner);
        const auto slow = compose(SimilarityTransform::from_rigid(pose), inner).factored();
        REQUIRE(slow.has_value());
        for (int k = 0; k < 10; ++k) {
            const Vec3 p = random_vec(rng);
            CHECK((fast.apply(p) - slow->apply(p)).norm() < 1e-9);
        }
    }
}

TEST_CASE("voxel edge extraction") {
    SUBCASE("empty grid is an error") {
        CHECK_THROWS_AS(voxels_to_edge_points(VoxelGrid(4), 0.5, 1.0, 100, 0), Error);
    }

    SUBCASE("single center cell of a 3-grid maps to the origin") {
        VoxelGrid grid(3);
        grid.set(1, 1, 1, 1.0);
        const PointCloud cloud = voxels_to_edge_points(grid, 0.5, 1.0, 100, 0);
        REQUIRE(cloud.size() == 1);
        CHECK(cloud.points[0].norm() < 1e-12);
    }

    SUBCASE("solid 4-cube inside an 8-grid exposes 56 boundary cells") {
        VoxelGrid grid(8);
        for (int x = 2; x < 6; ++x) {
            for (int y = 2; y < 6; ++y) {
                for (int z = 2; z < 6; ++z) grid.set(x, y, z, 1.0);
            }
        }
        const PointCloud cloud = voxels_to_edge_points(grid, 0.5, 1.0, 10000, 0);
        CHECK(cloud.size() == 56);  // 4^3 - 2^3
        CHECK(oracle::boundary_cells_naive(grid, 0.5).size() == 56);
    }

    SUBCASE("subsampling is deterministic and capped") {
        VoxelGrid grid(8);
        for (int x = 0; x < 8; ++x) {
            for (int y = 0; y < 8; ++y) {
                for (int z = 0; z < 8; ++z) grid.set(x, y, z, 1.0);
            }
        }
        const PointCloud a = voxels_to_edge_points(grid, 0.5, 1.0, 50, 7);
        const PointCloud b = voxels_to_edge_points(grid, 0.5, 1.0, 50, 7);
        const PointCloud c = voxels_to_edge_points(grid, 0.5, 1.0, 50, 8);
        REQUIRE(a.size() == 50);
        REQUIRE(b.size() == 50);
        bool same = true;
        for (std::size_t i = 0; i < a.size(); ++i) same &= a.points[i] == b.points[i];
        CHECK(same);
        bool all_equal = c.size() == a.size();
        if (all_equal) {
            all_equal = false;
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (a.points[i] != c.points[i]) all_equal = true;  // differs somewhere
            }
            CHECK(all_equal);
        }
    }

    SUBCASE("unit-cube frame spans [-0.5, 0.5]") {
        VoxelGrid grid(8);
        for (int x = 0; x < 8; ++x) {
            for (int y = 0; y < 8; ++y) {
                for (int z = 0; z < 8; ++z) grid.set(x, y, z, 1.0);
            }
        }
        const PointCloud cloud = edge_points_unit_cube(grid, EdgeExtraction{0.5, 10000, 0});
        for (const auto& p : cloud.points) {
            CHECK(p.cwiseAbs().maxCoeff() <= 0.5);
            CHECK(p.cwiseAbs().maxCoeff() >= 0.4375 - 1e-12);  // outermost cell centers
        }
    }
}

TEST_CASE("chamfer examples") {
    const PointCloud origin{{Vec3(0, 0, 0)}};
    const PointCloud unit_x{{Vec3(1, 0, 0)}};
    CHECK(chamfer(origin, origin) == doctest::Approx(0.0));
    CHECK(chamfer(origin, unit_x) == doctest::Approx(2.0));

    const PointCloud two{{Vec3(0, 0, 0), Vec3(2, 0, 0)}};
    CHECK(chamfer(two, origin) == doctest::Approx(2.0));  // (0+4)/2 + 0

    CHECK_THROWS_AS(chamfer(PointCloud{}, origin), Error);
}

TEST_CASE("chamfer properties") {
    Rng rng(19);
    for (int i = 0; i < 20; ++i) {
        const PointCloud x = random_cloud(rng, 30);
        const PointCloud y = random_cloud(rng, 25);
        const double d = chamfer(x, y);
        CHECK(d >= 0.0);
        CHECK(chamfer(y, x) == d);  // symmetric, exactly
        CHECK(chamfer(x, x) == 0.0);
        CHECK(d == doctest::Approx(oracle::chamfer_naive(x, y)).epsilon(1e-12));

        const RigidPose g{random_rotation(rng), random_vec(rng)};
        const SimilarityTransform gt = SimilarityTransform::from_rigid(g);
        CHECK(chamfer(apply_transform(gt, x), apply_transform(gt, y)) ==
              doctest::Approx(d).epsilon(1e-9));
    }
}

TEST_CASE("kd-tree nearest matches brute force") {
    Rng rng(20);
    const PointCloud cloud = random_cloud(rng, 500, 2.0);
    const KdTree3 tree(cloud);
    for (int i = 0; i < 200; ++i) {
        const Vec3 q = random_vec(rng, 2.5);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : cloud.points) best = std::min(best, (p - q).squaredNorm());
        CHECK(tree.nearest_sq(q) == doctest::Approx(best).epsilon(1e-15));
    }
}

TEST_CASE("chamfer_posed equals chamfer of transformed clouds") {
    Rng rng(21);
    for (int i = 0; i < 10; ++i) {
        const PointCloud x = random_cloud(rng, 60);
        const PointCloud y = random_cloud(rng, 45);
        const RigidPose pose{random_rotation(rng), random_vec(rng)};
        const IndexedCloud ix(x), iy(y);
        const double fast = chamfer_posed(ix, iy, pose);
        const double slow =
            chamfer(apply_transform(SimilarityTransform::from_rigid(pose), x), y);
        CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
    }
}

TEST_CASE("rotation geodesic examples and oracle") {
    const UnitQuaternion id;
    CHECK(rotation_geodesic(id, id) == doctest::Approx(0.0));

    Rng rng(22);
    const UnitQuaternion r1 = random_rotation(rng);
    const UnitQuaternion rz = UnitQuaternion::from_axis_angle(Vec3(0, 0, 1), M_PI / 2);
    CHECK(rotation_geodesic(r1, r1 * rz) == doctest::Approx(M_PI / 2).epsilon(1e-9));

    const UnitQuaternion rx = UnitQuaternion::from_axis_angle(Vec3(1, 0, 0), M_PI);
    CHECK(rotation_geodesic(r1, r1 * rx) == doctest::Approx(M_PI).epsilon(1e-9));

    for (int i = 0; i < 100; ++i) {
        const UnitQuaternion a = random_rotation(rng);
        const UnitQuaternion b = random_rotation(rng);
        CHECK(rotation_geodesic(a, b) ==
              doctest::Approx(oracle::geodesic_matrix_log(a, b)).epsilon(1e-6));
    }
}

TEST_CASE("rotation geodesic is a metric on the quotient") {
    Rng rng(23);
    for (int i = 0; i < 100; ++i) {
        const UnitQuaternion a = random_rotation(rng);
        const UnitQuaternion b = random_rotation(rng);
        const UnitQuaternion c = random_rotation(rng);
        CHECK(rotation_geodesic(a, a) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(rotation_geodesic(a, b) == doctest::Approx(rotation_geodesic(b, a)));
        CHECK(rotation_geodesic(a, c) <=
              rotation_geodesic(a, b) + rotation_geodesic(b, c) + 1e-9);
    }
}

TEST_CASE("scale error") {
    CHECK(scale_error(Vec3(1.3, 0.2, 7.0), Vec3(1.3, 0.2, 7.0)) == doctest::Approx(0.0));
    CHECK(scale_error(Vec3(2, 2, 2), Vec3(1, 1, 1)) == doctest::Approx(1.0));
    CHECK(scale_error(Vec3(1, 2, 1), Vec3(1, 1, 1)) == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(scale_error(Vec3(0, 1, 1), Vec3(1, 1, 1)), Error);
}

TEST_CASE("fscore examples") {
    const PointCloud x{{Vec3(0, 0, 0), Vec3(0.5, 0, 0)}};
    const PointCloud y{{Vec3(0, 0, 0)}};
    const double tau = 0.05;
    CHECK(fscore(y, y, tau) == doctest::Approx(1.0));
    CHECK(fscore(x, y, tau) == doctest::Approx(2.0 / 3.0));  // P=0.5, R=1

    const PointCloud far{{Vec3(10 * tau, 0, 0)}};
    CHECK(fscore(y, far, tau) == doctest::Approx(0.0));

    CHECK_THROWS_AS(fscore(PointCloud{}, y, tau), Error);
    CHECK_THROWS_AS(fscore(x, y, 0.0), Error);
}

TEST_CASE("fscore is monotone in tau and bounded") {
    Rng rng(24);
    const PointCloud x = random_cloud(rng, 40, 0.2);
    const PointCloud y = random_cloud(rng, 40, 0.2);
    double prev = -1.0;
    for (double tau = 0.01; tau < 1.0; tau *= 1.6) {
        const double f = fscore(x, y, tau);
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
        CHECK(f >= prev - 1e-12);
        prev = f;
    }
}

TEST_CASE("voxel grid validation") {
    CHECK_THROWS_AS(VoxelGrid(2, std::vector<double>(7, 0.0)), Error);
    CHECK_THROWS_AS(VoxelGrid(2, std::vector<double>(8, 1.5)), Error);
    CHECK_THROWS_AS(SimilarityTransform(UnitQuaternion(), Vec3(0, 0, 0), Vec3(1, -1, 1)), Error);
}
