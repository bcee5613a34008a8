#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gsmpm/errors.hpp"
#include "gsmpm/math3d.hpp"
#include "support/testutil.hpp"

#include <cmath>

using namespace gsmpm;

TEST_CASE("quaternion to matrix basics") {
    CHECK(quaternion_to_matrix({1, 0, 0, 0}).isApprox(Mat3::Identity(), 1e-15));

    const double s = std::sqrt(0.5);
    Mat3 rz90;
    rz90 << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    CHECK((quaternion_to_matrix({s, 0, 0, s}) - rz90).norm() < 1e-12);
}

TEST_CASE("rotation to quaternion: analytic cases") {
    const Quaternion qi = rotation_to_quaternion(Mat3::Identity());
    CHECK(qi.w == doctest::Approx(1.0));
    CHECK(std::abs(qi.x) + std::abs(qi.y) + std::abs(qi.z) < 1e-12);

    Mat3 rz90;
    rz90 << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    const Quaternion qz = rotation_to_quaternion(rz90);
    const double s = std::sqrt(0.5);
    CHECK(qz.w == doctest::Approx(s).epsilon(1e-12));
    CHECK(qz.z == doctest::Approx(s).epsilon(1e-12));
    CHECK(std::abs(qz.x) < 1e-12);
    CHECK(std::abs(qz.y) < 1e-12);

    // trace = -1 branch: 180 degrees about x
    Mat3 rx180 = Mat3::Identity();
    rx180(1, 1) = -1;
    rx180(2, 2) = -1;
    const Quaternion qx = rotation_to_quaternion(rx180);
    CHECK(std::abs(qx.w) < 1e-12);
    CHECK(qx.x == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rotation to quaternion rejects non-orthonormal input") {
    Mat3 bad = Mat3::Identity();
    bad(0, 0) = 1.5;
    CHECK_THROWS_AS(rotation_to_quaternion(bad), ValidationError);

    Mat3 reflection = Mat3::Identity();
    reflection(2, 2) = -1;  // det = -1
    CHECK_THROWS_AS(rotation_to_quaternion(reflection), ValidationError);
}

TEST_CASE("quaternion round trip over random rotations") {
    auto g = testutil::rng(11);
    for (int i = 0; i < 1000; ++i) {
        const Mat3 r = testutil::random_rotation(g);
        const Quaternion q = rotation_to_quaternion(r);
        CHECK(std::abs(q.norm() - 1.0) < 1e-9);
        CHECK(q.w >= 0.0);  // sign canonicalization
        CHECK((quaternion_to_matrix(q) - r).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("zero-norm quaternion cannot be normalized") {
    CHECK_THROWS_AS((Quaternion{0, 0, 0, 0}.normalized()), ValidationError);
}

TEST_CASE("polar decomposition identities") {
    Mat3 r, s;
    polar_decompose(Mat3::Identity(), r, s);
    CHECK(r.isApprox(Mat3::Identity(), 1e-14));
    CHECK(s.isApprox(Mat3::Identity(), 1e-14));

    auto g = testutil::rng(12);
    const Mat3 rot = testutil::random_rotation(g);
    polar_decompose(rot, r, s);
    CHECK((r - rot).norm() < 1e-12);
    CHECK((s - Mat3::Identity()).norm() < 1e-12);

    const Mat3 stretch = Vec3(2.0, 1.0, 1.0).asDiagonal();
    polar_decompose(stretch, r, s);
    CHECK(r.isApprox(Mat3::Identity(), 1e-12));
    CHECK(s.isApprox(stretch, 1e-12));
}

TEST_CASE("polar decomposition of random deformations") {
    auto g = testutil::rng(13);
    for (int i = 0; i < 500; ++i) {
        const Mat3 f = testutil::random_deformation(g, 0.2);
        Mat3 r, s;
        polar_decompose(f, r, s);
        CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-12);
        CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-10));
        CHECK((s - s.transpose()).norm() < 1e-12);
        CHECK((r * s - f).norm() < 1e-11 * f.norm() + 1e-13);
    }
}

TEST_CASE("polar decomposition requires det > 0") {
    Mat3 inverted = Mat3::Identity();
    inverted(0, 0) = -1;
    Mat3 r, s;
    CHECK_THROWS_AS(polar_decompose(inverted, r, s), ValidationError);
}

TEST_CASE("symmetric eigendecomposition conventions") {
    Mat3 q;
    Vec3 lam;

    sym_eigen_descending(Mat3::Identity(), q, lam);
    CHECK(q.isApprox(Mat3::Identity(), 1e-14));
    CHECK(lam.isApprox(Vec3::Ones(), 1e-14));

    sym_eigen_descending(Vec3(4.0, 1.0, 1.0).asDiagonal(), q, lam);
    CHECK(lam(0) == doctest::Approx(4.0));
    CHECK(lam(1) == doctest::Approx(1.0));
    CHECK(lam(2) == doctest::Approx(1.0));
    CHECK(q.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(q(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(q(0, 0) > 0.0);

    // descending order, det +1, reconstruction on random SPD input
    auto g = testutil::rng(14);
    for (int i = 0; i < 500; ++i) {
        const Mat3 sigma = testutil::random_spd(g, 1e6);
        sym_eigen_descending(sigma, q, lam);
        CHECK(lam(0) >= lam(1));
        CHECK(lam(1) >= lam(2));
        CHECK(lam(2) > 0.0);
        CHECK(q.determinant() == doctest::Approx(1.0).epsilon(1e-9));
        const Mat3 rebuilt = q * lam.asDiagonal() * q.transpose();
        CHECK((rebuilt - sigma).norm() < 1e-6 * sigma.norm());
    }
}

TEST_CASE("eigenvalue floor is applied and counted") {
    Mat3 q;
    Vec3 lam;
    int clamped = 0;
    sym_eigen_descending(Vec3(1.0, 1e-15, 1e-16).asDiagonal(), q, lam, 1e-12, &clamped);
    CHECK(clamped == 2);
    CHECK(lam(1) == 1e-12);
    CHECK(lam(2) == 1e-12);
}
