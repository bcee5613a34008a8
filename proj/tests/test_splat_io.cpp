#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gsmpm/errors.hpp"
#include "gsmpm/splat_io.hpp"
#include "support/testutil.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

using namespace gsmpm;

namespace {

void append_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint8_t buf[4];
    std::memcpy(buf, &v, 4);
    out.insert(out.end(), buf, buf + 4);
}

// Canonical-layout PLY built independently of the writer.
std::vector<std::uint8_t> build_ply(const std::vector<RawGaussianRecord>& records) {
    std::string header =
        "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(records.size()) +
        "\nproperty float x\nproperty float y\nproperty float z\nproperty float f_dc_0\n"
        "property float f_dc_1\nproperty float f_dc_2\nproperty float opacity\n"
        "property float scale_0\nproperty float scale_1\nproperty float scale_2\n"
        "property float rot_0\nproperty float rot_1\nproperty float rot_2\nproperty float rot_3\n"
        "end_header\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    for (const RawGaussianRecord& r : records) {
        for (float v : r.position) append_f32(bytes, v);
        for (float v : r.f_dc) append_f32(bytes, v);
        append_f32(bytes, r.opacity_logit);
        for (float v : r.log_scales) append_f32(bytes, v);
        for (float v : r.rotation_q) append_f32(bytes, v);
    }
    return bytes;
}

RawGaussianRecord random_raw(std::mt19937_64& g) {
    RawGaussianRecord r;
    for (float& v : r.position) v = static_cast<float>(testutil::uniform(g, -50, 50));
    for (float& v : r.f_dc) v = static_cast<float>(testutil::uniform(g, -3, 3));
    r.opacity_logit = static_cast<float>(testutil::uniform(g, -30, 30));
    for (float& v : r.log_scales) v = static_cast<float>(testutil::uniform(g, -12, 4));
    for (float& v : r.rotation_q) v = static_cast<float>(testutil::uniform(g, -1, 1));
    if (std::abs(r.rotation_q[0]) + std::abs(r.rotation_q[1]) + std::abs(r.rotation_q[2]) +
            std::abs(r.rotation_q[3]) < 1e-3f) {
        r.rotation_q[0] = 1.0f;
    }
    return r;
}

}  // namespace

TEST_CASE("activation of zero logits") {
    RawGaussianRecord raw;  // zero logits, identity quaternion
    const GaussianKernel k = activate_record(raw);
    CHECK(k.opacity == doctest::Approx(0.5));
    CHECK(k.scales.isApprox(Vec3::Ones(), 1e-15));
    CHECK(k.color.isApprox(Vec3::Constant(0.5), 1e-15));
    CHECK(k.rotation.w == doctest::Approx(1.0));
}

TEST_CASE("activation normalizes the stored quaternion") {
    RawGaussianRecord raw;
    raw.rotation_q[0] = 2.0f;
    const GaussianKernel k = activate_record(raw);
    CHECK(k.rotation.w == doctest::Approx(1.0));
    CHECK(k.rotation.x == 0.0);
}

TEST_CASE("activation rejects zero-norm quaternions and non-finite fields") {
    RawGaussianRecord raw;
    raw.rotation_q[0] = 0.0f;
    CHECK_THROWS_AS(activate_record(raw), ValidationError);

    RawGaussianRecord nan_scale;
    nan_scale.log_scales[1] = std::nanf("");
    CHECK_THROWS_AS(activate_record(nan_scale), ValidationError);

    RawGaussianRecord inf_opacity;
    inf_opacity.opacity_logit = std::numeric_limits<float>::infinity();
    CHECK_THROWS_AS(activate_record(inf_opacity), ValidationError);
}

TEST_CASE("single-vertex parse applies activations") {
    RawGaussianRecord raw;  // zero logits
    const GaussianCloud cloud = parse_gaussian_ply(build_ply({raw}));
    REQUIRE(cloud.count() == 1);
    CHECK(cloud.kernels[0].opacity == doctest::Approx(0.5));
    CHECK(cloud.kernels[0].scales.isApprox(Vec3::Ones(), 1e-15));
    CHECK(cloud.kernels[0].color.isApprox(Vec3::Constant(0.5), 1e-15));
}

TEST_CASE("write(parse(B)) == B byte-exactly for canonical files") {
    auto g = testutil::rng(21);
    std::vector<RawGaussianRecord> records;
    for (int i = 0; i < 200; ++i) records.push_back(random_raw(g));
    const std::vector<std::uint8_t> original = build_ply(records);

    const GaussianCloud cloud = parse_gaussian_ply(original);
    const std::vector<std::uint8_t> rewritten = write_gaussian_ply(cloud);
    REQUIRE(rewritten.size() == original.size());
    CHECK(std::memcmp(rewritten.data(), original.data(), original.size()) == 0);
}

TEST_CASE("parse(write(C)) reproduces activated kernels within 1e-6") {
    auto g = testutil::rng(22);
    GaussianCloud cloud = testutil::random_cloud(g, 150);  // programmatic: no raw records
    const GaussianCloud back = parse_gaussian_ply(write_gaussian_ply(cloud));
    REQUIRE(back.count() == cloud.count());
    for (std::size_t i = 0; i < cloud.count(); ++i) {
        const GaussianKernel& a = cloud.kernels[i];
        const GaussianKernel& b = back.kernels[i];
        CHECK((a.position - b.position).cwiseAbs().maxCoeff() < 1e-6 * (1 + a.position.norm()));
        CHECK(std::abs(a.opacity - b.opacity) < 1e-6);
        CHECK((a.scales - b.scales).cwiseAbs().maxCoeff() < 1e-6 * a.scales.maxCoeff());
        CHECK((a.color - b.color).cwiseAbs().maxCoeff() < 1e-6);
        const double qdot = a.rotation.w * b.rotation.w + a.rotation.x * b.rotation.x +
                            a.rotation.y * b.rotation.y + a.rotation.z * b.rotation.z;
        CHECK(std::abs(qdot) > 1.0 - 1e-9);  // equal up to sign
    }
}

TEST_CASE("parsing preserves vertex order") {
    std::vector<RawGaussianRecord> records(16);
    for (int i = 0; i < 16; ++i) records[i].position[0] = static_cast<float>(i);
    const GaussianCloud cloud = parse_gaussian_ply(build_ply(records));
    for (int i = 0; i < 16; ++i) CHECK(cloud.kernels[i].position.x() == doctest::Approx(i));
}

TEST_CASE("extra properties are skipped with correct stride") {
    // Layout: x y z nx ny nz f_dc_0..2 f_rest_0 opacity scale_0..2 rot_0..3
    std::string header =
        "ply\nformat binary_little_endian 1.0\ncomment generated elsewhere\nelement vertex 2\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property float nx\nproperty float ny\nproperty float nz\n"
        "property float f_dc_0\nproperty float f_dc_1\nproperty float f_dc_2\n"
        "property float f_rest_0\n"
        "property float opacity\n"
        "property float scale_0\nproperty float scale_1\nproperty float scale_2\n"
        "property float rot_0\nproperty float rot_1\nproperty float rot_2\nproperty float rot_3\n"
        "end_header\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    for (int rec = 0; rec < 2; ++rec) {
        append_f32(bytes, 1.0f + rec);  // x
        append_f32(bytes, 2.0f);        // y
        append_f32(bytes, 3.0f);        // z
        append_f32(bytes, 9.0f);        // nx (skipped)
        append_f32(bytes, 9.0f);        // ny
        append_f32(bytes, 9.0f);        // nz
        for (int i = 0; i < 3; ++i) append_f32(bytes, 0.0f);  // f_dc
        append_f32(bytes, 7.0f);                              // f_rest_0 (skipped)
        append_f32(bytes, 0.0f);                              // opacity
        for (int i = 0; i < 3; ++i) append_f32(bytes, 0.0f);  // scales
        append_f32(bytes, 1.0f);                              // rot_0
        for (int i = 0; i < 3; ++i) append_f32(bytes, 0.0f);  // rot_1..3
    }
    const GaussianCloud cloud = parse_gaussian_ply(bytes);
    REQUIRE(cloud.count() == 2);
    CHECK(cloud.kernels[0].position.x() == doctest::Approx(1.0));
    CHECK(cloud.kernels[1].position.x() == doctest::Approx(2.0));
    CHECK(cloud.kernels[0].opacity == doctest::Approx(0.5));

    // extras never re-emitted: canonical file is smaller
    CHECK(write_gaussian_ply(cloud).size() < bytes.size());
}

TEST_CASE("truncated body yields a length error") {
    RawGaussianRecord raw;
    std::vector<std::uint8_t> bytes = build_ply({raw, raw});
    // claim 10 vertices but provide only 2
    const std::string from = "element vertex 2";
    const std::string to = "element vertex 10";
    std::string text(bytes.begin(), bytes.end());
    text.replace(text.find(from), from.size(), to);
    std::vector<std::uint8_t> truncated(text.begin(), text.end());
    CHECK_THROWS_WITH_AS(parse_gaussian_ply(truncated),
                         doctest::Contains("truncated"), ParseError);
}

TEST_CASE("trailing bytes yield a length error") {
    RawGaussianRecord raw;
    std::vector<std::uint8_t> bytes = build_ply({raw});
    bytes.push_back(0);
    CHECK_THROWS_WITH_AS(parse_gaussian_ply(bytes), doctest::Contains("trailing"), ParseError);
}

TEST_CASE("malformed header names the offending line") {
    const std::string text = "ply\nformat ascii 1.0\nelement vertex 0\nend_header\n";
    std::vector<std::uint8_t> bytes(text.begin(), text.end());
    CHECK_THROWS_WITH_AS(parse_gaussian_ply(bytes), doctest::Contains("line 2"), ParseError);
}

TEST_CASE("missing required property is a schema error listing the name") {
    std::string header =
        "ply\nformat binary_little_endian 1.0\nelement vertex 0\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property float f_dc_0\nproperty float f_dc_1\nproperty float f_dc_2\n"
        "property float opacity\n"
        "property float scale_0\nproperty float scale_2\n"  // scale_1 missing
        "property float rot_0\nproperty float rot_1\nproperty float rot_2\nproperty float rot_3\n"
        "end_header\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    CHECK_THROWS_WITH_AS(parse_gaussian_ply(bytes), doctest::Contains("scale_1"), ParseError);
}

TEST_CASE("empty cloud round trips as a valid zero-vertex PLY") {
    GaussianCloud empty;
    const std::vector<std::uint8_t> bytes = write_gaussian_ply(empty);
    const GaussianCloud back = parse_gaussian_ply(bytes);
    CHECK(back.count() == 0);
}

TEST_CASE("deactivation inverts activations") {
    GaussianKernel k;
    k.scales = Vec3::Ones();
    const RawGaussianRecord raw = deactivate_kernel(k);
    CHECK(raw.log_scales[0] == 0.0f);
    CHECK(raw.log_scales[1] == 0.0f);
    CHECK(raw.log_scales[2] == 0.0f);

    // opacity 0 and 1 clamp rather than produce infinities
    GaussianKernel opaque;
    opaque.opacity = 1.0;
    CHECK(std::isfinite(deactivate_kernel(opaque).opacity_logit));
    GaussianKernel clear;
    clear.opacity = 0.0;
    CHECK(std::isfinite(deactivate_kernel(clear).opacity_logit));
    CHECK(activate_record(deactivate_kernel(clear)).opacity == doctest::Approx(1e-6));
}

TEST_CASE("write refuses non-finite kernels") {
    GaussianCloud cloud;
    GaussianKernel k;
    k.position.x() = std::numeric_limits<double>::quiet_NaN();
    cloud.kernels.push_back(k);
    CHECK_THROWS_AS(write_gaussian_ply(cloud), ValidationError);
}

TEST_CASE("covariance of parsed kernels is symmetric positive definite") {
    auto g = testutil::rng(23);
    std::vector<RawGaussianRecord> records;
    for (int i = 0; i < 100; ++i) records.push_back(random_raw(g));
    const GaussianCloud cloud = parse_gaussian_ply(build_ply(records));
    for (const GaussianKernel& k : cloud.kernels) {
        const Mat3 sigma = k.covariance();
        CHECK((sigma - sigma.transpose()).cwiseAbs().maxCoeff() < 1e-9 * sigma.norm() + 1e-300);
        Eigen::SelfAdjointEigenSolver<Mat3> solver(sigma);
        CHECK(solver.eigenvalues().minCoeff() > 0.0);
    }
}
