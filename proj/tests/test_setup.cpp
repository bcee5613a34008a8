#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gsmpm/errors.hpp"
#include "gsmpm/setup.hpp"
#include "support/testutil.hpp"

#include <set>

using namespace gsmpm;

namespace {

GaussianCloud cloud_at(const std::vector<Vec3>& positions) {
    GaussianCloud cloud;
    for (const Vec3& p : positions) {
        GaussianKernel k;
        k.position = p;
        cloud.kernels.push_back(k);
    }
    return cloud;
}

}  // namespace

TEST_CASE("lame parameters and validation bounds") {
    MaterialParams m;
    m.youngs_modulus = 1.0;
    m.poissons_ratio = 0.0;
    CHECK(m.mu() == doctest::Approx(0.5));
    CHECK(m.lambda() == doctest::Approx(0.0));

    m.poissons_ratio = 0.4995;
    CHECK_THROWS_AS(m.validate(), ValidationError);
    m.poissons_ratio = 0.6;
    CHECK_THROWS_AS(m.validate(), ValidationError);
    m.poissons_ratio = -1.0;
    CHECK_THROWS_AS(m.validate(), ValidationError);
    m.poissons_ratio = 0.3;
    m.density = 0.0;
    CHECK_THROWS_AS(m.validate(), ValidationError);
}

TEST_CASE("normalize_to_domain maps [-1,1]^3 with margin 0.1 to [0.1,0.9]^3") {
    const GaussianCloud cloud = cloud_at({Vec3(-1, -1, -1), Vec3(1, 1, 1)});
    auto [positions, tf] = normalize_to_domain(cloud, 0.1);
    CHECK(tf.scale == doctest::Approx(0.4));
    CHECK(positions[0].isApprox(Vec3::Constant(0.1), 1e-12));
    CHECK(positions[1].isApprox(Vec3::Constant(0.9), 1e-12));
}

TEST_CASE("normalize preserves aspect and centers") {
    // extent 2 x 1 x 0.5: x dominates
    const GaussianCloud cloud = cloud_at({Vec3(0, 0, 0), Vec3(2, 1, 0.5)});
    auto [positions, tf] = normalize_to_domain(cloud, 0.1);
    CHECK(tf.scale == doctest::Approx(0.4));
    CHECK((positions[0] + positions[1]).isApprox(Vec3::Ones(), 1e-12));  // centered pair
    CHECK((positions[1] - positions[0]).isApprox(Vec3(0.8, 0.4, 0.2), 1e-12));
}

TEST_CASE("transform round trip is the identity within 1e-9") {
    auto g = testutil::rng(31);
    const GaussianCloud cloud = testutil::random_cloud(g, 64);
    auto [positions, tf] = normalize_to_domain(cloud, 0.1);
    for (std::size_t i = 0; i < cloud.count(); ++i) {
        CHECK((tf.to_world(positions[i]) - cloud.kernels[i].position).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((tf.to_sim(tf.to_world(positions[i])) - positions[i]).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("degenerate single-point cloud sits at the domain center") {
    const GaussianCloud cloud = cloud_at({Vec3(42.0, -7.0, 3.0)});
    auto [positions, tf] = normalize_to_domain(cloud, 0.1);
    CHECK(tf.scale == 1.0);
    CHECK(positions[0].isApprox(Vec3::Constant(0.5), 1e-12));
}

TEST_CASE("empty cloud is rejected") {
    CHECK_THROWS_AS(normalize_to_domain(GaussianCloud{}, 0.1), ValidationError);
}

TEST_CASE("volume estimation by per-cell counting") {
    // 8 particles in one cell with dx = 1
    std::vector<Vec3> eight;
    for (int i = 0; i < 8; ++i) eight.push_back(Vec3(0.1 + 0.05 * i, 0.5, 0.5));
    for (double v : estimate_particle_volumes(eight, 1.0)) CHECK(v == doctest::Approx(0.125));

    // a particle alone in a cell with dx = 0.5
    const std::vector<double> lone = estimate_particle_volumes({Vec3(0.2, 0.2, 0.2)}, 0.5);
    CHECK(lone[0] == doctest::Approx(0.125));
}

TEST_CASE("volumes sum to occupied cells times cell volume") {
    auto g = testutil::rng(32);
    const double dx = 1.0 / 15.0;
    std::vector<Vec3> positions;
    std::set<std::tuple<int, int, int>> occupied;
    for (int i = 0; i < 500; ++i) {
        const Vec3 p(testutil::uniform(g, 0.1, 0.9), testutil::uniform(g, 0.1, 0.9),
                     testutil::uniform(g, 0.1, 0.9));
        positions.push_back(p);
        occupied.insert({static_cast<int>(std::floor(p.x() / dx)),
                         static_cast<int>(std::floor(p.y() / dx)),
                         static_cast<int>(std::floor(p.z() / dx))});
    }
    const std::vector<double> volumes = estimate_particle_volumes(positions, dx);
    double sum = 0.0;
    for (double v : volumes) {
        CHECK(v > 0.0);
        sum += v;
    }
    CHECK(sum == doctest::Approx(occupied.size() * dx * dx * dx).epsilon(1e-9));
}

TEST_CASE("init_particles composes setup and initializes kinematics") {
    auto g = testutil::rng(33);
    const GaussianCloud cloud = testutil::random_cloud(g, 200);
    MaterialParams material;
    material.density = 2.0;
    const ParticleSystem sys = init_particles(cloud, material, 1.0 / 63.0, 0.1);

    REQUIRE(sys.size() == cloud.count());
    CHECK(sys.time == 0.0);
    double mass_sum = 0.0, expected = 0.0;
    for (std::size_t p = 0; p < sys.size(); ++p) {
        CHECK(sys.v[p] == Vec3::Zero());
        CHECK(sys.F[p] == Mat3::Identity());
        CHECK(sys.C[p] == Mat3::Zero());
        CHECK(sys.mass[p] == material.density * sys.volume0[p]);  // bit-exact m = rho V
        // index alignment: particle p is the transformed kernel p
        CHECK((sys.x[p] - sys.transform.to_sim(cloud.kernels[p].position)).cwiseAbs().maxCoeff() ==
              0.0);
        mass_sum += sys.mass[p];
        expected += material.density * sys.volume0[p];
    }
    CHECK(mass_sum == expected);  // same summation order => bit-exact
}

TEST_CASE("m = rho V example") {
    // rho = 2 and V = 0.125 per particle: 8 particles in one unit cell
    GaussianCloud cloud;
    for (int i = 0; i < 8; ++i) {
        GaussianKernel k;
        k.position = Vec3(0.40 + 0.01 * i, 0.5, 0.5);
        cloud.kernels.push_back(k);
    }
    MaterialParams material;
    material.density = 2.0;
    const ParticleSystem sys = init_particles(cloud, material, 1.0, 0.1);
    for (std::size_t p = 0; p < sys.size(); ++p) {
        CHECK(sys.volume0[p] == doctest::Approx(0.125));
        CHECK(sys.mass[p] == doctest::Approx(0.25));
    }
}
