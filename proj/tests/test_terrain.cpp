#include <catch_amalgamated.hpp>

#include <random>

#include <slackhop/terrain.hpp>

using namespace slackhop;
using Catch::Approx;

TEST_CASE("flat terrain", "[terrain]") {
    TerrainProfile t;
    CHECK(height_at(t, 3.7) == 0.0);
    CHECK(discontinuities(t).empty());
}

TEST_CASE("step_down lowers the ground at the scheduled apex", "[terrain]") {
    TerrainProfile t;
    t.kind = TerrainKind::step_down;
    t.block_height = 0.15 * 0.310;
    CHECK(height_at(t, 0.0, 0) == Approx(0.0465));
    t.block_height = 0.047;
    CHECK(height_at(t, 0.0, t.removal_step - 1) == 0.047);
    CHECK(height_at(t, 0.0, t.removal_step) == 0.0);
    CHECK(height_at(t, 0.0, t.removal_step + 5) == 0.0);
    CHECK(discontinuities(t).empty());
}

TEST_CASE("sinusoid blocks and connector", "[terrain]") {
    TerrainProfile t;
    t.kind = TerrainKind::sinusoid;
    CHECK(height_at(t, t.wavelength / 4.0) == Approx(0.010));
    CHECK(height_at(t, 3.0 * t.wavelength / 4.0) == Approx(-0.010));
    const double block_end = 27 * 0.36;
    CHECK(height_at(t, block_end + 0.05) == 0.0);
    const auto d = discontinuities(t);
    REQUIRE(d.size() == 2);
    CHECK(d[0] == Approx(0.0));
    CHECK(d[1] == Approx(block_end));
    CHECK(t.connector_length() == Approx(two_pi * 1.613 - block_end));
}

TEST_CASE("sinusoid stays within its amplitude", "[terrain][property]") {
    TerrainProfile t;
    t.kind = TerrainKind::sinusoid;
    std::mt19937 rng(51);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 5000; ++i) CHECK(std::abs(height_at(t, u(rng))) <= t.amplitude + 1e-15);
}

TEST_CASE("ramp_step rises linearly and drops at its end", "[terrain]") {
    TerrainProfile t;
    t.kind = TerrainKind::ramp_step;
    t.start = 4.0;
    CHECK(height_at(t, 4.0 + 3.0 - 1e-9) == Approx(0.093).margin(1e-9));
    CHECK(height_at(t, 4.0 + 1.5) == Approx(0.0465));
    CHECK(height_at(t, 4.0 + 3.0 + 1e-9) == 0.0);
    CHECK(height_at(t, 3.9) == 0.0);
    const auto d = discontinuities(t);
    REQUIRE(d.size() == 1);
    CHECK(d[0] == Approx(7.0));
}

TEST_CASE("profiles repeat every track length", "[terrain][property]") {
    std::mt19937 rng(52);
    std::uniform_real_distribution<double> u(0.0, 20.0);
    for (TerrainKind k : {TerrainKind::sinusoid, TerrainKind::ramp_step}) {
        TerrainProfile t;
        t.kind = k;
        t.start = 1.3;
        for (int i = 0; i < 1000; ++i) {
            const double x = u(rng);
            CHECK(height_at(t, x + t.track_length) == Approx(height_at(t, x)).margin(1e-9));
            const double s = track_position(t, x);
            CHECK(s >= 0.0);
            CHECK(s < t.track_length);
        }
    }
}

TEST_CASE("terrain validation and names", "[terrain]") {
    TerrainProfile t;
    t.kind = TerrainKind::sinusoid;
    t.n_blocks = 40;
    CHECK_THROWS_AS(t.validate(), ConfigError);
    for (TerrainKind k : {TerrainKind::flat, TerrainKind::step_down, TerrainKind::sinusoid, TerrainKind::ramp_step})
        CHECK(terrain_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(terrain_kind_from_string("stairs"), ConfigError);
}
