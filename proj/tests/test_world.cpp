#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "uavmec/world.hpp"

using namespace uavmec;
using namespace uavmec::world;

namespace {
const Rect kUnitKm{0.0, 0.0, 1000.0, 1000.0};
}

TEST_CASE("advance_uav axis-aligned move") {
    Vec2 p = advance_uav({500, 500}, M_PI / 2.0, 100.0, 150.0, kUnitKm);
    CHECK(p.x == doctest::Approx(500.0));
    CHECK(p.y == doctest::Approx(600.0));
}

TEST_CASE("advance_uav identity at zero distance") {
    Vec2 p = advance_uav({500, 500}, 0.0, 0.0, 150.0, kUnitKm);
    CHECK(p.x == 500.0);
    CHECK(p.y == 500.0);
}

TEST_CASE("advance_uav clips to the region boundary") {
    Vec2 p = advance_uav({950, 500}, 0.0, 100.0, 150.0, kUnitKm);
    CHECK(p.x == 1000.0);
    CHECK(p.y == 500.0);
}

TEST_CASE("advance_uav rejects out-of-range distances") {
    CHECK_THROWS_AS(advance_uav({500, 500}, 0.0, -1.0, 150.0, kUnitKm), std::invalid_argument);
    CHECK_THROWS_AS(advance_uav({500, 500}, 0.0, 151.0, 150.0, kUnitKm), std::invalid_argument);
}

TEST_CASE("advance_uav stays inside the sub-region for random inputs") {
    Rng rng(71);
    const Rect region{250.0, 0.0, 500.0, 250.0};
    Vec2 pos = region.center();
    for (int i = 0; i < 20000; ++i) {
        pos = advance_uav(pos, rng.uniform(0.0, 2.0 * M_PI), rng.uniform(0.0, 150.0), 150.0,
                          region);
        REQUIRE(region.contains(pos));
    }
}

TEST_CASE("propulsion_power at hover equals blade plus induced power") {
    RotorParams rotor;
    CHECK(propulsion_power(0.0, rotor) ==
          doctest::Approx(rotor.blade_profile_power_w + rotor.induced_power_w).epsilon(1e-12));
    CHECK(propulsion_power(0.0, rotor) == doctest::Approx(168.4842).epsilon(1e-9));
}

TEST_CASE("propulsion_power matches the reference evaluation") {
    RotorParams rotor;
    // Frozen from the long double reference (oracles::propulsion_power).
    CHECK(propulsion_power(10.0, rotor) ==
          doctest::Approx(126.029074066392274).epsilon(1e-9));

    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.uniform(0.0, 60.0);
        const double expected = static_cast<double>(oracles::propulsion_power(
            v, rotor.blade_profile_power_w, rotor.induced_power_w, rotor.tip_speed_m_s,
            rotor.mean_induced_velocity_m_s, rotor.fuselage_drag_ratio, rotor.air_density_kg_m3,
            rotor.rotor_solidity, rotor.rotor_disc_area_m2));
        REQUIRE(propulsion_power(v, rotor) == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("propulsion_power has an interior minimum below hover power") {
    RotorParams rotor;
    const double hover = propulsion_power(0.0, rotor);
    double best_v = 0.0;
    double best_p = hover;
    for (double v = 0.0; v <= 30.0; v += 0.01) {
        const double p = propulsion_power(v, rotor);
        REQUIRE(p > 0.0);
        if (p < best_p) {
            best_p = p;
            best_v = v;
        }
    }
    CHECK(best_v > 0.0);
    CHECK(best_p < hover);
}

TEST_CASE("propulsion_power approaches the cubic parasite regime") {
    RotorParams rotor;
    const double ratio = propulsion_power(400.0, rotor) / propulsion_power(200.0, rotor);
    CHECK(ratio > 7.5);
    CHECK(ratio < 8.5);
}

TEST_CASE("generate_tasks samples inside the configured ranges") {
    TaskRanges ranges;
    Rng rng(11);
    int checked = 0;
    while (checked < 1000000) {
        auto tasks = generate_tasks(rng, 1000, ranges);
        for (const TaskSpec& t : tasks) {
            REQUIRE(t.size_bits >= ranges.size_bits_min);
            REQUIRE(t.size_bits <= ranges.size_bits_max);
            REQUIRE(t.cycles_per_bit >= ranges.cycles_per_bit_min);
            REQUIRE(t.cycles_per_bit <= ranges.cycles_per_bit_max);
            REQUIRE(t.deadline_s >= ranges.deadline_s_min);
            REQUIRE(t.deadline_s <= ranges.deadline_s_max);
        }
        checked += 1000;
    }
}

TEST_CASE("generate_tasks degenerate range collapses") {
    TaskRanges ranges;
    ranges.size_bits_min = ranges.size_bits_max = 2e6;
    Rng rng(3);
    for (const TaskSpec& t : generate_tasks(rng, 100, ranges)) CHECK(t.size_bits == 2e6);
}

TEST_CASE("generate_tasks is deterministic under a fixed seed") {
    TaskRanges ranges;
    Rng a(42), b(42);
    auto ta = generate_tasks(a, 50, ranges);
    auto tb = generate_tasks(b, 50, ranges);
    for (std::size_t i = 0; i < ta.size(); ++i) {
        CHECK(ta[i].size_bits == tb[i].size_bits);
        CHECK(ta[i].cycles_per_bit == tb[i].cycles_per_bit);
        CHECK(ta[i].deadline_s == tb[i].deadline_s);
    }
}

TEST_CASE("generate_tasks rejects inverted ranges") {
    TaskRanges ranges;
    ranges.deadline_s_min = 5.0;
    ranges.deadline_s_max = 1.0;
    Rng rng(1);
    CHECK_THROWS_AS(generate_tasks(rng, 1, ranges), ConfigError);
}

TEST_CASE("associate keeps the nearest S devices") {
    std::vector<Vec2> sd_xy = {{100, 0}, {50, 0}, {20, 0}, {80, 0}, {60, 0}};
    std::vector<int> ids = {0, 1, 2, 3, 4};
    auto served = associate({0, 0}, ids, sd_xy, 250.0, 3);
    CHECK(served == std::vector<int>{2, 1, 4});
}

TEST_CASE("associate returns empty when nothing is in range") {
    std::vector<Vec2> sd_xy = {{400, 0}, {0, 500}};
    std::vector<int> ids = {0, 1};
    CHECK(associate({0, 0}, ids, sd_xy, 250.0, 3).empty());
}

TEST_CASE("associate breaks distance ties by lower index") {
    std::vector<Vec2> sd_xy = {{10, 0}, {0, 30}, {30, 0}, {0, 30}};
    std::vector<int> ids = {0, 1, 2, 3};
    // SDs 1 and 3 are equidistant and compete for the last slot.
    auto served = associate({0, 0}, ids, sd_xy, 250.0, 2);
    CHECK(served == std::vector<int>{0, 1});
}

TEST_CASE("associate respects coverage and cap for random layouts") {
    Rng rng(9);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<Vec2> sd_xy;
        std::vector<int> ids;
        for (int m = 0; m < 40; ++m) {
            sd_xy.push_back({rng.uniform(0.0, 500.0), rng.uniform(0.0, 500.0)});
            ids.push_back(m);
        }
        const Vec2 uav{rng.uniform(0.0, 500.0), rng.uniform(0.0, 500.0)};
        auto served = associate(uav, ids, sd_xy, 120.0, 5);
        REQUIRE(served.size() <= 5);
        double prev = -1.0;
        for (int id : served) {
            const double d = distance(uav, sd_xy[id]);
            REQUIRE(d <= 120.0);
            REQUIRE(d >= prev);
            prev = d;
        }
    }
}

TEST_CASE("world config invariants are enforced") {
    WorldConfig cfg;
    cfg.grid_rows = 3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = WorldConfig{};
    cfg.altitude_m = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = WorldConfig{};
    cfg.num_peer_uavs_observed = 4;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_NOTHROW(WorldConfig{}.validate());
}

TEST_CASE("subregion grid covers the area row-major") {
    WorldConfig cfg;
    CHECK(cfg.subregion(0).center().x == doctest::Approx(250.0));
    CHECK(cfg.subregion(0).center().y == doctest::Approx(250.0));
    CHECK(cfg.subregion(1).center().x == doctest::Approx(750.0));
    CHECK(cfg.subregion(1).center().y == doctest::Approx(250.0));
    CHECK(cfg.subregion(2).center().x == doctest::Approx(250.0));
    CHECK(cfg.subregion(2).center().y == doctest::Approx(750.0));
    CHECK(cfg.subregion(3).center().x == doctest::Approx(750.0));
    CHECK(cfg.subregion(3).center().y == doctest::Approx(750.0));
}
