#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "search/serial.hpp"

using namespace search;

namespace {

Grid walled_grid() {
    // A full vertical wall separates start from goal.
    std::vector<bool> blocked(25, false);
    for (std::uint32_t y = 0; y < 5; ++y) blocked[std::size_t(2) * 5 + y] = true;
    return Grid(5, 5, Movement::FourWay, CostModel::Unit, std::move(blocked), 0, 4, 4, 4);
}

Grid trivial_grid() {
    return Grid(1, 1, Movement::FourWay, CostModel::Unit, {false}, 0, 0, 0, 0);
}

}  // namespace

TEST_CASE("astar: initial equals goal") {
    Grid g = trivial_grid();
    auto sol = astar(g);
    REQUIRE(sol.solved());
    CHECK(sol.cost == 0.0);
    CHECK(sol.path.size() == 1);
    CHECK(sol.stats.expansions == 0);  // goal popped before any expansion
}

TEST_CASE("astar equals Dijkstra on a 10x10 grid and 30 random instances") {
    Grid g10 = generate_grid(10, 10, 0.3, Movement::FourWay, CostModel::Unit, 1);
    CHECK(astar(g10).cost == oracle::grid_optimal_cost(g10));
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Grid g = generate_grid(20, 20, 0.35, Movement::FourWay, CostModel::Unit,
                               1000 + seed);
        auto sol = astar(g);
        REQUIRE(sol.solved());
        CHECK(sol.cost == oracle::grid_optimal_cost(g));
    }
}

TEST_CASE("astar: unreachable goal reports NoSolution") {
    Grid g = walled_grid();
    auto sol = astar(g);
    CHECK(sol.status == Status::NoSolution);
}

TEST_CASE("astar: node cap trips the memory budget") {
    Grid g = generate_grid(50, 50, 0.3, Movement::FourWay, CostModel::Unit, 3);
    Limits lim(1e9, 100);
    auto sol = astar(g, lim);
    CHECK(sol.status == Status::MemoryExceeded);
}

TEST_CASE("wastar: w=1 equals astar everywhere") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Grid g = generate_grid(25, 25, 0.35, Movement::FourWay, CostModel::Unit, seed);
        CHECK(wastar(g, 1.0).cost == astar(g).cost);
        CHECK(wastar(g, 1.0, DupMode::DropPerLikhachev).cost == astar(g).cost);
    }
}

TEST_CASE("wastar: solutions stay within the bound on 30 random 50x50 grids") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Grid g = generate_grid(50, 50, 0.35, Movement::FourWay, CostModel::Unit,
                               2000 + seed);
        const double opt = astar(g).cost;
        for (double w : {1.1, 1.2, 1.4, 1.8, 2.0, 3.0}) {
            for (DupMode dup : {DupMode::Reopen, DupMode::DropPerLikhachev}) {
                auto sol = wastar(g, w, dup);
                REQUIRE(sol.solved());
                CHECK(sol.cost <= w * opt + 1e-9);
            }
        }
    }
}

TEST_CASE("wastar DropPerLikhachev expands each state at most once") {
    Grid g = generate_grid(40, 40, 0.35, Movement::FourWay, CostModel::Unit, 77);
    Limits lim;
    auto sol = wastar(g, 2.0, DupMode::DropPerLikhachev, lim);
    REQUIRE(sol.solved());
    CHECK(sol.stats.reexpansions == 0);
    CHECK(sol.stats.expansions <= std::size_t(40) * 40);
}

TEST_CASE("optimistic: bound 1 is optimal; bounded on 50x50 grids") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Grid g = generate_grid(50, 50, 0.35, Movement::FourWay, CostModel::Unit,
                               3000 + seed);
        const double opt = astar(g).cost;
        CHECK(optimistic_search(g, 1.0).cost == opt);
        Limits lim;
        auto sol = optimistic_search(g, 1.4, 1.8, lim);
        REQUIRE(sol.solved());
        CHECK(sol.cost <= 1.4 * opt + 1e-9);
    }
}

TEST_CASE("optimistic: cheap proof when incumbent is already within bound") {
    // Open 6x1 corridor: the aggressive phase walks straight to the goal and
    // the incumbent equals optimal, so cleanup needs no extra expansions
    // beyond the proof check.
    std::vector<bool> blocked(6, false);
    Grid g(6, 1, Movement::FourWay, CostModel::Unit, std::move(blocked), 0, 0, 5, 0);
    Limits lim;
    auto sol = optimistic_search(g, 1.4, 1.8, lim);
    REQUIRE(sol.solved());
    CHECK(sol.cost == 5.0);
    CHECK(sol.stats.expansions <= 6);
}

TEST_CASE("anytime wastar: strictly decreasing trace, optimal at exhaustion") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Grid g = generate_grid(50, 50, 0.35, Movement::FourWay, CostModel::Unit,
                               4000 + seed);
        const double opt = astar(g).cost;
        Limits lim;
        auto sol = anytime_wastar(g, 2.0, nullptr, lim);
        REQUIRE(sol.solved());
        CHECK(sol.cost == opt);
        REQUIRE(!sol.stats.trace.empty());
        for (std::size_t i = 1; i < sol.stats.trace.size(); ++i)
            CHECK(sol.stats.trace[i].second < sol.stats.trace[i - 1].second);
        CHECK(sol.stats.trace.back().second == opt);
    }
}

TEST_CASE("anytime wastar with w=1 publishes exactly one incumbent") {
    Grid g = generate_grid(30, 30, 0.3, Movement::FourWay, CostModel::Unit, 8);
    Limits lim;
    auto sol = anytime_wastar(g, 1.0, nullptr, lim);
    REQUIRE(sol.solved());
    CHECK(sol.stats.trace.size() == 1);
    CHECK(sol.cost == astar(g).cost);
}

TEST_CASE("arastar: schedule {1.0} behaves as astar") {
    Grid g = generate_grid(30, 30, 0.35, Movement::FourWay, CostModel::Unit, 9);
    Limits lim;
    auto sol = arastar(g, {1.0}, nullptr, lim);
    REQUIRE(sol.solved());
    CHECK(sol.cost == astar(g).cost);
}

TEST_CASE("arastar: per-step w-admissibility on the paper schedule") {
    const std::vector<double> schedule{7.4, 4.2, 2.6, 1.9, 1.5, 1.3, 1.1, 1.0};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Grid g = generate_grid(40, 40, 0.35, Movement::FourWay, CostModel::Unit,
                               5000 + seed);
        const double opt = astar(g).cost;
        Limits lim;
        std::vector<double> pass_end;  // one entry per completed pass
        auto sol = arastar(
            g, schedule, [&](double, double cost) { pass_end.push_back(cost); }, lim);
        REQUIRE(sol.solved());
        CHECK(sol.cost == opt);
        REQUIRE(pass_end.size() == schedule.size());
        for (std::size_t i = 0; i < pass_end.size(); ++i)
            CHECK(pass_end[i] <= schedule[i] * opt + 1e-9);
        CHECK(pass_end.back() == opt);
    }
}

TEST_CASE("arastar: each state expanded at most once per weight pass") {
    Grid g = generate_grid(40, 40, 0.35, Movement::FourWay, CostModel::Unit, 55);
    Limits lim;
    const std::vector<double> schedule{3.0, 2.0, 1.0};
    auto sol = arastar(g, schedule, nullptr, lim);
    REQUIRE(sol.solved());
    // With 3 passes over <=1600 states, expansions cannot exceed 3 * states.
    CHECK(sol.stats.expansions <= 3u * 1600u);
    CHECK(sol.cost == astar(g).cost);
}

TEST_CASE("arastar rejects bad schedules") {
    Grid g = trivial_grid();
    Limits lim;
    CHECK_THROWS_AS(arastar(g, {2.0, 3.0, 1.0}, nullptr, lim), std::invalid_argument);
    CHECK_THROWS_AS(arastar(g, {2.0}, nullptr, lim), std::invalid_argument);
}

TEST_CASE("arastar trace is strictly decreasing") {
    Grid g = generate_grid(50, 50, 0.35, Movement::FourWay, CostModel::Unit, 321);
    const std::vector<double> schedule{3.0, 2.0, 1.5, 1.0};
    Limits lim;
    auto sol = arastar(g, schedule, nullptr, lim);
    REQUIRE(sol.solved());
    REQUIRE(!sol.stats.trace.empty());
    for (std::size_t i = 1; i < sol.stats.trace.size(); ++i)
        CHECK(sol.stats.trace[i].second < sol.stats.trace[i - 1].second);
    CHECK(sol.stats.trace.back().second == astar(g).cost);
}
