#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unordered_map>

#include "oracles.hpp"
#include "search/psdd.hpp"
#include "search/serial.hpp"

using namespace search;

namespace {

// Independent serial breadth-first heuristic search: global FIFO layers,
// duplicate detection at generation, pruning f >= bound at expansion.
// Returns (best goal cost or inf, expansions).
std::pair<double, std::uint64_t> serial_bfhs(const Grid& g, double bound) {
    using Rec = std::pair<std::uint32_t, double>;  // state, g
    std::deque<Rec> cur, next;
    std::unordered_map<std::uint64_t, double> seen;
    double inc = oracle::kInf;
    std::uint64_t expansions = 0;
    cur.push_back({g.initial(), 0.0});
    seen[g.state_key(g.initial())] = 0.0;
    std::vector<std::pair<std::uint32_t, double>> succ;
    while (!cur.empty()) {
        while (!cur.empty()) {
            auto [s, gc] = cur.front();
            cur.pop_front();
            const double f = gc + g.h(s);
            if (f >= bound) continue;
            if (f >= inc) continue;
            if (g.is_goal(s)) {
                inc = std::min(inc, gc);
                continue;
            }
            expansions++;
            succ.clear();
            g.successors(s, succ);
            for (auto& [t, c] : succ) {
                auto it = seen.find(g.state_key(t));
                if (it == seen.end()) {
                    seen[g.state_key(t)] = gc + c;
                    next.push_back({t, gc + c});
                }
            }
        }
        cur.swap(next);
    }
    return {inc, expansions};
}

}  // namespace

TEST_CASE("psdd: bound = optimal + 1 matches astar on unit 50x50 grids") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Grid g = generate_grid(50, 50, 0.35, Movement::FourWay, CostModel::Unit,
                               2200 + seed);
        const double opt = astar(g).cost;
        for (int t : {1, 2, 4}) {
            auto sol = psdd_run(g, t, opt + 1.0);
            REQUIRE(sol.solved());
            CHECK(sol.cost == opt);
        }
    }
}

TEST_CASE("psdd: bound = optimal prunes the goal, BoundTooTight") {
    Grid g = generate_grid(30, 30, 0.3, Movement::FourWay, CostModel::Unit, 5);
    const double opt = astar(g).cost;
    auto sol = psdd_run(g, 2, opt);
    CHECK(sol.status == Status::BoundTooTight);
}

TEST_CASE("psdd: genuinely unreachable goal is NoSolution, not BoundTooTight") {
    std::vector<bool> blocked(25, false);
    for (std::uint32_t y = 0; y < 5; ++y) blocked[std::size_t(2) * 5 + y] = true;
    Grid g(5, 5, Movement::FourWay, CostModel::Unit, std::move(blocked), 0, 4, 4, 4);
    auto sol = psdd_run(g, 2, 1e9);
    CHECK(sol.status == Status::NoSolution);
}

TEST_CASE("psdd: one thread with a huge bound expands as many nodes as serial BFHS") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Grid g = generate_grid(40, 40, 0.35, Movement::FourWay, CostModel::Unit,
                               910 + seed);
        const double bound = 1e9;
        auto [ref_cost, ref_exp] = serial_bfhs(g, bound);
        Limits lim;
        auto sol = psdd_run(g, 1, bound, lim);
        REQUIRE(sol.solved());
        CHECK(sol.cost == ref_cost);
        CHECK(sol.stats.expansions == ref_exp);
    }
}

TEST_CASE("idpsdd: goal at the first bound needs one iteration") {
    // Open grid: h is exact, so f(init)+1 already admits the goal.
    Grid g = generate_grid(20, 20, 0.0, Movement::FourWay, CostModel::Unit, 1);
    Limits lim;
    std::vector<double> bounds;
    auto sol = idpsdd_run(g, 2, lim, {}, &bounds);
    REQUIRE(sol.solved());
    CHECK(bounds.size() == 1);
    CHECK(sol.cost == astar(g).cost);
}

TEST_CASE("idpsdd: optimal on unit 30x30 grids, bounds strictly increase") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        Grid g = generate_grid(30, 30, 0.35, Movement::FourWay, CostModel::Unit,
                               3300 + seed);
        const double opt = astar(g).cost;
        for (int t : {1, 4}) {
            Limits lim;
            std::vector<double> bounds;
            auto sol = idpsdd_run(g, t, lim, {}, &bounds);
            REQUIRE(sol.solved());
            CHECK(sol.cost == opt);
            for (std::size_t i = 1; i < bounds.size(); ++i)
                CHECK(bounds[i] > bounds[i - 1]);
        }
    }
}

TEST_CASE("bfpsdd: layers padded to at least k_mult * nthreads blocks") {
    Grid g = generate_grid(60, 60, 0.35, Movement::FourWay, CostModel::Unit, 17);
    Limits lim;
    BfpsddLayerStats stats;
    auto sol = bfpsdd_run(g, 2, 32, 4, 1.0, false, nullptr, lim, {}, &stats);
    REQUIRE(sol.solved());
    REQUIRE(!stats.pool_sizes.empty());
    const std::size_t k = 8;  // 4 * 2 threads
    for (std::size_t i = 0; i < stats.pool_sizes.size(); ++i) {
        const std::size_t expect = std::min(k, stats.available_sizes[i]);
        CHECK(stats.pool_sizes[i] >= expect);
    }
}

TEST_CASE("bfpsdd: optimal on sqrt2-cost eight-way 50x50 grids") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        Grid g = generate_grid(50, 50, 0.45, Movement::EightWay, CostModel::Unit,
                               4400 + seed);
        const double opt = astar(g).cost;
        for (int t : {1, 4}) {
            auto sol = bfpsdd_run(g, t, 32, 4, 1.0, false);
            REQUIRE(sol.solved());
            CHECK(sol.cost == doctest::Approx(opt).epsilon(1e-12));
        }
    }
}

TEST_CASE("bfpsdd: weighted anytime traces improve and respect the bound") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Grid g = generate_grid(60, 60, 0.35, Movement::FourWay, CostModel::Unit,
                               5500 + seed);
        const double opt = astar(g).cost;

        // weighted, not anytime: within the bound
        auto ws = bfpsdd_run(g, 4, 32, 4, 1.8, false);
        REQUIRE(ws.solved());
        CHECK(ws.cost <= 1.8 * opt + 1e-9);

        // anytime: strictly improving trace, optimal at exhaustion
        auto as = bfpsdd_run(g, 4, 32, 4, 1.8, true);
        REQUIRE(as.solved());
        CHECK(as.cost == opt);
        REQUIRE(!as.stats.trace.empty());
        for (std::size_t i = 1; i < as.stats.trace.size(); ++i)
            CHECK(as.stats.trace[i].second < as.stats.trace[i - 1].second);
    }
}
