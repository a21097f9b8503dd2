#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>
#include <unordered_set>

#include "oracles.hpp"
#include "search/grid.hpp"
#include "search/rng.hpp"
#include "search/tiles.hpp"

using namespace search;

namespace {

Grid open_grid(std::uint32_t w, std::uint32_t h, Movement mv, CostModel cm,
               std::uint32_t sx = 0, std::uint32_t sy = 0) {
    std::vector<bool> blocked(std::size_t(w) * h, false);
    return Grid(w, h, mv, cm, std::move(blocked), sx, sy, w - 1, h - 1);
}

}  // namespace

TEST_CASE("grid successors: unit eight-way interior cell") {
    Grid g = open_grid(5, 5, Movement::EightWay, CostModel::Unit);
    std::vector<std::pair<Grid::State, double>> succ;
    g.successors(g.pack(2, 2), succ);
    REQUIRE(succ.size() == 8);
    int orth = 0, diag = 0;
    for (auto& [s, c] : succ) {
        if (c == 1.0) orth++;
        if (c == kSqrt2) diag++;
    }
    CHECK(orth == 4);
    CHECK(diag == 4);
}

TEST_CASE("grid successors: life costs charge the source row") {
    // Top row moves are free; bottom row of a 5000-row grid costs 4999.
    Grid g = open_grid(2, 5000, Movement::FourWay, CostModel::Life);
    std::vector<std::pair<Grid::State, double>> succ;
    g.successors(g.pack(0, 0), succ);
    for (auto& [s, c] : succ) CHECK(c == 0.0);
    succ.clear();
    g.successors(g.pack(0, 4999), succ);
    bool saw_horizontal = false;
    for (auto& [s, c] : succ) {
        CHECK(c == 4999.0);
        if (g.y_of(s) == 4999) saw_horizontal = true;
    }
    CHECK(saw_horizontal);
}

TEST_CASE("grid successors: fully walled-in cell has none") {
    std::vector<bool> blocked(25, false);
    for (std::uint32_t x = 1; x <= 3; ++x)
        for (std::uint32_t y = 1; y <= 3; ++y)
            if (!(x == 2 && y == 2)) blocked[std::size_t(x) * 5 + y] = true;
    Grid g(5, 5, Movement::EightWay, CostModel::Unit, std::move(blocked), 0, 0, 2, 2);
    std::vector<std::pair<Grid::State, double>> succ;
    g.successors(g.pack(2, 2), succ);
    CHECK(succ.empty());
}

TEST_CASE("grid_h trivial values") {
    Grid g4 = open_grid(10, 10, Movement::FourWay, CostModel::Unit, 3, 4);
    // goal at (9,9): manhattan from (3,4) is 11
    CHECK(g4.h(g4.pack(3, 4)) == 11.0);

    // Spec example: s=(3,4), goal=(0,0) -> 7
    std::vector<bool> blocked(100, false);
    Grid g(10, 10, Movement::FourWay, CostModel::Unit, std::move(blocked), 3, 4, 0, 0);
    CHECK(g.h(g.pack(3, 4)) == 7.0);

    // Octile: dx=3, dy=1 -> 2 + sqrt(2)
    std::vector<bool> b2(100, false);
    Grid g8(10, 10, Movement::EightWay, CostModel::Unit, std::move(b2), 3, 1, 0, 0);
    CHECK(g8.h(g8.pack(3, 1)) == doctest::Approx(2.0 + kSqrt2).epsilon(1e-12));
}

TEST_CASE("grid heuristics admissible vs Dijkstra on small instances") {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        for (Movement mv : {Movement::FourWay, Movement::EightWay}) {
            for (CostModel cm : {CostModel::Unit, CostModel::Life}) {
                double p = mv == Movement::FourWay ? 0.30 : 0.40;
                Grid g = generate_grid(12, 12, p, mv, cm, seed * 100);
                auto dist = oracle::grid_dijkstra_to(g, g.goal_state());
                for (std::uint32_t s = 0; s < 144; ++s) {
                    if (g.blocked(s) || dist[s] == oracle::kInf) continue;
                    CHECK(g.h(s) <= dist[s] + 1e-9);
                    checked++;
                }
            }
        }
    }
    CHECK(checked > 2000);
}

TEST_CASE("grid_state_key is x*height + y and bijective") {
    Grid g = open_grid(2, 5000, Movement::FourWay, CostModel::Unit);
    CHECK(g.state_key(g.pack(0, 0)) == 0);
    // x=2,y=3 with height 5000 -> 10003 (needs width > 2)
    Grid g2 = open_grid(3, 5000, Movement::FourWay, CostModel::Unit);
    CHECK(g2.state_key(g2.pack(2, 3)) == 10003);

    Grid g75 = open_grid(7, 5, Movement::FourWay, CostModel::Unit);
    std::set<std::uint64_t> keys;
    for (std::uint32_t x = 0; x < 7; ++x)
        for (std::uint32_t y = 0; y < 5; ++y) keys.insert(g75.state_key(g75.pack(x, y)));
    CHECK(keys.size() == 35);
    CHECK(*keys.begin() == 0);
    CHECK(*keys.rbegin() == 34);
}

TEST_CASE("grid abstraction: 5000x5000 with 20x20 blocks has 62500 ids") {
    GridAbstraction abs(5000, 5000, 20, 20);
    CHECK(abs.num_nblocks() == 62500);
    std::set<std::uint32_t> ids;
    for (std::uint32_t cx = 0; cx < 250; ++cx)
        for (std::uint32_t cy = 0; cy < 250; ++cy) ids.insert(abs.id(cx * 20, cy * 20));
    CHECK(ids.size() == 62500);
}

TEST_CASE("grid abstraction: 1x1 blocks are the identity") {
    Grid g = open_grid(6, 4, Movement::FourWay, CostModel::Unit);
    g.set_abstraction(GridAbstraction(6, 4, 1, 1));
    for (std::uint32_t s = 0; s < 24; ++s) CHECK(g.abstract_id(s) == s);
}

TEST_CASE("grid abstraction adjacency is exhaustive on a 40x40 grid") {
    Grid g = open_grid(40, 40, Movement::EightWay, CostModel::Unit);
    g.set_abstraction(GridAbstraction(40, 40, 8, 8));
    std::vector<std::pair<Grid::State, double>> succ;
    std::vector<std::uint32_t> asucc;
    for (std::uint32_t s = 0; s < 1600; ++s) {
        succ.clear();
        g.successors(s, succ);
        asucc.clear();
        g.abstract_succs(g.abstract_id(s), asucc);
        for (auto& [t, c] : succ) {
            const std::uint32_t at = g.abstract_id(t);
            if (at == g.abstract_id(s)) continue;  // in-block move
            CHECK(std::find(asucc.begin(), asucc.end(), at) != asucc.end());
        }
    }
}

TEST_CASE("tiles successors: corner and center blank, inverse move") {
    Tiles dom(Tiles::goal());
    std::vector<std::pair<TilesState, double>> succ;
    dom.successors(Tiles::goal(), succ);  // blank at position 0 (corner)
    CHECK(succ.size() == 2);

    TilesState center = Tiles::goal();
    // move blank 0 -> 1 -> 5 to put it in the center
    std::swap(center.tile_at[0], center.tile_at[1]);
    center.blank = 1;
    std::swap(center.tile_at[1], center.tile_at[5]);
    center.blank = 5;
    succ.clear();
    dom.successors(center, succ);
    CHECK(succ.size() == 4);

    // applying a move and its inverse restores the state
    for (auto& [t, c] : succ) {
        CHECK(c == 1.0);
        std::vector<std::pair<TilesState, double>> back;
        dom.successors(t, back);
        bool restored = false;
        for (auto& [u, c2] : back)
            if (u == center) restored = true;
        CHECK(restored);
    }
}

TEST_CASE("tiles manhattan heuristic") {
    Tiles dom(Tiles::goal());
    CHECK(dom.h(Tiles::goal()) == 0.0);

    // One move from goal: a single tile is displaced one step.
    TilesState s = Tiles::goal();
    std::swap(s.tile_at[0], s.tile_at[1]);
    s.blank = 1;
    CHECK(dom.h(s) == 1.0);
}

TEST_CASE("tiles h admissible vs bounded-DFS oracle") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        TilesState s = random_walk_tiles(seed, 1 + static_cast<int>(seed % 12));
        Tiles dom(s);
        int opt = oracle::tiles_optimal_depth(dom, s, 12);
        REQUIRE(opt >= 0);
        CHECK(dom.h(s) <= static_cast<double>(opt));
    }
}

TEST_CASE("tiles_state_key: identity is 0; tiny case exhaustive; no collisions") {
    Tiles dom(Tiles::goal());
    CHECK(dom.state_key(Tiles::goal()) == 0);

    // All 3! orders of the first three tiles with the rest fixed rank within
    // a contiguous block; check pairwise-distinct ranks over permutations of
    // a 3-element prefix variant.
    std::set<std::uint64_t> tiny;
    std::array<std::uint8_t, 3> perm{0, 1, 2};
    std::sort(perm.begin(), perm.end());
    do {
        TilesState s = Tiles::goal();
        for (int i = 0; i < 3; ++i) s.tile_at[i] = perm[i];
        for (int i = 0; i < 16; ++i)
            if (s.tile_at[i] == 0) s.blank = static_cast<std::uint8_t>(i);
        tiny.insert(dom.state_key(s));
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(tiny.size() == 6);

    // 1e5 random full permutations: no collisions.
    SplitMix64 rng(99);
    std::unordered_set<std::uint64_t> keys;
    for (int i = 0; i < 100000; ++i) {
        TilesState s;
        std::array<std::uint8_t, 16> p;
        for (int j = 0; j < 16; ++j) p[j] = static_cast<std::uint8_t>(j);
        for (int j = 15; j > 0; --j)
            std::swap(p[j], p[rng.next_below(static_cast<std::uint64_t>(j + 1))]);
        for (int j = 0; j < 16; ++j) {
            s.tile_at[j] = p[j];
            if (p[j] == 0) s.blank = static_cast<std::uint8_t>(j);
        }
        keys.insert(dom.state_key(s));
    }
    CHECK(keys.size() == 100000);
}

TEST_CASE("tiles abstraction: blank+1+2 yields exactly 3360 ids") {
    TilesAbstraction abs({0, 1, 2});
    CHECK(abs.num_nblocks() == 3360);

    Tiles dom(Tiles::goal(), abs);
    // Closure over the abstract successor relation from the goal's id.
    std::set<std::uint32_t> seen{dom.abstract_id(Tiles::goal())};
    std::vector<std::uint32_t> frontier{dom.abstract_id(Tiles::goal())}, next;
    std::vector<std::uint32_t> succ;
    while (!frontier.empty()) {
        next.clear();
        for (auto id : frontier) {
            succ.clear();
            dom.abstract_succs(id, succ);
            for (auto t : succ) {
                REQUIRE(t < 3360);
                if (seen.insert(t).second) next.push_back(t);
            }
        }
        frontier.swap(next);
    }
    CHECK(seen.size() == 3360);
}

TEST_CASE("tiles abstraction: empty tracked set maps everything to 0") {
    TilesAbstraction abs(std::vector<std::uint8_t>{});
    CHECK(abs.num_nblocks() == 1);
    CHECK(abs.id(Tiles::goal()) == 0);
    CHECK(abs.id(random_walk_tiles(3, 30)) == 0);
}

TEST_CASE("tiles abstraction: untracked moves keep the id") {
    // tracked = {1,2,3}: any blank move not touching tiles 1..3 keeps the id.
    TilesAbstraction abs({1, 2, 3});
    Tiles dom(Tiles::goal(), abs);
    SplitMix64 rng(5);
    std::vector<std::pair<TilesState, double>> succ;
    int stationary = 0, moved = 0;
    for (int i = 0; i < 200; ++i) {
        TilesState s = random_walk_tiles(rng.next(), 25);
        const std::uint32_t id = dom.abstract_id(s);
        succ.clear();
        dom.successors(s, succ);
        for (auto& [t, c] : succ) {
            bool touched = false;
            for (int p = 0; p < 16; ++p) {
                if (t.tile_at[p] != s.tile_at[p] && t.tile_at[p] >= 1 &&
                    t.tile_at[p] <= 3)
                    touched = true;
            }
            if (!touched) {
                CHECK(dom.abstract_id(t) == id);
                stationary++;
            } else {
                moved++;
            }
        }
    }
    CHECK(stationary > 0);
    CHECK(moved > 0);
}

TEST_CASE("tiles abstraction adjacency covers concrete moves") {
    for (auto tracked : {std::vector<std::uint8_t>{0, 1, 2}, std::vector<std::uint8_t>{1, 2, 3}}) {
        TilesAbstraction abs(tracked);
        Tiles dom(Tiles::goal(), abs);
        SplitMix64 rng(17);
        std::vector<std::pair<TilesState, double>> succ;
        std::vector<std::uint32_t> asucc;
        for (int i = 0; i < 300; ++i) {
            TilesState s = random_walk_tiles(rng.next(), 40);
            const std::uint32_t id = dom.abstract_id(s);
            asucc.clear();
            dom.abstract_succs(id, asucc);
            succ.clear();
            dom.successors(s, succ);
            for (auto& [t, c] : succ) {
                const std::uint32_t at = dom.abstract_id(t);
                if (at == id) continue;
                CHECK(std::find(asucc.begin(), asucc.end(), at) != asucc.end());
            }
        }
    }
}

TEST_CASE("grid generator: determinism, solvability, densities") {
    Grid a = generate_grid(30, 20, 0.35, Movement::FourWay, CostModel::Unit, 11);
    Grid b = generate_grid(30, 20, 0.35, Movement::FourWay, CostModel::Unit, 11);
    std::ostringstream sa, sb;
    a.save(sa);
    b.save(sb);
    CHECK(sa.str() == sb.str());

    CHECK(a.solvable());
    CHECK(a.initial() == a.pack(0, 19));
    CHECK(a.goal_state() == a.pack(29, 19));

    Grid empty = generate_grid(15, 15, 0.0, Movement::FourWay, CostModel::Unit, 3);
    CHECK(empty.solvable());
    int blocked_cells = 0;
    for (std::uint32_t s = 0; s < 15 * 15; ++s)
        if (empty.blocked(s)) blocked_cells++;
    CHECK(blocked_cells == 0);

    // density sanity at the paper's probabilities
    Grid dense = generate_grid(80, 80, 0.45, Movement::EightWay, CostModel::Unit, 21);
    int cnt = 0;
    for (std::uint32_t s = 0; s < 6400; ++s)
        if (dense.blocked(s)) cnt++;
    CHECK(cnt > 6400 * 0.40);
    CHECK(cnt < 6400 * 0.50);
}

TEST_CASE("grid file round trip") {
    Grid g = generate_grid(17, 9, 0.35, Movement::EightWay, CostModel::Life, 5);
    std::stringstream ss;
    g.save(ss);
    Grid r = Grid::load(ss);
    std::ostringstream again;
    r.save(again);
    std::ostringstream orig;
    g.save(orig);
    CHECK(again.str() == orig.str());
}

TEST_CASE("tiles file round trip and generator determinism") {
    TilesState s = random_walk_tiles(123, 30);
    Tiles dom(s);
    std::stringstream ss;
    dom.save(ss);
    TilesState r = Tiles::load_state(ss);
    CHECK(r == s);
    CHECK(r.blank == s.blank);

    CHECK(random_walk_tiles(9, 40) == random_walk_tiles(9, 40));
}
