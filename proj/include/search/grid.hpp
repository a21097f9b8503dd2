#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <deque>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "search/rng.hpp"

namespace search {

enum class Movement { FourWay, EightWay };
enum class CostModel { Unit, Life };

inline constexpr double kSqrt2 = 1.4142135623730951;

// Blocks of adjacent cells map to the same abstract state, forming a coarse
// grid over the original space with the same movement model.
struct GridAbstraction {
    std::uint32_t block_w = 1;
    std::uint32_t block_h = 1;
    std::uint32_t cols = 0;  // ceil(width / block_w)
    std::uint32_t rows = 0;  // ceil(height / block_h)

    GridAbstraction() = default;
    GridAbstraction(std::uint32_t width, std::uint32_t height, std::uint32_t bw,
                    std::uint32_t bh)
        : block_w(bw),
          block_h(bh),
          cols((width + bw - 1) / bw),
          rows((height + bh - 1) / bh) {}

    std::uint32_t num_nblocks() const { return cols * rows; }

    std::uint32_t id(std::uint32_t x, std::uint32_t y) const {
        return (x / block_w) * rows + (y / block_h);
    }
};

// Grid pathfinding: unit or life cost, four- or eight-way movement.
// States are packed as x*height + y, which doubles as the minimum perfect
// hash for the instance.
class Grid {
public:
    using State = std::uint32_t;

    Grid(std::uint32_t width, std::uint32_t height, Movement movement,
         CostModel cost_model, std::vector<bool> blocked, std::uint32_t sx,
         std::uint32_t sy, std::uint32_t gx, std::uint32_t gy)
        : width_(width),
          height_(height),
          movement_(movement),
          cost_model_(cost_model),
          blocked_(std::move(blocked)),
          start_(pack(sx, sy)),
          goal_(pack(gx, gy)) {
        if (blocked_.size() != std::size_t(width_) * height_)
            throw std::invalid_argument("blocked bitmap size mismatch");
        if (blocked_[start_] || blocked_[goal_])
            throw std::invalid_argument("start or goal is blocked");
        set_default_abstraction();
    }

    std::uint32_t width() const { return width_; }
    std::uint32_t height() const { return height_; }
    Movement movement() const { return movement_; }
    CostModel cost_model() const { return cost_model_; }

    State pack(std::uint32_t x, std::uint32_t y) const { return x * height_ + y; }
    std::uint32_t x_of(State s) const { return s / height_; }
    std::uint32_t y_of(State s) const { return s % height_; }
    bool blocked(State s) const { return blocked_[s]; }

    State initial() const { return start_; }
    State goal_state() const { return goal_; }
    bool is_goal(State s) const { return s == goal_; }

    std::uint64_t state_key(State s) const { return s; }

    void successors(State s, std::vector<std::pair<State, double>>& out) const {
        const std::int64_t x = x_of(s), y = y_of(s);
        const double row = static_cast<double>(y);
        const double orth = cost_model_ == CostModel::Unit ? 1.0 : row;
        const double diag = cost_model_ == CostModel::Unit ? kSqrt2 : kSqrt2 * row;
        add_move(out, x - 1, y, orth);
        add_move(out, x + 1, y, orth);
        add_move(out, x, y - 1, orth);
        add_move(out, x, y + 1, orth);
        if (movement_ == Movement::EightWay) {
            add_move(out, x - 1, y - 1, diag);
            add_move(out, x + 1, y - 1, diag);
            add_move(out, x - 1, y + 1, diag);
            add_move(out, x + 1, y + 1, diag);
        }
    }

    double h(State s) const {
        const double dx = std::abs(static_cast<double>(x_of(s)) - x_of(goal_));
        const double dy = std::abs(static_cast<double>(y_of(s)) - y_of(goal_));
        if (cost_model_ == CostModel::Unit) {
            if (movement_ == Movement::FourWay) return dx + dy;
            return std::max(dx, dy) + (kSqrt2 - 1.0) * std::min(dx, dy);
        }
        return movement_ == Movement::FourWay
                   ? life_h4(y_of(s), static_cast<std::uint32_t>(dx))
                   : life_h8(y_of(s), static_cast<std::uint32_t>(dx));
    }

    // --- abstraction ---

    void set_abstraction(GridAbstraction a) { abs_ = a; }
    const GridAbstraction& abstraction() const { return abs_; }

    std::uint32_t abstract_id(State s) const { return abs_.id(x_of(s), y_of(s)); }
    std::uint32_t num_nblocks() const { return abs_.num_nblocks(); }

    // Coarse-grid neighbors under the same movement model; self excluded.
    void abstract_succs(std::uint32_t id, std::vector<std::uint32_t>& out) const {
        const std::int64_t cx = id / abs_.rows, cy = id % abs_.rows;
        auto add = [&](std::int64_t ax, std::int64_t ay) {
            if (ax < 0 || ay < 0 || ax >= abs_.cols || ay >= abs_.rows) return;
            out.push_back(static_cast<std::uint32_t>(ax * abs_.rows + ay));
        };
        add(cx - 1, cy);
        add(cx + 1, cy);
        add(cx, cy - 1);
        add(cx, cy + 1);
        if (movement_ == Movement::EightWay) {
            add(cx - 1, cy - 1);
            add(cx + 1, cy - 1);
            add(cx - 1, cy + 1);
            add(cx + 1, cy + 1);
        }
    }

    // --- serialization ---

    void save(std::ostream& os) const {
        os << "grid " << width_ << ' ' << height_ << ' '
           << (movement_ == Movement::FourWay ? "four" : "eight") << ' '
           << (cost_model_ == CostModel::Unit ? "unit" : "life") << '\n';
        os << "start " << x_of(start_) << ' ' << y_of(start_) << '\n';
        os << "goal " << x_of(goal_) << ' ' << y_of(goal_) << '\n';
        for (std::uint32_t y = 0; y < height_; ++y) {
            for (std::uint32_t x = 0; x < width_; ++x)
                os << (blocked_[pack(x, y)] ? '#' : '.');
            os << '\n';
        }
    }

    static Grid load(std::istream& is) {
        std::string tag, mv, cm;
        std::uint32_t w, h, sx, sy, gx, gy;
        is >> tag >> w >> h >> mv >> cm;
        if (tag != "grid") throw std::runtime_error("bad grid header");
        is >> tag >> sx >> sy;
        if (tag != "start") throw std::runtime_error("bad grid start line");
        is >> tag >> gx >> gy;
        if (tag != "goal") throw std::runtime_error("bad grid goal line");
        std::vector<bool> blocked(std::size_t(w) * h, false);
        std::string row;
        for (std::uint32_t y = 0; y < h; ++y) {
            is >> row;
            if (row.size() != w) throw std::runtime_error("bad grid row length");
            for (std::uint32_t x = 0; x < w; ++x)
                if (row[x] == '#') blocked[std::size_t(x) * h + y] = true;
        }
        Movement movement = mv == "four" ? Movement::FourWay : Movement::EightWay;
        CostModel cost = cm == "unit" ? CostModel::Unit : CostModel::Life;
        return Grid(w, h, movement, cost, std::move(blocked), sx, sy, gx, gy);
    }

    bool solvable() const {
        std::vector<bool> seen(blocked_.size(), false);
        std::deque<State> q;
        q.push_back(start_);
        seen[start_] = true;
        std::vector<std::pair<State, double>> succ;
        while (!q.empty()) {
            State s = q.front();
            q.pop_front();
            if (s == goal_) return true;
            succ.clear();
            successors(s, succ);
            for (auto& [t, c] : succ) {
                if (!seen[t]) {
                    seen[t] = true;
                    q.push_back(t);
                }
            }
        }
        return false;
    }

private:
    void add_move(std::vector<std::pair<State, double>>& out, std::int64_t x,
                  std::int64_t y, double cost) const {
        if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
        State t = pack(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
        if (!blocked_[t]) out.emplace_back(t, cost);
    }

    // sum of row indices 0..k-1
    static double rowsum(std::int64_t k) {
        return 0.5 * static_cast<double>(k) * static_cast<double>(k - 1);
    }

    // Cost to travel vertically from row a to row b, each move charged at
    // the row it is performed in.
    static double vcost(std::int64_t a, std::int64_t b) {
        if (a < b) return rowsum(b) - rowsum(a);          // down: rows a..b-1
        if (a > b) return rowsum(a + 1) - rowsum(b + 1);  // up: rows b+1..a
        return 0.0;
    }

    // Life four-way: all horizontal travel happens at a single rendezvous
    // row r. The objective vcost(sy,r) + dx*r + vcost(r,gy) is concave in r
    // (its forward difference dx - (2r+1) decreases), so the minimum over
    // r in [0, m], m = min(sy, gy), is at an endpoint: either do all dx
    // moves at row m, or climb to the free top row for m^2.
    double life_h4(std::uint32_t sy, std::uint32_t dx) const {
        const std::int64_t gy = y_of(goal_);
        const double direct = vcost(sy, gy);
        if (dx == 0) return direct;
        const double m = static_cast<double>(std::min<std::int64_t>(sy, gy));
        return direct + std::min(static_cast<double>(dx) * m, m * m);
    }

    // Life eight-way: diagonal moves taken during vertical travel can cover
    // columns, so only the horizontal distance beyond the vertical move
    // count is charged, at the rendezvous row.
    double life_h8(std::uint32_t sy, std::uint32_t dx) const {
        const std::int64_t gy = y_of(goal_);
        const std::int64_t hi = std::max<std::int64_t>(sy, gy);
        double best = std::numeric_limits<double>::infinity();
        for (std::int64_t r = 0; r <= hi; ++r) {
            const std::int64_t vmoves =
                std::llabs(static_cast<std::int64_t>(sy) - r) + std::llabs(r - gy);
            const std::int64_t rem =
                std::max<std::int64_t>(0, static_cast<std::int64_t>(dx) - vmoves);
            const double c = vcost(sy, r) + vcost(r, gy) +
                             static_cast<double>(rem) * static_cast<double>(r);
            if (c < best) best = c;
        }
        return best;
    }

    void set_default_abstraction() {
        // Scale the 62,500-nblock convention (5000x5000 cells, 20x20 blocks,
        // i.e. 250 blocks per axis) to this instance's size.
        auto block_for = [](std::uint32_t dim) {
            std::uint32_t b = (dim + 249) / 250;
            return b == 0 ? 1u : b;
        };
        abs_ = GridAbstraction(width_, height_, block_for(width_), block_for(height_));
    }

    std::uint32_t width_, height_;
    Movement movement_;
    CostModel cost_model_;
    std::vector<bool> blocked_;
    State start_, goal_;
    GridAbstraction abs_;
};

// Each non-start/goal cell is blocked with probability p; start is the
// bottom-left corner and the goal the bottom-right. Reseeds with
// seed+1, seed+2, ... until the instance is solvable.
inline Grid generate_grid(std::uint32_t width, std::uint32_t height, double p,
                          Movement movement, CostModel cost_model,
                          std::uint64_t seed, int max_retries = 100) {
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        SplitMix64 rng(seed + static_cast<std::uint64_t>(attempt));
        std::vector<bool> blocked(std::size_t(width) * height, false);
        for (std::uint32_t x = 0; x < width; ++x)
            for (std::uint32_t y = 0; y < height; ++y)
                blocked[std::size_t(x) * height + y] = rng.next_double() < p;
        const std::uint32_t sy = height - 1;
        blocked[std::size_t(0) * height + sy] = false;
        blocked[std::size_t(width - 1) * height + sy] = false;
        Grid g(width, height, movement, cost_model, std::move(blocked), 0, sy,
               width - 1, sy);
        if (g.solvable()) return g;
    }
    throw std::runtime_error("no solvable grid instance after retries");
}

}  // namespace search
