#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "search/rng.hpp"

namespace search {

// 15-puzzle state: tile_at[pos] is the tile in that position, 0 = blank.
struct TilesState {
    std::array<std::uint8_t, 16> tile_at{};
    std::uint8_t blank = 0;

    bool operator==(const TilesState& o) const { return tile_at == o.tile_at; }
};

// Ignores the numbers on all tiles outside `tracked`; the abstract id is
// the rank of the tracked tiles' positions among ordered arrangements of
// 16 positions taken |tracked| at a time. Tracked may include the blank
// (tile 0) or not; leaving it out maximizes self-mapped generations.
class TilesAbstraction {
public:
    TilesAbstraction() = default;
    explicit TilesAbstraction(std::vector<std::uint8_t> tracked)
        : tracked_(std::move(tracked)) {
        num_ = 1;
        for (std::size_t i = 0; i < tracked_.size(); ++i) num_ *= 16 - i;
    }

    const std::vector<std::uint8_t>& tracked() const { return tracked_; }
    std::uint32_t num_nblocks() const { return static_cast<std::uint32_t>(num_); }

    std::uint32_t id(const TilesState& s) const {
        std::uint32_t rank = 0;
        std::uint16_t used = 0;
        for (std::size_t i = 0; i < tracked_.size(); ++i) {
            std::uint8_t p = pos_of(s, tracked_[i]);
            std::uint8_t below = static_cast<std::uint8_t>(
                __builtin_popcount(used & ((1u << p) - 1)));
            rank = rank * static_cast<std::uint32_t>(16 - i) + (p - below);
            used |= 1u << p;
        }
        return rank;
    }

    // Inverse of id(): positions of the tracked tiles.
    std::vector<std::uint8_t> unrank(std::uint32_t rank) const {
        const std::size_t k = tracked_.size();
        std::vector<std::uint32_t> digits(k);
        for (std::size_t i = k; i-- > 0;) {
            std::uint32_t base = static_cast<std::uint32_t>(16 - i);
            digits[i] = rank % base;
            rank /= base;
        }
        std::vector<std::uint8_t> avail(16);
        for (std::uint8_t p = 0; p < 16; ++p) avail[p] = p;
        std::vector<std::uint8_t> out(k);
        for (std::size_t i = 0; i < k; ++i) {
            out[i] = avail[digits[i]];
            avail.erase(avail.begin() + digits[i]);
        }
        return out;
    }

private:
    static std::uint8_t pos_of(const TilesState& s, std::uint8_t tile) {
        for (std::uint8_t p = 0; p < 16; ++p)
            if (s.tile_at[p] == tile) return p;
        return 16;  // unreachable for valid states
    }

    std::vector<std::uint8_t> tracked_;
    std::uint64_t num_ = 1;
};

// The 15-puzzle with unit move costs, Manhattan distance heuristic, and
// a factorial-base perfect hash of the full permutation.
class Tiles {
public:
    using State = TilesState;

    explicit Tiles(TilesState start,
                   TilesAbstraction abs = TilesAbstraction({0, 1, 2}))
        : start_(start), abs_(std::move(abs)) {
        for (std::uint8_t p = 0; p < 16; ++p) {
            for (std::uint8_t t = 0; t < 16; ++t) {
                if (t == 0) {
                    md_[p][t] = 0;
                } else {
                    int pr = p / 4, pc = p % 4, tr = t / 4, tc = t % 4;
                    md_[p][t] = std::abs(pr - tr) + std::abs(pc - tc);
                }
            }
        }
    }

    static TilesState goal() {
        TilesState s;
        for (std::uint8_t p = 0; p < 16; ++p) s.tile_at[p] = p;
        s.blank = 0;
        return s;
    }

    State initial() const { return start_; }

    bool is_goal(const State& s) const {
        for (std::uint8_t p = 0; p < 16; ++p)
            if (s.tile_at[p] != p) return false;
        return true;
    }

    void successors(const State& s, std::vector<std::pair<State, double>>& out) const {
        const int b = s.blank;
        const int r = b / 4, c = b % 4;
        auto move = [&](int nb) {
            State t = s;
            t.tile_at[b] = t.tile_at[nb];
            t.tile_at[nb] = 0;
            t.blank = static_cast<std::uint8_t>(nb);
            out.emplace_back(t, 1.0);
        };
        if (r > 0) move(b - 4);
        if (r < 3) move(b + 4);
        if (c > 0) move(b - 1);
        if (c < 3) move(b + 1);
    }

    double h(const State& s) const {
        int sum = 0;
        for (std::uint8_t p = 0; p < 16; ++p) sum += md_[p][s.tile_at[p]];
        return static_cast<double>(sum);
    }

    // Lehmer-code rank of the 16-element permutation; bijective onto [0, 16!).
    std::uint64_t state_key(const State& s) const {
        std::uint64_t rank = 0;
        std::uint16_t used = 0;
        for (int i = 0; i < 16; ++i) {
            std::uint8_t t = s.tile_at[i];
            std::uint8_t below =
                static_cast<std::uint8_t>(__builtin_popcount(used & ((1u << t) - 1)));
            rank = rank * static_cast<std::uint64_t>(16 - i) + (t - below);
            used |= 1u << t;
        }
        return rank;
    }

    std::uint32_t abstract_id(const State& s) const { return abs_.id(s); }
    std::uint32_t num_nblocks() const { return abs_.num_nblocks(); }
    const TilesAbstraction& abstraction() const { return abs_; }

    // Abstract edges: one tile move, with untracked tiles (and possibly the
    // blank) anonymous. Sound over-approximation of the concrete edges.
    void abstract_succs(std::uint32_t id, std::vector<std::uint32_t>& out) const {
        const auto& tracked = abs_.tracked();
        const std::size_t k = tracked.size();
        if (k == 0) return;
        std::vector<std::uint8_t> pos = abs_.unrank(id);
        std::uint16_t occupied = 0;
        for (auto p : pos) occupied |= 1u << p;
        int blank_slot = -1;
        for (std::size_t i = 0; i < k; ++i)
            if (tracked[i] == 0) blank_slot = static_cast<int>(i);

        auto emit = [&](std::vector<std::uint8_t>& q) {
            std::uint32_t rank = 0;
            std::uint16_t used = 0;
            for (std::size_t i = 0; i < k; ++i) {
                std::uint8_t below = static_cast<std::uint8_t>(
                    __builtin_popcount(used & ((1u << q[i]) - 1)));
                rank = rank * static_cast<std::uint32_t>(16 - i) + (q[i] - below);
                used |= 1u << q[i];
            }
            if (rank != id) out.push_back(rank);
        };

        auto neighbors = [](std::uint8_t p, std::array<std::uint8_t, 4>& nb) {
            int n = 0, r = p / 4, c = p % 4;
            if (r > 0) nb[n++] = static_cast<std::uint8_t>(p - 4);
            if (r < 3) nb[n++] = static_cast<std::uint8_t>(p + 4);
            if (c > 0) nb[n++] = static_cast<std::uint8_t>(p - 1);
            if (c < 3) nb[n++] = static_cast<std::uint8_t>(p + 1);
            return n;
        };

        std::array<std::uint8_t, 4> nb;
        if (blank_slot >= 0) {
            // Blank position known: swap blank with each neighbor.
            std::uint8_t bp = pos[blank_slot];
            int n = neighbors(bp, nb);
            for (int i = 0; i < n; ++i) {
                std::uint8_t q = nb[i];
                auto next = pos;
                next[blank_slot] = q;
                for (std::size_t j = 0; j < k; ++j)
                    if (j != static_cast<std::size_t>(blank_slot) && pos[j] == q)
                        next[j] = bp;  // tracked tile slides into the blank
                emit(next);
            }
        } else {
            // Blank anonymous: any tracked tile may slide to a free neighbor.
            for (std::size_t i = 0; i < k; ++i) {
                int n = neighbors(pos[i], nb);
                for (int j = 0; j < n; ++j) {
                    if (occupied & (1u << nb[j])) continue;
                    auto next = pos;
                    next[i] = nb[j];
                    emit(next);
                }
            }
        }
    }

    // --- serialization ---

    void save(std::ostream& os) const {
        os << "tiles 4 4\n";
        for (int p = 0; p < 16; ++p)
            os << static_cast<int>(start_.tile_at[p]) << (p == 15 ? '\n' : ' ');
    }

    static TilesState load_state(std::istream& is) {
        std::string tag;
        int w, h;
        is >> tag >> w >> h;
        if (tag != "tiles" || w != 4 || h != 4)
            throw std::runtime_error("bad tiles header");
        TilesState s;
        std::uint16_t seen = 0;
        for (int p = 0; p < 16; ++p) {
            int t;
            is >> t;
            if (t < 0 || t > 15 || (seen & (1u << t)))
                throw std::runtime_error("bad tiles permutation");
            seen |= 1u << t;
            s.tile_at[p] = static_cast<std::uint8_t>(t);
            if (t == 0) s.blank = static_cast<std::uint8_t>(p);
        }
        return s;
    }

private:
    TilesState start_;
    TilesAbstraction abs_;
    std::uint8_t md_[16][16];
};

// Random legal shuffle from the goal: `length` moves, never undoing the
// previous one. Always solvable by construction.
inline TilesState random_walk_tiles(std::uint64_t seed, int length) {
    SplitMix64 rng(seed);
    TilesState s = Tiles::goal();
    int prev = -1;
    for (int i = 0; i < length; ++i) {
        const int b = s.blank;
        const int r = b / 4, c = b % 4;
        std::array<int, 4> moves;
        int n = 0;
        if (r > 0 && b - 4 != prev) moves[n++] = b - 4;
        if (r < 3 && b + 4 != prev) moves[n++] = b + 4;
        if (c > 0 && b - 1 != prev) moves[n++] = b - 1;
        if (c < 3 && b + 1 != prev) moves[n++] = b + 1;
        const int nb = moves[rng.next_below(static_cast<std::uint64_t>(n))];
        s.tile_at[b] = s.tile_at[nb];
        s.tile_at[nb] = 0;
        prev = b;
        s.blank = static_cast<std::uint8_t>(nb);
    }
    return s;
}

// Shuffle-and-filter generator: instances are kept only when `probe`
// reports them solvable within the caller's expansion cap.
template <typename Probe>
TilesState generate_tiles(std::uint64_t seed, int walk_length, Probe&& probe,
                          int max_retries = 1000) {
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        TilesState s = random_walk_tiles(seed + static_cast<std::uint64_t>(attempt),
                                         walk_length);
        if (probe(s)) return s;
    }
    throw std::runtime_error("no tiles instance within the expansion cap after retries");
}

}  // namespace search
