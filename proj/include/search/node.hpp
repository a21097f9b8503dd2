#pragma once

#include <cstdint>
#include <limits>

namespace search {

inline constexpr double kInfCost = std::numeric_limits<double>::infinity();

// One search node. f and fprime are cached so heap comparisons never
// recompute them; key caches the domain's state_key for tie-breaking and
// closed-list lookup.
template <typename State>
struct Node {
    State state{};
    std::uint64_t key = 0;
    double g = 0.0;
    double h = 0.0;
    double f = 0.0;       // g + h
    double fprime = 0.0;  // g + w*h, equal to f when w == 1
    Node* parent = nullptr;
    double edge_cost = 0.0;  // cost of the edge parent -> state
    std::int32_t open_idx = -1;    // position in the primary open heap
    std::int32_t open_f_idx = -1;  // position in the secondary f heap, if kept
    std::int32_t stamp = -1;       // scratch marker (ARA* iteration, etc.)
    bool expanded = false;

    void set_costs(double g_, double h_, double w) {
        g = g_;
        h = h_;
        f = g_ + h_;
        fprime = g_ + w * h_;
    }
};

// Ordering on cached f: smaller f first, ties prefer larger g, then
// smaller state key. Deterministic for serial baselines.
struct FOrder {
    template <typename N>
    bool operator()(const N* a, const N* b) const {
        if (a->f != b->f) return a->f < b->f;
        if (a->g != b->g) return a->g > b->g;
        return a->key < b->key;
    }
};

// Same rule on f' = g + w*h.
struct FPrimeOrder {
    template <typename N>
    bool operator()(const N* a, const N* b) const {
        if (a->fprime != b->fprime) return a->fprime < b->fprime;
        if (a->g != b->g) return a->g > b->g;
        return a->key < b->key;
    }
};

struct OpenIdx {
    template <typename N>
    std::int32_t& operator()(N* n) const {
        return n->open_idx;
    }
};

struct OpenFIdx {
    template <typename N>
    std::int32_t& operator()(N* n) const {
        return n->open_f_idx;
    }
};

}  // namespace search
