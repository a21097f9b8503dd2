#pragma once

#include <atomic>
#include <cassert>
#include <cstdint>

#include "search/node.hpp"

namespace search {

// Best solution found so far. Readers take lock-free snapshots of
// (cost, revision); writers must hold the owning algorithm's lock.
template <typename NodeT>
class Incumbent {
public:
    double cost() const { return cost_.load(std::memory_order_acquire); }
    std::uint64_t revision() const { return rev_.load(std::memory_order_acquire); }

    struct Snapshot {
        double cost;
        std::uint64_t revision;
    };

    Snapshot snapshot() const {
        return {cost_.load(std::memory_order_acquire),
                rev_.load(std::memory_order_acquire)};
    }

    bool has_solution() const { return cost() < kInfCost; }
    NodeT* node() const { return node_; }

    // Caller holds the algorithm's lock. Returns false when cand does not
    // strictly improve on the current incumbent.
    bool improve(NodeT* cand) {
        double old = cost_.load(std::memory_order_relaxed);
        if (cand->g >= old) return false;
        node_ = cand;
        cost_.store(cand->g, std::memory_order_release);
        rev_.fetch_add(1, std::memory_order_acq_rel);
        return true;
    }

    void reset() {
        node_ = nullptr;
        cost_.store(kInfCost, std::memory_order_release);
        rev_.store(0, std::memory_order_release);
    }

private:
    std::atomic<double> cost_{kInfCost};
    std::atomic<std::uint64_t> rev_{0};
    NodeT* node_ = nullptr;
};

}  // namespace search
