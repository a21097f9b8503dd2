#pragma once

#include <cassert>
#include <chrono>
#include <cstdint>
#include <utility>
#include <vector>

#include "search/stats.hpp"

namespace search {

// Binary min-heap over node pointers. Each node stores its heap position
// (selected by the Index functor) so decrease-key and arbitrary removal are
// O(log n). Compare is a strict "better-than".
template <typename NodePtr, typename Compare, typename Index>
class OpenList {
public:
    OpenList() = default;
    explicit OpenList(Compare cmp) : cmp_(std::move(cmp)) {}

    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

    // Optional per-operation timing; ts may be null.
    void instrument(ThreadStats* ts) { stats_ = ts; }

    NodePtr top() const {
        assert(!heap_.empty());
        return heap_[0];
    }

    void push(NodePtr n) {
        OpTimer t(stats_);
        heap_.push_back(n);
        idx_(n) = static_cast<std::int32_t>(heap_.size()) - 1;
        sift_up(heap_.size() - 1);
    }

    NodePtr pop() {
        assert(!heap_.empty());
        OpTimer t(stats_);
        NodePtr n = heap_[0];
        remove_at(0);
        return n;
    }

    // Re-establish the heap property for a node whose key changed.
    void update(NodePtr n) {
        OpTimer t(stats_);
        std::size_t i = static_cast<std::size_t>(idx_(n));
        assert(i < heap_.size() && heap_[i] == n);
        if (!sift_up(i)) sift_down(i);
    }

    bool contains(NodePtr n) const { return idx_(n) >= 0; }

    void erase(NodePtr n) {
        std::size_t i = static_cast<std::size_t>(idx_(n));
        assert(i < heap_.size() && heap_[i] == n);
        remove_at(i);
    }

    void clear() {
        for (NodePtr n : heap_) idx_(n) = -1;
        heap_.clear();
    }

    // Rebuild after the comparator's meaning changed (e.g. a new weight).
    void resort() {
        if (heap_.size() < 2) return;
        for (std::size_t i = heap_.size() / 2; i-- > 0;) sift_down(i);
    }

    const std::vector<NodePtr>& raw() const { return heap_; }

private:
    struct OpTimer {
        explicit OpTimer(ThreadStats* ts) : ts_(ts) {
            if (ts_) t0_ = std::chrono::steady_clock::now();
        }
        ~OpTimer() {
            if (ts_) {
                ts_->open_ops++;
                ts_->open_op_seconds +=
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
                        .count();
            }
        }
        ThreadStats* ts_;
        std::chrono::steady_clock::time_point t0_;
    };

    void remove_at(std::size_t i) {
        idx_(heap_[i]) = -1;
        if (i + 1 != heap_.size()) {
            heap_[i] = heap_.back();
            idx_(heap_[i]) = static_cast<std::int32_t>(i);
            heap_.pop_back();
            if (!sift_up(i)) sift_down(i);
        } else {
            heap_.pop_back();
        }
    }

    bool sift_up(std::size_t i) {
        bool moved = false;
        while (i > 0) {
            std::size_t p = (i - 1) / 2;
            if (!cmp_(heap_[i], heap_[p])) break;
            swap_nodes(i, p);
            i = p;
            moved = true;
        }
        return moved;
    }

    void sift_down(std::size_t i) {
        for (;;) {
            std::size_t l = 2 * i + 1, r = l + 1, best = i;
            if (l < heap_.size() && cmp_(heap_[l], heap_[best])) best = l;
            if (r < heap_.size() && cmp_(heap_[r], heap_[best])) best = r;
            if (best == i) break;
            swap_nodes(i, best);
            i = best;
        }
    }

    void swap_nodes(std::size_t a, std::size_t b) {
        std::swap(heap_[a], heap_[b]);
        idx_(heap_[a]) = static_cast<std::int32_t>(a);
        idx_(heap_[b]) = static_cast<std::int32_t>(b);
    }

    std::vector<NodePtr> heap_;
    Compare cmp_{};
    Index idx_{};
    ThreadStats* stats_ = nullptr;
};

}  // namespace search
