#pragma once

#include <cstdint>
#include <unordered_map>

namespace search {

enum class Consider { Fresh, Improved, Dominated };

// Map from state key to the single best node known for that state.
// The stored g value never increases over a run.
template <typename NodeT>
class ClosedList {
public:
    NodeT* find(std::uint64_t key) const {
        auto it = map_.find(key);
        return it == map_.end() ? nullptr : it->second;
    }

    void insert(NodeT* n) { map_.emplace(n->key, n); }

    // Fresh: key unseen, caller must allocate and insert.
    // Improved: cand_g < stored g; stored g is updated, old g returned via
    // out parameters along with the node (caller patches parent/f/heaps).
    // Dominated: cand_g >= stored g, nothing mutated.
    Consider consider(std::uint64_t key, double cand_g, NodeT** node_out,
                      double* old_g_out = nullptr) {
        auto it = map_.find(key);
        if (it == map_.end()) {
            *node_out = nullptr;
            return Consider::Fresh;
        }
        *node_out = it->second;
        if (cand_g < it->second->g) {
            if (old_g_out) *old_g_out = it->second->g;
            it->second->g = cand_g;
            return Consider::Improved;
        }
        return Consider::Dominated;
    }

    std::size_t size() const { return map_.size(); }
    bool empty() const { return map_.empty(); }
    void clear() { map_.clear(); }

    auto begin() const { return map_.begin(); }
    auto end() const { return map_.end(); }

private:
    std::unordered_map<std::uint64_t, NodeT*> map_;
};

}  // namespace search
