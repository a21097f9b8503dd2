#pragma once

#include <algorithm>
#include <atomic>
#include <cassert>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "search/closed_list.hpp"
#include "search/incumbent.hpp"
#include "search/node.hpp"
#include "search/open_list.hpp"
#include "search/stats.hpp"

namespace search {

// Abstract-graph adjacency shared by the nblock-based searches. Self-loops
// are removed from Succs, but the interference scope keeps the block itself
// when the formula produces it (Preds(b) of any successor contains b), which
// is what makes sigma > 0 while a block is acquired.
class ScopeTable {
public:
    template <typename D>
    explicit ScopeTable(const D& d) {
        const std::uint32_t n = d.num_nblocks();
        succs_.resize(n);
        preds_.resize(n);
        int_scope_.resize(n);
        std::vector<std::uint32_t> tmp;
        for (std::uint32_t b = 0; b < n; ++b) {
            tmp.clear();
            d.abstract_succs(b, tmp);
            std::sort(tmp.begin(), tmp.end());
            tmp.erase(std::unique(tmp.begin(), tmp.end()), tmp.end());
            // drop self-loops
            tmp.erase(std::remove(tmp.begin(), tmp.end(), b), tmp.end());
            succs_[b] = tmp;
        }
        for (std::uint32_t b = 0; b < n; ++b)
            for (std::uint32_t s : succs_[b]) preds_[s].push_back(b);
        for (std::uint32_t b = 0; b < n; ++b) {
            auto& scope = int_scope_[b];
            scope = preds_[b];
            for (std::uint32_t y : succs_[b])
                scope.insert(scope.end(), preds_[y].begin(), preds_[y].end());
            std::sort(scope.begin(), scope.end());
            scope.erase(std::unique(scope.begin(), scope.end()), scope.end());
        }
    }

    std::uint32_t size() const { return static_cast<std::uint32_t>(succs_.size()); }
    const std::vector<std::uint32_t>& succs(std::uint32_t b) const { return succs_[b]; }
    const std::vector<std::uint32_t>& preds(std::uint32_t b) const { return preds_[b]; }
    const std::vector<std::uint32_t>& int_scope(std::uint32_t b) const {
        return int_scope_[b];
    }

    bool in_scope(std::uint32_t member, std::uint32_t of) const {
        const auto& s = int_scope_[of];
        return std::binary_search(s.begin(), s.end(), member);
    }

private:
    std::vector<std::vector<std::uint32_t>> succs_;
    std::vector<std::vector<std::uint32_t>> preds_;
    std::vector<std::vector<std::uint32_t>> int_scope_;
};

// One abstract state's partition of the search space.
template <typename NodeT>
struct NBlock {
    std::uint32_t id = 0;
    std::int32_t freelist_idx = -1;
    std::int32_t minf_idx = -1;
    std::int32_t sigma = 0;    // acquired blocks whose interference scope has this
    std::int32_t sigma_h = 0;  // hot blocks whose interference scope has this
    std::atomic<bool> hot{false};
    bool acquired = false;

    OpenList<NodeT*, FPrimeOrder, OpenIdx> open;  // f' == f when w == 1
    OpenList<NodeT*, FOrder, OpenFIdx> open_f;    // only maintained in optimistic mode
    ClosedList<NodeT> closed;
    std::deque<NodeT> arena;

    // Front keys published by the holder so lock-free readers never touch
    // the heaps of a block another thread is expanding.
    std::atomic<double> pub_fprime{kInfCost};
    std::atomic<double> pub_f{kInfCost};
    double last_release_f = kInfCost;  // min_f heap key (optimistic mode)

    bool open_empty() const { return pub_fprime.load(std::memory_order_acquire) == kInfCost; }
};

enum class BlockOrder {
    FPrime,     // order blocks by their best f' (best f when w == 1)
    Optimistic  // f' while in bound, else f (per-nblock phase switching)
};

// The nblock graph: free-list heap, single lock, sigma/sigma_h accounting,
// and the hot-nblocks protocol. All mutation of graph state happens under
// the one lock; expansion inside an acquired block's duplicate-detection
// scope needs none.
template <typename NodeT>
class NBlockGraph {
public:
    struct Options {
        bool safe = true;              // hot-nblocks protocol on
        BlockOrder order = BlockOrder::FPrime;
        bool maintain_minf = false;    // optimistic lower-bound heap
        bool check_invariants = false; // stress/debug oracles
    };

    template <typename D>
    NBlockGraph(const D& d, const Options& opt)
        : scope_(d), opt_(opt), blocks_(scope_.size()) {
        for (std::uint32_t i = 0; i < scope_.size(); ++i) blocks_[i].id = i;
        if (opt_.maintain_minf)
            for (auto& b : blocks_) minf_.push(&b);
    }

    ScopeTable& scope() { return scope_; }
    NBlock<NodeT>& block(std::uint32_t id) { return blocks_[id]; }
    std::uint32_t num_blocks() const { return scope_.size(); }

    std::mutex& mutex() { return mu_; }
    std::condition_variable& cv() { return cv_; }

    bool done() const { return done_.load(std::memory_order_acquire); }
    void set_done_locked() {
        done_.store(true, std::memory_order_release);
        cv_.notify_all();
    }

    // While paused, no thread may acquire a free nblock (resort protocol).
    void set_paused_locked(bool p) {
        paused_.store(p, std::memory_order_release);
        if (!p) cv_.notify_all();
    }

    Incumbent<NodeT>& incumbent() { return inc_; }

    // The holder republishes a block's front keys after mutating its open.
    void publish(NBlock<NodeT>& b) {
        b.pub_fprime.store(b.open.empty() ? kInfCost : b.open.top()->fprime,
                           std::memory_order_release);
        if (opt_.maintain_minf || opt_.order == BlockOrder::Optimistic)
            b.pub_f.store(b.open_f.empty() ? kInfCost : b.open_f.top()->f,
                          std::memory_order_release);
    }

    // Scalar priority used for racy hints and, under the lock, for ordering.
    // Optimistic blocks out of the incumbent bound sort behind in-bound ones
    // and by f instead of f'.
    double proxy_key(const NBlock<NodeT>& b) const {
        const double fp = b.pub_fprime.load(std::memory_order_acquire);
        if (opt_.order == BlockOrder::FPrime) return fp;
        const double ic = inc_.cost();
        if (fp < ic) return fp;
        const double f = b.pub_f.load(std::memory_order_acquire);
        return f == kInfCost ? kInfCost : f + kPhasePenalty;
    }

    bool better(const NBlock<NodeT>& a, const NBlock<NodeT>& b) const {
        const double ka = proxy_key(a), kb = proxy_key(b);
        if (ka != kb) return ka < kb;
        return a.id < b.id;
    }

    double freelist_best_hint() const {
        return freelist_hint_.load(std::memory_order_acquire);
    }

    // Best published key over b's interference scope (racy by design; exact
    // decisions are re-validated under the lock).
    double scope_best_hint(const NBlock<NodeT>& b, std::uint32_t* argmin = nullptr) const {
        double best = kInfCost;
        for (std::uint32_t m : scope_.int_scope(b.id)) {
            if (m == b.id) continue;
            const double k = proxy_key(blocks_[m]);
            if (k < best) {
                best = k;
                if (argmin) *argmin = m;
            }
        }
        return best;
    }

    // ---- Appendix-A operations (call with the graph lock NOT held unless
    // noted; locking is internal) ----

    // SHOULD-SWITCH: true when the thread ought to give up b. May flag a
    // better interfered block hot, or clear stale hot flags in b's scope.
    bool should_switch(NBlock<NodeT>& b, int min_expansions, int& exp,
                       ThreadStats* ts = nullptr) {
        if (b.open.empty()) return true;
        if (exp < min_expansions) return false;
        exp = 0;
        const double own = proxy_key(b);
        std::uint32_t scope_arg = 0;
        const double fl = freelist_best_hint();
        const double sc = opt_.safe ? scope_best_hint(b, &scope_arg) : kInfCost;
        if (fl < own || sc < own) {
            if (opt_.safe && sc < fl) set_hot(blocks_[scope_arg], ts);
            return true;
        }
        if (opt_.safe) {
            std::lock_guard lk(mu_);
            for (std::uint32_t m : scope_.int_scope(b.id))
                if (blocks_[m].hot.load(std::memory_order_relaxed))
                    set_cold_locked(blocks_[m]);
            if (opt_.check_invariants) verify_sigmas_locked();
        }
        return false;
    }

    // SETHOT with the undirected cases 1-3 and directed cases 4-5. A block
    // already held by a thread is left alone: its holder is expanding it.
    void set_hot(NBlock<NodeT>& b, ThreadStats* ts = nullptr) {
        WaitTimer lt(time_locks_, ts ? ts->lock_wait_seconds : dummy_wait_);
        std::lock_guard lk(mu_);
        if (b.hot.load(std::memory_order_relaxed) || b.sigma == 0 || b.acquired ||
            b.open.empty())
            return;
        std::vector<NBlock<NodeT>*> worse;
        for (NBlock<NodeT>* x : hot_set_) {
            const bool interferes =
                scope_.in_scope(x->id, b.id) || scope_.in_scope(b.id, x->id);
            if (!interferes) continue;
            if (better(*x, b)) return;  // cases 2 and 5
            worse.push_back(x);         // cases 3 and 4
        }
        for (NBlock<NodeT>* x : worse) set_cold_locked(*x);
        b.hot.store(true, std::memory_order_relaxed);
        hot_set_.push_back(&b);
        for (std::uint32_t m : scope_.int_scope(b.id)) {
            if (m == b.id) continue;
            NBlock<NodeT>& mb = blocks_[m];
            if (mb.freelist_idx >= 0) freelist_remove(mb);
            mb.sigma_h++;
        }
        if (opt_.check_invariants) {
            hot_flags_++;
            pending_hot_[b.id]++;
            verify_lemma1_locked(b);
            verify_sigmas_locked();
        }
    }

    // NEXTNBLOCK. Returns the block to continue with, or nullptr once the
    // search is done. cur may be nullptr on the first call.
    NBlock<NodeT>* next_nblock(NBlock<NodeT>* cur, ThreadStats* ts = nullptr) {
        const bool blocking = cur == nullptr || cur->open.empty() ||
                              cur->hot.load(std::memory_order_relaxed);
        std::unique_lock lk(mu_, std::defer_lock);
        if (blocking) {
            WaitTimer lt(time_locks_, ts ? ts->lock_wait_seconds : dummy_wait_);
            lk.lock();
        } else if (!lk.try_lock()) {
            return cur;  // keep searching; the lock is busy
        }
        if (cur) {
            if (!cur->open.empty()) {
                bool keep = true;
                for (std::uint32_t m : scope_.int_scope(cur->id))
                    if (m != cur->id && better(blocks_[m], *cur)) {
                        keep = false;
                        break;
                    }
                if (keep && !freelist_.empty() && better(*freelist_.top(), *cur))
                    keep = false;
                if (keep && !cur->hot.load(std::memory_order_relaxed)) return cur;
            }
            release_locked(*cur);
        }
        if (acquired_count_ == 0 && freelist_.empty() &&
            !paused_.load(std::memory_order_acquire))
            set_done_locked();
        while (!done_.load(std::memory_order_acquire) &&
               (freelist_.empty() || paused_.load(std::memory_order_acquire))) {
            WaitTimer wt(time_locks_, ts ? ts->free_wait_seconds : dummy_wait_);
            cv_.wait(lk);
        }
        if (done_.load(std::memory_order_acquire)) return nullptr;
        NBlock<NodeT>* m = freelist_.pop();
        m->freelist_idx = -1;
        refresh_freelist_hint();
        m->acquired = true;
        acquired_count_++;
        for (std::uint32_t x : scope_.int_scope(m->id)) {
            NBlock<NodeT>& xb = blocks_[x];
            xb.sigma++;
            if (xb.freelist_idx >= 0) freelist_remove(xb);
        }
        if (opt_.check_invariants) verify_disjoint_locked(*m);
        return m;
    }

    // RELEASE under an already-held lock (used by the resort protocol too).
    void release_locked(NBlock<NodeT>& b) {
        assert(b.acquired);
        b.acquired = false;
        acquired_count_--;
        bool pushed = false;
        for (std::uint32_t x : scope_.int_scope(b.id)) {
            NBlock<NodeT>& xb = blocks_[x];
            xb.sigma--;
            assert(xb.sigma >= 0);
            if (xb.sigma == 0 && xb.sigma_h == 0) {
                if (!xb.open.empty()) {
                    if (xb.hot.load(std::memory_order_relaxed)) set_cold_locked(xb);
                    if (xb.freelist_idx < 0) freelist_push(xb);
                    pushed = true;
                } else if (xb.hot.load(std::memory_order_relaxed)) {
                    // An emptied block must not stay hot or its scope would
                    // be blocked forever.
                    set_cold_locked(xb);
                }
            }
        }
        if (opt_.maintain_minf) {
            sift_minf(b);
            for (std::uint32_t s : scope_.succs(b.id)) sift_minf(blocks_[s]);
        }
        (void)pushed;
        cv_.notify_all();  // sleepers and resort leaders watch releases
        if (opt_.check_invariants) verify_sigmas_locked();
    }

    void release(NBlock<NodeT>& b, ThreadStats* ts = nullptr) {
        WaitTimer lt(time_locks_, ts ? ts->lock_wait_seconds : dummy_wait_);
        std::lock_guard lk(mu_);
        release_locked(b);
    }

    // Lower bound on the global minimum f (front of the min_f heap).
    double minf_bound_locked() const {
        return minf_.empty() ? kInfCost : minf_.top()->last_release_f;
    }

    // Seed / refresh a block's min_f key in place (root setup and audits).
    void refresh_minf_locked(NBlock<NodeT>& b) {
        if (opt_.maintain_minf) sift_minf(b);
    }

    // Incumbent changed: optimistic ordering depends on it, so free-list
    // priorities must be rebuilt.
    void on_incumbent_changed_locked() {
        if (opt_.order == BlockOrder::Optimistic) {
            freelist_.resort();
            refresh_freelist_hint();
        }
    }

    // Rebuild the free list from scratch (resort protocol step 5).
    void rebuild_freelist_locked() {
        freelist_.clear();
        for (auto& b : blocks_) {
            b.freelist_idx = -1;
            if (!b.acquired && b.sigma == 0 && b.sigma_h == 0 && !b.open.empty())
                freelist_.push(&b);
        }
        refresh_freelist_hint();
        cv_.notify_all();
    }

    int acquired_count_locked() const { return acquired_count_; }

    void enable_lock_timing(bool on) { time_locks_ = on; }

    // ---- instrumentation / stress oracles ----

    std::uint64_t hot_flag_events() const { return hot_flags_; }
    std::uint64_t hot_freed_events() const { return hot_freed_; }
    std::uint64_t invariant_checks() const { return invariant_checks_; }

    // Hot events that never led to a free-list insertion (should be empty at
    // the end of a run).
    std::vector<std::uint32_t> unfreed_hot_blocks() const {
        std::vector<std::uint32_t> out;
        for (const auto& [id, cnt] : pending_hot_)
            if (cnt > 0) out.push_back(id);
        return out;
    }

    // Recompute sigma / sigma_h from first principles and compare with the
    // incremental values (the lock must be held, i.e. a quiescent point).
    void verify_sigmas_locked() {
        invariant_checks_++;
        std::vector<std::int32_t> sig(blocks_.size(), 0), sigh(blocks_.size(), 0);
        for (const auto& b : blocks_) {
            if (b.acquired)
                for (std::uint32_t x : scope_.int_scope(b.id)) sig[x]++;
            if (b.hot.load(std::memory_order_relaxed))
                for (std::uint32_t x : scope_.int_scope(b.id))
                    if (x != b.id) sigh[x]++;
        }
        for (const auto& b : blocks_) {
            if (b.sigma != sig[b.id] || b.sigma_h != sigh[b.id])
                throw std::logic_error("sigma oracle mismatch at block " +
                                       std::to_string(b.id));
            const bool free_now =
                !b.acquired && b.sigma == 0 && b.sigma_h == 0 && !b.open.empty();
            if (free_now != (b.freelist_idx >= 0))
                throw std::logic_error("freelist membership mismatch at block " +
                                       std::to_string(b.id));
        }
    }

private:
    static constexpr double kPhasePenalty = 1e15;

    struct FreeIdx {
        std::int32_t& operator()(NBlock<NodeT>* b) const { return b->freelist_idx; }
    };
    struct MinFIdx {
        std::int32_t& operator()(NBlock<NodeT>* b) const { return b->minf_idx; }
    };
    struct FreeCmp {
        const NBlockGraph* g;
        bool operator()(NBlock<NodeT>* a, NBlock<NodeT>* b) const {
            return g->better(*a, *b);
        }
    };
    struct MinFCmp {
        bool operator()(NBlock<NodeT>* a, NBlock<NodeT>* b) const {
            if (a->last_release_f != b->last_release_f)
                return a->last_release_f < b->last_release_f;
            return a->id < b->id;
        }
    };

    void freelist_push(NBlock<NodeT>& b) {
        assert(b.freelist_idx < 0);
        if (opt_.check_invariants && pending_hot_.count(b.id) && pending_hot_[b.id] > 0) {
            pending_hot_[b.id]--;
            hot_freed_++;
        }
        freelist_.push(&b);
        refresh_freelist_hint();
    }

    void freelist_remove(NBlock<NodeT>& b) {
        freelist_.erase(&b);
        refresh_freelist_hint();
    }

    void refresh_freelist_hint() {
        freelist_hint_.store(freelist_.empty() ? kInfCost : proxy_key(*freelist_.top()),
                             std::memory_order_release);
    }

    // SETCOLD: un-flag and cascade sigma_h decrements; newly free members
    // enter the free list.
    void set_cold_locked(NBlock<NodeT>& b) {
        if (!b.hot.load(std::memory_order_relaxed)) return;
        b.hot.store(false, std::memory_order_relaxed);
        hot_set_.erase(std::find(hot_set_.begin(), hot_set_.end(), &b));
        for (std::uint32_t m : scope_.int_scope(b.id)) {
            if (m == b.id) continue;
            NBlock<NodeT>& mb = blocks_[m];
            mb.sigma_h--;
            assert(mb.sigma_h >= 0);
            if (mb.sigma == 0 && mb.sigma_h == 0 && !mb.acquired && !mb.open.empty()) {
                if (mb.hot.load(std::memory_order_relaxed)) set_cold_locked(mb);
                if (mb.freelist_idx < 0) freelist_push(mb);
            }
        }
        cv_.notify_all();
    }

    void sift_minf(NBlock<NodeT>& b) {
        b.last_release_f = b.pub_f.load(std::memory_order_acquire);
        if (b.minf_idx >= 0) minf_.update(&b);
    }

    // No two acquired blocks may have intersecting duplicate-detection
    // scopes ({b} ∪ Succs(b)).
    void verify_disjoint_locked(NBlock<NodeT>& fresh) {
        invariant_checks_++;
        std::vector<char> mark(blocks_.size(), 0);
        auto dds = [&](std::uint32_t id, auto&& f) {
            f(id);
            for (std::uint32_t s : scope_.succs(id)) f(s);
        };
        for (const auto& b : blocks_) {
            if (!b.acquired || b.id == fresh.id) continue;
            dds(b.id, [&](std::uint32_t x) { mark[x] = 1; });
        }
        bool clash = false;
        dds(fresh.id, [&](std::uint32_t x) {
            if (mark[x]) clash = true;
        });
        if (clash)
            throw std::logic_error("duplicate-detection scopes intersect at block " +
                                   std::to_string(fresh.id));
    }

    // Lemma 1 at flag time: some acquired block interferes with b, and the
    // hot set stays pairwise non-interfering.
    void verify_lemma1_locked(NBlock<NodeT>& b) {
        invariant_checks_++;
        bool interfered = false;
        for (const auto& other : blocks_)
            if (other.acquired && scope_.in_scope(other.id, b.id)) interfered = true;
        if (!interfered)
            throw std::logic_error("hot block has no acquired interferer");
        for (NBlock<NodeT>* x : hot_set_)
            for (NBlock<NodeT>* y : hot_set_)
                if (x != y && (scope_.in_scope(x->id, y->id) ||
                               scope_.in_scope(y->id, x->id)))
                    throw std::logic_error("two hot blocks interfere");
    }

    ScopeTable scope_;
    Options opt_;
    std::deque<NBlock<NodeT>> blocks_;
    std::mutex mu_;
    std::condition_variable cv_;
    OpenList<NBlock<NodeT>*, FreeCmp, FreeIdx> freelist_{FreeCmp{this}};
    OpenList<NBlock<NodeT>*, MinFCmp, MinFIdx> minf_;
    std::vector<NBlock<NodeT>*> hot_set_;
    Incumbent<NodeT> inc_;
    std::atomic<bool> done_{false};
    std::atomic<bool> paused_{false};
    std::atomic<double> freelist_hint_{kInfCost};
    int acquired_count_ = 0;
    bool time_locks_ = false;
    double dummy_wait_ = 0.0;

    std::uint64_t hot_flags_ = 0;
    std::uint64_t hot_freed_ = 0;
    std::uint64_t invariant_checks_ = 0;
    std::unordered_map<std::uint32_t, std::int64_t> pending_hot_;
};

}  // namespace search
