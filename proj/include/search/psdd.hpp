#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>
#include <vector>

#include "search/limits.hpp"
#include "search/nblock_graph.hpp"  // ScopeTable
#include "search/pbnf.hpp"          // prune_test
#include "search/serial.hpp"
#include "search/solution.hpp"

namespace search {

// ---------------------------------------------------------------------------
// PSDD: breadth-first layers over the nblock decomposition, given an upper
// bound for pruning. Each nblock keeps FIFO lists for the current and next
// depth; threads acquire nblocks with disjoint duplicate-detection scopes
// and synchronize between layers. Optimal for uniform-cost domains when the
// supplied bound exceeds the optimal cost.
// ---------------------------------------------------------------------------

template <typename D>
Solution<typename D::State> psdd_run(const D& d, int nthreads, double upper_bound,
                                     Limits& lim, const Instrument& ins = {},
                                     double* min_pruned_f_out = nullptr) {
    using NodeT = Node<typename D::State>;
    using State = typename D::State;
    Solution<State> sol;
    if (nthreads < 1) throw std::invalid_argument("nthreads >= 1");

    struct Block {
        std::deque<NodeT*> cur, next;
        ClosedList<NodeT> closed;
        std::deque<NodeT> arena;
        std::int32_t sigma = 0;
        bool acquired = false;
        bool queued = false;  // on the free FIFO
    };

    ScopeTable scope(d);
    const std::uint32_t N = scope.size();
    std::deque<Block> blocks(N);

    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::uint32_t> free_fifo;  // PSDD uses queues, not heaps
    int acquired_count = 0;
    int waiting = 0;
    bool done = false;
    NodeT* best_goal = nullptr;
    std::atomic<double> inc_cost{kInfCost};
    bool pruned_any = false;
    double min_pruned_f = kInfCost;
    std::vector<ThreadStats> tstats(static_cast<std::size_t>(nthreads));

    auto make = [&](Block& tb, const State& s, double g, NodeT* parent, double edge) {
        tb.arena.emplace_back();
        NodeT* n = &tb.arena.back();
        n->state = s;
        n->key = d.state_key(s);
        n->parent = parent;
        n->edge_cost = edge;
        n->set_costs(g, d.h(s), 1.0);
        lim.charge_nodes(1);
        return n;
    };

    // Seed the root into its block's current list.
    {
        Block& rb = blocks[d.abstract_id(d.initial())];
        NodeT* root = make(rb, d.initial(), 0.0, nullptr, 0.0);
        rb.closed.insert(root);
        rb.cur.push_back(root);
        rb.queued = true;
        free_fifo.push_back(d.abstract_id(d.initial()));
    }

    auto enqueue_if_free = [&](std::uint32_t id) {
        Block& b = blocks[id];
        if (!b.queued && !b.acquired && b.sigma == 0 && !b.cur.empty()) {
            b.queued = true;
            free_fifo.push_back(id);
            cv.notify_all();
        }
    };

    auto release_locked = [&](std::uint32_t id) {
        Block& b = blocks[id];
        b.acquired = false;
        acquired_count--;
        for (std::uint32_t x : scope.int_scope(id)) {
            blocks[x].sigma--;
            if (blocks[x].sigma == 0) enqueue_if_free(x);
        }
        cv.notify_all();
    };

    auto worker = [&](int tid) {
        ThreadStats& ts = tstats[static_cast<std::size_t>(tid)];
        std::vector<std::pair<State, double>> succs;
        std::int32_t held = -1;
        for (;;) {
            {
                std::unique_lock lk(mu);
                if (held >= 0) {
                    release_locked(static_cast<std::uint32_t>(held));
                    held = -1;
                }
                for (;;) {
                    if (done || lim.tripped()) {
                        done = true;
                        cv.notify_all();
                        return;
                    }
                    // Pop a genuinely free block (lazy cleanup of the FIFO).
                    std::int32_t got = -1;
                    while (!free_fifo.empty()) {
                        std::uint32_t id = free_fifo.front();
                        free_fifo.pop_front();
                        blocks[id].queued = false;
                        if (!blocks[id].acquired && blocks[id].sigma == 0 &&
                            !blocks[id].cur.empty()) {
                            got = static_cast<std::int32_t>(id);
                            break;
                        }
                    }
                    if (got >= 0) {
                        Block& b = blocks[static_cast<std::uint32_t>(got)];
                        b.acquired = true;
                        acquired_count++;
                        for (std::uint32_t x :
                             scope.int_scope(static_cast<std::uint32_t>(got)))
                            blocks[x].sigma++;
                        held = got;
                        break;
                    }
                    // Nothing free with current-layer work. The last thread
                    // standing advances the layer.
                    if (waiting == nthreads - 1 && acquired_count == 0) {
                        bool any = false;
                        for (std::uint32_t id = 0; id < N; ++id) {
                            Block& b = blocks[id];
                            if (!b.next.empty()) {
                                b.cur.swap(b.next);
                                any = true;
                            }
                            if (!b.cur.empty()) enqueue_if_free(id);
                        }
                        if (!any && free_fifo.empty()) {
                            done = true;
                            cv.notify_all();
                            return;
                        }
                        continue;
                    }
                    waiting++;
                    {
                        WaitTimer wt(ins.coord_timing, ts.free_wait_seconds);
                        cv.wait(lk);
                    }
                    waiting--;
                }
            }

            Block& b = blocks[static_cast<std::uint32_t>(held)];
            while (!b.cur.empty()) {
                if ((ts.expansions & 1023u) == 0) lim.poll_time();
                if (lim.tripped()) break;
                NodeT* m = b.cur.front();
                b.cur.pop_front();
                if (m->f >= upper_bound) {
                    ts.pruned++;
                    std::lock_guard lk(mu);
                    pruned_any = true;
                    if (m->f < min_pruned_f) min_pruned_f = m->f;
                    continue;
                }
                if (m->f >= inc_cost.load(std::memory_order_acquire)) {
                    ts.pruned++;  // the incumbent can no longer be beaten
                    continue;
                }
                if (d.is_goal(m->state)) {
                    std::lock_guard lk(mu);
                    if (m->g < inc_cost.load(std::memory_order_relaxed)) {
                        inc_cost.store(m->g, std::memory_order_release);
                        best_goal = m;
                    }
                    continue;
                }
                m->expanded = true;
                ts.expansions++;
                if (ins.f_histogram) ts.expanded_f.push_back(static_cast<float>(m->f));
                succs.clear();
                d.successors(m->state, succs);
                for (const auto& [s, c] : succs) {
                    ts.generations++;
                    Block& tb = blocks[d.abstract_id(s)];
                    const std::uint64_t key = d.state_key(s);
                    const double g2 = m->g + c;
                    NodeT* ex = tb.closed.find(key);
                    if (!ex) {
                        NodeT* n = make(tb, s, g2, m, c);
                        tb.closed.insert(n);
                        tb.next.push_back(n);
                    } else if (g2 < ex->g) {
                        // Cannot happen in uniform-cost breadth-first layers;
                        // kept for robustness on irregular costs.
                        ex->set_costs(g2, ex->h, 1.0);
                        ex->parent = m;
                        ex->edge_cost = c;
                    }
                }
            }
        }
    };

    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();

    if (min_pruned_f_out) *min_pruned_f_out = min_pruned_f;
    if (lim.tripped()) {
        sol.status = lim.trip() == Limits::Trip::Timeout ? Status::Timeout
                                                         : Status::MemoryExceeded;
    } else if (best_goal) {
        auto [path, cost] = reconstruct_and_validate(d, best_goal);
        sol.status = Status::Solved;
        sol.cost = cost;
        sol.path = std::move(path);
    } else {
        sol.status = pruned_any ? Status::BoundTooTight : Status::NoSolution;
    }
    for (auto& ts : tstats) sol.stats.merge_thread(ts);
    sol.stats.wall_seconds = lim.elapsed_s();
    return sol;
}

template <typename D>
Solution<typename D::State> psdd_run(const D& d, int nthreads, double upper_bound) {
    Limits lim;
    return psdd_run(d, nthreads, upper_bound, lim);
}

// ---------------------------------------------------------------------------
// IDPSDD: iterative deepening over psdd_run, raising the bound just past the
// smallest pruned f of the previous iteration.
// ---------------------------------------------------------------------------

template <typename D>
Solution<typename D::State> idpsdd_run(const D& d, int nthreads, Limits& lim,
                                       const Instrument& ins = {},
                                       std::vector<double>* bounds_out = nullptr) {
    const double f0 = d.h(d.initial());
    double bound = f0 + 1.0;
    Solution<typename D::State> last;
    for (;;) {
        double min_pruned = kInfCost;
        last = psdd_run(d, nthreads, bound, lim, ins, &min_pruned);
        if (bounds_out) bounds_out->push_back(bound);
        if (last.status != Status::BoundTooTight) return last;
        if (min_pruned == kInfCost) {
            last.status = Status::NoSolution;
            return last;
        }
        // "on or above" pruning: the next bound must exceed the cheapest
        // pruned f for it to be expanded.
        const bool integral = min_pruned == std::floor(min_pruned);
        const double next = min_pruned + (integral ? 1.0 : 1e-9 * std::max(1.0, min_pruned));
        if (next <= bound) {
            last.status = Status::NoSolution;
            return last;
        }
        bound = next;
    }
}

template <typename D>
Solution<typename D::State> idpsdd_run(const D& d, int nthreads) {
    Limits lim;
    return idpsdd_run(d, nthreads, lim);
}

// ---------------------------------------------------------------------------
// BFPSDD: f-valued layers. Every layer admits all nblocks whose best node
// lies at the layer's f value, padded to at least k_mult * nthreads blocks;
// a thread expands at least min_exp nodes before abandoning a non-empty
// block and may expand above the layer value. First solutions may be
// suboptimal, so the search runs until the incumbent prunes everything.
// ---------------------------------------------------------------------------

struct BfpsddLayerStats {
    std::vector<std::size_t> pool_sizes;       // admitted per layer
    std::vector<std::size_t> available_sizes;  // nonempty blocks per layer
};

template <typename D>
Solution<typename D::State> bfpsdd_run(const D& d, int nthreads, int min_exp,
                                       int k_mult, double w, bool anytime,
                                       const IncumbentCallback& on_incumbent,
                                       Limits& lim, const Instrument& ins = {},
                                       BfpsddLayerStats* layer_stats = nullptr) {
    using NodeT = Node<typename D::State>;
    using State = typename D::State;
    if (nthreads < 1 || min_exp < 1 || k_mult < 1 || w < 1.0)
        throw std::invalid_argument("bad bfpsdd parameters");
    constexpr double kQuantum = 1e-6;  // groups equal real-valued layer keys
    Solution<State> sol;

    struct Block {
        OpenList<NodeT*, FPrimeOrder, OpenIdx> open;
        ClosedList<NodeT> closed;
        std::deque<NodeT> arena;
        std::atomic<double> pub{kInfCost};
        std::int32_t sigma = 0;
        bool acquired = false;
        bool in_pool = false;
        bool queued = false;
    };

    ScopeTable scope(d);
    const std::uint32_t N = scope.size();
    std::deque<Block> blocks(N);

    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::uint32_t> free_pool;  // admitted and currently free
    int acquired_count = 0;
    int waiting = 0;
    bool done = false;
    Incumbent<NodeT> inc;
    std::vector<ThreadStats> tstats(static_cast<std::size_t>(nthreads));
    double layer_f = 0.0;
    const int k = k_mult * nthreads;

    auto publish = [&](Block& b) {
        b.pub.store(b.open.empty() ? kInfCost : b.open.top()->fprime,
                    std::memory_order_release);
    };

    auto make = [&](Block& tb, const State& s, double g, NodeT* parent, double edge) {
        tb.arena.emplace_back();
        NodeT* n = &tb.arena.back();
        n->state = s;
        n->key = d.state_key(s);
        n->parent = parent;
        n->edge_cost = edge;
        n->set_costs(g, d.h(s), w);
        lim.charge_nodes(1);
        return n;
    };

    {
        Block& rb = blocks[d.abstract_id(d.initial())];
        NodeT* root = make(rb, d.initial(), 0.0, nullptr, 0.0);
        rb.closed.insert(root);
        rb.open.push(root);
        publish(rb);
    }

    auto enqueue_if_ready = [&](std::uint32_t id) {
        Block& b = blocks[id];
        if (b.in_pool && !b.queued && !b.acquired && b.sigma == 0 && !b.open.empty()) {
            b.queued = true;
            free_pool.push_back(id);
            cv.notify_all();
        }
    };

    auto release_locked = [&](std::uint32_t id) {
        Block& b = blocks[id];
        b.acquired = false;
        acquired_count--;
        for (std::uint32_t x : scope.int_scope(id)) {
            blocks[x].sigma--;
            if (blocks[x].sigma == 0) enqueue_if_ready(x);
        }
        cv.notify_all();
    };

    // Recompute the layer: all blocks at the global minimum key, padded to
    // at least k blocks. Runs with the lock held, everything released.
    auto advance_layer_locked = [&] {
        std::vector<std::pair<double, std::uint32_t>> avail;
        for (std::uint32_t id = 0; id < N; ++id) {
            blocks[id].in_pool = false;
            const double key = blocks[id].pub.load(std::memory_order_acquire);
            if (key < kInfCost) avail.emplace_back(key, id);
        }
        if (avail.empty()) return false;
        std::sort(avail.begin(), avail.end());
        layer_f = avail.front().first;
        std::size_t admitted = 0;
        for (auto& [key, id] : avail) {
            if (key <= layer_f + kQuantum || admitted < static_cast<std::size_t>(k)) {
                blocks[id].in_pool = true;
                admitted++;
            } else {
                break;
            }
        }
        if (layer_stats) {
            layer_stats->pool_sizes.push_back(admitted);
            layer_stats->available_sizes.push_back(avail.size());
        }
        for (std::uint32_t id = 0; id < N; ++id) enqueue_if_ready(id);
        return true;
    };

    {
        std::lock_guard lk(mu);
        advance_layer_locked();
    }

    auto worker = [&](int tid) {
        ThreadStats& ts = tstats[static_cast<std::size_t>(tid)];
        std::vector<std::pair<State, double>> succs;
        std::int32_t held = -1;
        for (;;) {
            {
                std::unique_lock lk(mu);
                if (held >= 0) {
                    Block& hb = blocks[static_cast<std::uint32_t>(held)];
                    // A block abandoned above the layer value leaves the
                    // pool; it returns when a later layer admits it.
                    if (hb.open.empty() ||
                        hb.open.top()->fprime > layer_f + kQuantum)
                        hb.in_pool = false;
                    release_locked(static_cast<std::uint32_t>(held));
                    held = -1;
                }
                for (;;) {
                    if (done || lim.tripped()) {
                        done = true;
                        cv.notify_all();
                        return;
                    }
                    std::int32_t got = -1;
                    while (!free_pool.empty()) {
                        std::uint32_t id = free_pool.front();
                        free_pool.pop_front();
                        blocks[id].queued = false;
                        if (blocks[id].in_pool && !blocks[id].acquired &&
                            blocks[id].sigma == 0 && !blocks[id].open.empty()) {
                            got = static_cast<std::int32_t>(id);
                            break;
                        }
                    }
                    if (got >= 0) {
                        Block& b = blocks[static_cast<std::uint32_t>(got)];
                        b.acquired = true;
                        acquired_count++;
                        for (std::uint32_t x :
                             scope.int_scope(static_cast<std::uint32_t>(got)))
                            blocks[x].sigma++;
                        held = got;
                        break;
                    }
                    if (waiting == nthreads - 1 && acquired_count == 0) {
                        if (!advance_layer_locked()) {
                            done = true;
                            cv.notify_all();
                            return;
                        }
                        continue;
                    }
                    waiting++;
                    {
                        WaitTimer wt(ins.coord_timing, ts.free_wait_seconds);
                        cv.wait(lk);
                    }
                    waiting--;
                }
            }

            Block& b = blocks[static_cast<std::uint32_t>(held)];
            int exp = 0;
            for (;;) {
                if ((ts.expansions & 1023u) == 0) lim.poll_time();
                if (lim.tripped()) break;
                if (b.open.empty()) break;
                // Abandon once past the layer value with the quota met.
                if (exp >= min_exp && b.open.top()->fprime > layer_f + kQuantum) break;
                const double ic = inc.cost();
                if (!anytime && ic < kInfCost && b.open.top()->fprime >= ic) {
                    ts.pruned += b.open.size();
                    b.open.clear();
                    break;
                }
                NodeT* m = b.open.pop();
                const bool dead = anytime ? m->f >= ic : prune_test(m->f, ic, w);
                if (dead) {
                    ts.pruned++;
                    continue;
                }
                if (d.is_goal(m->state)) {
                    std::lock_guard lk(mu);
                    if (inc.improve(m)) {
                        sol.stats.trace.emplace_back(lim.elapsed_s(), m->g);
                        if (on_incumbent) on_incumbent(lim.elapsed_s(), m->g);
                    }
                    continue;
                }
                if (m->expanded) ts.reexpansions++;
                m->expanded = true;
                ts.expansions++;
                exp++;
                if (ins.f_histogram) ts.expanded_f.push_back(static_cast<float>(m->f));
                succs.clear();
                d.successors(m->state, succs);
                for (const auto& [s, c] : succs) {
                    ts.generations++;
                    Block& tb = blocks[d.abstract_id(s)];
                    const std::uint64_t key = d.state_key(s);
                    const double g2 = m->g + c;
                    NodeT* ex = tb.closed.find(key);
                    if (!ex) {
                        NodeT* n = make(tb, s, g2, m, c);
                        tb.closed.insert(n);
                        tb.open.push(n);
                    } else if (g2 < ex->g) {
                        ex->set_costs(g2, ex->h, w);
                        ex->parent = m;
                        ex->edge_cost = c;
                        if (tb.open.contains(ex))
                            tb.open.update(ex);
                        else
                            tb.open.push(ex);
                    }
                    if (&tb != &b) publish(tb);
                }
                publish(b);
                ts.note_open_size(b.open.size());
            }
            publish(b);
        }
    };

    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();

    if (lim.tripped()) {
        sol.status = lim.trip() == Limits::Trip::Timeout ? Status::Timeout
                                                         : Status::MemoryExceeded;
    } else if (inc.has_solution()) {
        auto [path, cost] = reconstruct_and_validate(d, inc.node(), w == 1.0 && !anytime);
        sol.status = Status::Solved;
        sol.cost = cost;
        sol.path = std::move(path);
    }
    for (auto& ts : tstats) sol.stats.merge_thread(ts);
    sol.stats.wall_seconds = lim.elapsed_s();
    return sol;
}

template <typename D>
Solution<typename D::State> bfpsdd_run(const D& d, int nthreads, int min_exp = 32,
                                       int k_mult = 4, double w = 1.0,
                                       bool anytime = false) {
    Limits lim;
    return bfpsdd_run(d, nthreads, min_exp, k_mult, w, anytime, nullptr, lim);
}

}  // namespace search
