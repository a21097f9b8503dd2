#pragma once

#include <atomic>
#include <thread>
#include <vector>

#include "search/limits.hpp"
#include "search/nblock_graph.hpp"
#include "search/pra.hpp"  // DupRule
#include "search/serial.hpp"
#include "search/solution.hpp"

namespace search {

enum class PbnfMode {
    Optimal,
    Weighted,
    Optimistic,
    AnytimeWeighted,
    AnytimeRepairing,
};

struct PbnfConfig {
    int nthreads = 1;
    int min_expansions = 32;
    bool safe = true;  // hot-nblocks protocol
    PbnfMode mode = PbnfMode::Optimal;
    double w = 1.0;      // weight, or the bound in Optimistic mode
    double w_agg = 0.0;  // optimistic aggressive weight; 0 = 2(bound-1)+1
    DupRule dup_rule = DupRule::Reopen;
    std::vector<double> schedule;  // AnytimeRepairing weights, ending at 1.0
    bool check_invariants = false;
    // Optimistic-mode debug: every N expansions per thread, take the graph
    // lock and check min_f front <= the f front of every nblock.
    int minf_audit_every = 0;
};

// Theorem-4 pruning: a node is dead once w * f(n) >= g(incumbent).
inline bool prune_test(double f, double incumbent_cost, double w) {
    return w * f >= incumbent_cost;
}

// Theorem-5 weak duplicate dropping, with the generating edge cost standing
// in for the optimal cost between the two states.
inline bool weak_dup_drop(double old_g, double gen_g, double edge_cost, double w) {
    return old_g <= gen_g + w * edge_cost;
}

struct PbnfAudit {
    std::vector<std::pair<double, double>> published;  // (active weight, cost)
    std::uint64_t hot_flags = 0;
    std::uint64_t hot_freed = 0;
    std::vector<std::uint32_t> unfreed_hot;
    std::uint64_t invariant_checks = 0;
    std::uint64_t resort_violations = 0;
    std::uint64_t resorts = 0;
    std::uint64_t minf_audits = 0;
};

template <typename D>
Solution<typename D::State> pbnf_run(const D& d, const PbnfConfig& cfg,
                                     const IncumbentCallback& on_incumbent, Limits& lim,
                                     const Instrument& ins = {},
                                     PbnfAudit* audit = nullptr) {
    using NodeT = Node<typename D::State>;
    using State = typename D::State;
    Solution<State> sol;

    if (cfg.nthreads < 1 || cfg.min_expansions < 1 || cfg.w < 1.0)
        throw std::invalid_argument("bad pbnf config");
    const bool repairing = cfg.mode == PbnfMode::AnytimeRepairing;
    const bool optimistic = cfg.mode == PbnfMode::Optimistic;
    if (repairing) validate_schedule(cfg.schedule);

    const double bound = optimistic ? cfg.w : 1.0;
    const double w_agg =
        optimistic ? (cfg.w_agg > 0.0 ? cfg.w_agg : 2.0 * (bound - 1.0) + 1.0) : 0.0;

    typename NBlockGraph<NodeT>::Options gopt;
    gopt.safe = cfg.safe;
    gopt.order = optimistic ? BlockOrder::Optimistic : BlockOrder::FPrime;
    // The repairing mode also keeps the min_f heap: a phase only ends once
    // the incumbent is proven w-admissible against that lower bound.
    gopt.maintain_minf = optimistic || repairing;
    gopt.check_invariants = cfg.check_invariants;
    NBlockGraph<NodeT> graph(d, gopt);
    graph.enable_lock_timing(ins.coord_timing);

    std::atomic<double> cur_w{repairing  ? cfg.schedule.front()
                              : optimistic ? w_agg
                              : cfg.mode == PbnfMode::Optimal ? 1.0
                                                              : cfg.w};

    // Resort protocol state (AnytimeRepairing).
    std::atomic<bool> resort_flag{false}, start_flag{false};
    std::atomic<std::size_t> resort_queue{0};
    std::atomic<std::uint32_t> resorted{0};
    std::atomic<int> leader_tid{-1};
    std::size_t weight_idx = 0;  // guarded by the graph lock
    std::atomic<std::uint64_t> resort_violations{0};
    std::atomic<std::uint64_t> resorts{0};
    std::atomic<std::uint64_t> minf_audits{0};

    std::vector<std::pair<double, double>> published;  // guarded by the graph lock
    std::vector<ThreadStats> tstats(static_cast<std::size_t>(cfg.nthreads));

    // Repairing-mode phase gate, called with the graph lock held: once the
    // incumbent is within w * min_f it is proven w-admissible (Theorem 4),
    // the phase ends and a resort to the next weight begins.
    auto maybe_start_resort_locked = [&](int tid, NBlockGraph<NodeT>& graph) {
        if (!repairing || resort_flag.load(std::memory_order_acquire)) return;
        if (weight_idx + 1 >= cfg.schedule.size()) return;
        const double ic = graph.incumbent().cost();
        if (ic == kInfCost) return;
        const double w_now = cur_w.load(std::memory_order_acquire);
        if (ic <= w_now * graph.minf_bound_locked()) {
            published.emplace_back(w_now, ic);  // proven phase-end incumbent
            leader_tid.store(tid, std::memory_order_release);
            resort_flag.store(true, std::memory_order_release);
            graph.set_paused_locked(true);
        }
    };

    // Insert a generated node into the open/closed structures of its nblock
    // (which must lie in the generating block's duplicate-detection scope).
    auto absorb = [&](NBlock<NodeT>& tb, const State& s, double g, NodeT* parent,
                      double edge) {
        const std::uint64_t key = d.state_key(s);
        const double w_now = cur_w.load(std::memory_order_acquire);
        NodeT* ex = tb.closed.find(key);
        if (!ex) {
            tb.arena.emplace_back();
            NodeT* n = &tb.arena.back();
            n->state = s;
            n->key = key;
            n->parent = parent;
            n->edge_cost = edge;
            n->set_costs(g, d.h(s), w_now);
            lim.charge_nodes(1);
            tb.closed.insert(n);
            tb.open.push(n);
            if (optimistic) tb.open_f.push(n);
            return;
        }
        if (g >= ex->g) return;
        if (ex->expanded) {
            const double drop_w = optimistic ? bound : w_now;
            if (cfg.dup_rule == DupRule::WeakDrop &&
                (cfg.mode == PbnfMode::Weighted || optimistic) &&
                weak_dup_drop(ex->g, g, edge, drop_w))
                return;
        }
        ex->set_costs(g, ex->h, w_now);
        ex->parent = parent;
        ex->edge_cost = edge;
        if (tb.open.contains(ex)) {
            tb.open.update(ex);
            if (optimistic) tb.open_f.update(ex);
        } else {
            tb.open.push(ex);
            if (optimistic) tb.open_f.push(ex);
        }
    };

    // Seed the root.
    {
        NBlock<NodeT>& rb = graph.block(d.abstract_id(d.initial()));
        absorb(rb, d.initial(), 0.0, nullptr, 0.0);
        graph.publish(rb);
        std::lock_guard lk(graph.mutex());
        graph.rebuild_freelist_locked();
        graph.refresh_minf_locked(rb);
    }

    auto participate_resort = [&](int tid, NBlock<NodeT>*& b, bool& saw_resort) {
        saw_resort = true;
        {
            std::lock_guard lk(graph.mutex());
            if (b) {
                graph.release_locked(*b);
                b = nullptr;
            }
        }
        const bool leader = leader_tid.load(std::memory_order_acquire) == tid;
        if (leader) {
            std::unique_lock lk(graph.mutex());
            graph.cv().wait(lk, [&] {
                return graph.acquired_count_locked() == 0 || graph.done();
            });
            if (graph.done()) return;
            weight_idx++;
            cur_w.store(cfg.schedule[weight_idx], std::memory_order_release);
            resort_queue.store(0, std::memory_order_release);
            resorted.store(0, std::memory_order_release);
            resorts.fetch_add(1, std::memory_order_relaxed);
            start_flag.store(true, std::memory_order_release);
            graph.cv().notify_all();
        } else {
            std::unique_lock lk(graph.mutex());
            graph.cv().wait(lk, [&] {
                return start_flag.load(std::memory_order_acquire) || graph.done();
            });
            if (graph.done()) return;
        }
        // Greedily drain the resort queue: re-key and resort each block.
        const double w_new = cur_w.load(std::memory_order_acquire);
        for (;;) {
            const std::size_t i = resort_queue.fetch_add(1, std::memory_order_acq_rel);
            if (i >= graph.num_blocks()) break;
            NBlock<NodeT>& blk = graph.block(static_cast<std::uint32_t>(i));
            for (NodeT* n : blk.open.raw()) n->set_costs(n->g, n->h, w_new);
            blk.open.resort();
            graph.publish(blk);
            resorted.fetch_add(1, std::memory_order_acq_rel);
        }
        graph.cv().notify_all();
        if (leader) {
            std::unique_lock lk(graph.mutex());
            graph.cv().wait(lk, [&] {
                return resorted.load(std::memory_order_acquire) >= graph.num_blocks() ||
                       graph.done();
            });
            if (!graph.done()) graph.rebuild_freelist_locked();
            start_flag.store(false, std::memory_order_release);
            resort_flag.store(false, std::memory_order_release);
            leader_tid.store(-1, std::memory_order_release);
            graph.set_paused_locked(false);
            graph.cv().notify_all();
        } else {
            std::unique_lock lk(graph.mutex());
            graph.cv().wait(lk, [&] {
                return !resort_flag.load(std::memory_order_acquire) || graph.done();
            });
        }
    };

    auto worker = [&](int tid) {
        ThreadStats& ts = tstats[static_cast<std::size_t>(tid)];
        NBlock<NodeT>* b = nullptr;
        std::vector<std::pair<State, double>> succs;
        bool saw_resort = false;
        while (!graph.done()) {
            if (repairing && resort_flag.load(std::memory_order_acquire)) {
                participate_resort(tid, b, saw_resort);
                continue;
            }
            saw_resort = false;
            b = graph.next_nblock(b, &ts);
            if (!b) break;
            if (optimistic) {
                // Proof check: the incumbent may already be within the bound
                // of the global lower bound on f.
                const double ic = graph.incumbent().cost();
                if (ic < kInfCost) {
                    std::lock_guard lk(graph.mutex());
                    if (ic <= bound * graph.minf_bound_locked()) graph.set_done_locked();
                }
                if (graph.done()) break;
            }
            if (repairing && graph.incumbent().has_solution()) {
                std::lock_guard lk(graph.mutex());
                maybe_start_resort_locked(tid, graph);
            }
            int exp = 0;
            while (!graph.should_switch(*b, cfg.min_expansions, exp, &ts)) {
                if (graph.done()) break;
                if (repairing && resort_flag.load(std::memory_order_acquire)) break;
                if ((ts.expansions & 255u) == 0) {
                    lim.poll_time();
                    if (lim.tripped()) {
                        std::lock_guard lk(graph.mutex());
                        graph.set_done_locked();
                        break;
                    }
                }
                if (optimistic && cfg.minf_audit_every > 0 &&
                    ts.expansions % static_cast<std::uint64_t>(cfg.minf_audit_every) ==
                        0) {
                    std::lock_guard lk(graph.mutex());
                    const double lb = graph.minf_bound_locked();
                    double true_min = kInfCost;
                    for (std::uint32_t i = 0; i < graph.num_blocks(); ++i)
                        true_min = std::min(
                            true_min,
                            graph.block(i).pub_f.load(std::memory_order_acquire));
                    if (lb > true_min + 1e-9)
                        throw std::logic_error("min_f bound exceeds the true minimum f");
                    minf_audits.fetch_add(1, std::memory_order_relaxed);
                }
                const double ic = graph.incumbent().cost();
                // Corollary-2 whole-list prune (unsafe for the anytime modes,
                // which must keep draining on unweighted f).
                if ((cfg.mode == PbnfMode::Optimal || cfg.mode == PbnfMode::Weighted) &&
                    ic < kInfCost && !b->open.empty() &&
                    b->open.top()->fprime >= ic) {
                    ts.pruned += b->open.size();
                    b->open.clear();
                    if (optimistic) b->open_f.clear();
                    graph.publish(*b);
                    continue;  // should_switch will see the empty block
                }
                if (b->open.empty()) continue;
                if (repairing && saw_resort && resort_flag.load(std::memory_order_acquire))
                    resort_violations.fetch_add(1, std::memory_order_relaxed);
                NodeT* m;
                if (optimistic && ic < kInfCost && b->open.top()->fprime >= ic) {
                    m = b->open_f.pop();  // cleanup phase: lowest f first
                    b->open.erase(m);
                } else {
                    m = b->open.pop();
                    if (optimistic) b->open_f.erase(m);
                }
                graph.publish(*b);
                bool prune;
                switch (cfg.mode) {
                    case PbnfMode::Weighted: prune = prune_test(m->f, ic, cfg.w); break;
                    case PbnfMode::Optimistic: prune = prune_test(m->f, ic, bound); break;
                    default: prune = m->f >= ic; break;
                }
                if (prune) {
                    ts.pruned++;
                    continue;
                }
                if (d.is_goal(m->state)) {
                    std::lock_guard lk(graph.mutex());
                    if (graph.incumbent().improve(m)) {
                        sol.stats.trace.emplace_back(lim.elapsed_s(), m->g);
                        if (on_incumbent) on_incumbent(lim.elapsed_s(), m->g);
                        graph.on_incumbent_changed_locked();
                        if (optimistic &&
                            m->g <= bound * graph.minf_bound_locked())
                            graph.set_done_locked();
                        maybe_start_resort_locked(tid, graph);
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
                    const std::uint32_t target = d.abstract_id(s);
                    if (cfg.check_invariants && target != b->id) {
                        const auto& sc = graph.scope().succs(b->id);
                        if (!std::binary_search(sc.begin(), sc.end(), target))
                            throw std::logic_error(
                                "generation escaped the duplicate-detection scope");
                    }
                    NBlock<NodeT>& tb = graph.block(target);
                    absorb(tb, s, m->g + c, m, c);
                    if (&tb != b) graph.publish(tb);
                }
                graph.publish(*b);
                ts.note_open_size(b->open.size());
            }
        }
        if (b) graph.release(*b, &ts);
    };

    std::vector<std::thread> pool;
    for (int t = 0; t < cfg.nthreads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();

    auto& inc = graph.incumbent();
    if (repairing && !lim.tripped() && inc.has_solution())
        published.emplace_back(cur_w.load(), inc.cost());  // final phase, exhausted
    if (lim.tripped()) {
        sol.status = lim.trip() == Limits::Trip::Timeout ? Status::Timeout
                                                         : Status::MemoryExceeded;
    } else if (inc.has_solution()) {
        const bool exact = cfg.mode == PbnfMode::Optimal;
        auto [path, cost] = reconstruct_and_validate(d, inc.node(), exact);
        sol.status = Status::Solved;
        sol.cost = cost;
        sol.path = std::move(path);
    }
    for (auto& ts : tstats) sol.stats.merge_thread(ts);
    sol.stats.wall_seconds = lim.elapsed_s();
    if (audit) {
        audit->published = std::move(published);
        audit->hot_flags = graph.hot_flag_events();
        audit->hot_freed = graph.hot_freed_events();
        audit->unfreed_hot = graph.unfreed_hot_blocks();
        audit->invariant_checks = graph.invariant_checks();
        audit->resort_violations = resort_violations.load();
        audit->resorts = resorts.load();
        audit->minf_audits = minf_audits.load();
    }
    return sol;
}

template <typename D>
Solution<typename D::State> pbnf_run(const D& d, const PbnfConfig& cfg) {
    Limits lim;
    return pbnf_run(d, cfg, nullptr, lim);
}

}  // namespace search
