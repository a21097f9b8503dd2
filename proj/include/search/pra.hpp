#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>
#include <vector>

#include "search/closed_list.hpp"
#include "search/incumbent.hpp"
#include "search/limits.hpp"
#include "search/node.hpp"
#include "search/open_list.hpp"
#include "search/serial.hpp"
#include "search/solution.hpp"
#include "search/stats.hpp"

namespace search {

enum class SendMode { Sync, Async };
enum class RecvMode { Sync, Async };
enum class Routing { StateHash, Abstraction };
enum class DupRule { Reopen, WeakDrop };
enum class PraMode { Optimal, Weighted, Anytime };

struct PraConfig {
    int nthreads = 1;
    SendMode send_mode = SendMode::Async;
    RecvMode recv_mode = RecvMode::Async;
    Routing routing = Routing::Abstraction;
    double w = 1.0;
    PraMode mode = PraMode::Optimal;
    DupRule dup_rule = DupRule::Reopen;
    int flush_period = 64;  // expansions between outgoing flush attempts
};

// AHDA* in the nomenclature used throughout: async sends and receives with
// abstraction-based routing.
inline PraConfig ahda_config(int nthreads, double w = 1.0,
                             PraMode mode = PraMode::Optimal) {
    PraConfig cfg;
    cfg.nthreads = nthreads;
    cfg.w = w;
    cfg.mode = mode;
    return cfg;
}

inline PraConfig apra_config(int nthreads, double w = 1.0,
                             PraMode mode = PraMode::Optimal) {
    PraConfig cfg;
    cfg.nthreads = nthreads;
    cfg.send_mode = SendMode::Sync;
    cfg.recv_mode = RecvMode::Sync;
    cfg.w = w;
    cfg.mode = mode;
    return cfg;
}

// Thread index a generated node is shipped to.
template <typename D>
int route_node(const D& d, const typename D::State& s, Routing routing, int nthreads) {
    if (routing == Routing::StateHash)
        return static_cast<int>(d.state_key(s) % static_cast<std::uint64_t>(nthreads));
    return static_cast<int>(d.abstract_id(s) % static_cast<std::uint32_t>(nthreads));
}

// Global-quiescence predicate: no transfer in flight anywhere, every thread
// idle, and every local open list empty or fully prunable against the
// incumbent under the active bound.
struct PraTerminationView {
    std::int64_t in_flight = 0;
    int idle = 0;
    int nthreads = 0;
    std::vector<bool> quiescent;  // per thread
};

inline bool pra_terminated(const PraTerminationView& v) {
    if (v.in_flight != 0) return false;
    if (v.idle != v.nthreads) return false;
    for (bool q : v.quiescent)
        if (!q) return false;
    return true;
}

template <typename D>
Solution<typename D::State> pra_run(const D& d, const PraConfig& cfg,
                                    const IncumbentCallback& on_incumbent, Limits& lim,
                                    const Instrument& ins = {},
                                    std::vector<std::vector<std::uint64_t>>*
                                        closed_keys_out = nullptr) {
    using NodeT = Node<typename D::State>;
    using State = typename D::State;
    if (cfg.nthreads < 1 || cfg.w < 1.0 || cfg.flush_period < 1)
        throw std::invalid_argument("bad pra config");
    const int T = cfg.nthreads;
    const double w = cfg.w;
    const bool fprime_order = cfg.mode != PraMode::Optimal || w > 1.0;

    Solution<State> sol;

    struct Transfer {
        State state;
        double g;
        double edge_cost;
        NodeT* parent;
    };

    struct Inbox {
        std::mutex mu;
        std::condition_variable cv;
        std::vector<Transfer> buf;
    };

    std::vector<Inbox> inboxes(static_cast<std::size_t>(T));
    Incumbent<NodeT> inc;
    std::mutex inc_mu;
    std::atomic<std::int64_t> in_flight{0};
    std::atomic<int> idle_count{0};
    std::vector<std::atomic<bool>> quiescent(static_cast<std::size_t>(T));
    for (auto& q : quiescent) q.store(false);
    std::atomic<bool> done{false};

    std::vector<std::deque<NodeT>> arenas(static_cast<std::size_t>(T));
    std::vector<ThreadStats> tstats(static_cast<std::size_t>(T));
    std::vector<std::vector<std::uint64_t>> closed_keys(static_cast<std::size_t>(T));

    auto broadcast_done = [&] {
        done.store(true, std::memory_order_release);
        for (auto& ib : inboxes) ib.cv.notify_all();
    };

    auto worker = [&](int tid) {
        ThreadStats& ts = tstats[static_cast<std::size_t>(tid)];
        auto& arena = arenas[static_cast<std::size_t>(tid)];
        OpenList<NodeT*, FPrimeOrder, OpenIdx> open;  // fprime == f when w == 1
        if (ins.open_timing) open.instrument(&ts);
        ClosedList<NodeT> closed;
        std::vector<std::vector<Transfer>> outgoing(static_cast<std::size_t>(T));
        std::vector<Transfer> scratch;
        std::vector<std::pair<State, double>> succs;
        int since_flush = 0;

        auto make = [&](const State& s, double g, NodeT* parent, double edge) {
            arena.emplace_back();
            NodeT* n = &arena.back();
            n->state = s;
            n->key = d.state_key(s);
            n->parent = parent;
            n->edge_cost = edge;
            n->set_costs(g, d.h(s), w);
            lim.charge_nodes(1);
            return n;
        };

        // A node owned by this thread: check against the local closed list.
        auto absorb = [&](const State& s, double g, NodeT* parent, double edge) {
            const std::uint64_t key = d.state_key(s);
            NodeT* ex = closed.find(key);
            if (!ex) {
                NodeT* n = make(s, g, parent, edge);
                closed.insert(n);
                open.push(n);
                return;
            }
            if (g >= ex->g) return;
            if (ex->expanded && cfg.mode == PraMode::Weighted &&
                cfg.dup_rule == DupRule::WeakDrop && ex->g <= g + w * edge)
                return;  // Theorem-5 style weak drop
            ex->set_costs(g, ex->h, w);
            ex->parent = parent;
            ex->edge_cost = edge;
            if (open.contains(ex))
                open.update(ex);
            else
                open.push(ex);
        };

        auto process_batch = [&](std::vector<Transfer>& batch) {
            for (const Transfer& tr : batch)
                absorb(tr.state, tr.g, tr.parent, tr.edge_cost);
            in_flight.fetch_sub(static_cast<std::int64_t>(batch.size()),
                                std::memory_order_acq_rel);
            batch.clear();
        };

        // Returns true when anything was received.
        auto recv = [&](bool blocking) {
            Inbox& ib = inboxes[static_cast<std::size_t>(tid)];
            if (blocking) {
                WaitTimer lt(ins.coord_timing, ts.lock_wait_seconds);
                std::unique_lock lk(ib.mu);
                scratch.swap(ib.buf);
            } else {
                std::unique_lock lk(ib.mu, std::try_to_lock);
                if (!lk.owns_lock()) return false;
                scratch.swap(ib.buf);
            }
            if (scratch.empty()) return false;
            process_batch(scratch);
            return true;
        };

        auto deliver = [&](int peer, const Transfer& tr) {
            Inbox& ib = inboxes[static_cast<std::size_t>(peer)];
            in_flight.fetch_add(1, std::memory_order_acq_rel);
            if (cfg.send_mode == SendMode::Sync) {
                ts.blocking_sends++;
                WaitTimer lt(ins.coord_timing, ts.lock_wait_seconds);
                std::lock_guard lk(ib.mu);
                ib.buf.push_back(tr);
            } else {
                std::unique_lock lk(ib.mu, std::try_to_lock);
                if (lk.owns_lock()) {
                    ib.buf.push_back(tr);
                } else {
                    outgoing[static_cast<std::size_t>(peer)].push_back(tr);
                    return;  // parked locally; no notify needed yet
                }
            }
            ib.cv.notify_one();
        };

        // Try to hand parked transfers over; blocking empties everything.
        auto flush_outgoing = [&](bool blocking) {
            for (int p = 0; p < T; ++p) {
                auto& buf = outgoing[static_cast<std::size_t>(p)];
                if (buf.empty()) continue;
                Inbox& ib = inboxes[static_cast<std::size_t>(p)];
                if (blocking) {
                    WaitTimer lt(ins.coord_timing, ts.lock_wait_seconds);
                    std::lock_guard lk(ib.mu);
                    ib.buf.insert(ib.buf.end(), buf.begin(), buf.end());
                } else {
                    std::unique_lock lk(ib.mu, std::try_to_lock);
                    if (!lk.owns_lock()) continue;
                    ib.buf.insert(ib.buf.end(), buf.begin(), buf.end());
                }
                buf.clear();
                ib.cv.notify_one();
            }
        };

        if (tid == route_node(d, d.initial(), cfg.routing, T))
            absorb(d.initial(), 0.0, nullptr, 0.0);

        while (!done.load(std::memory_order_acquire)) {
            if ((ts.expansions & 255u) == 0) {
                lim.poll_time();
                if (lim.tripped()) {
                    broadcast_done();
                    break;
                }
            }
            // Receive phase: sync mode blocks on the inbox lock every
            // expansion; async only tries it.
            recv(cfg.recv_mode == RecvMode::Sync);

            // Whole-list pruning against the incumbent (Corollary-2 form);
            // anytime mode must drain per node to preserve optimality.
            const double ic = inc.cost();
            if (!open.empty() && ic < kInfCost && cfg.mode != PraMode::Anytime) {
                const double front = open.top()->fprime;
                if (front >= ic) {
                    ts.pruned += open.size();
                    open.clear();
                }
            }

            if (open.empty()) {
                flush_outgoing(true);
                // Idle protocol: wait for mail or global termination. The
                // quiescent flag is cleared before every drain so a
                // concurrent termination check can never see this thread as
                // quiescent while it is absorbing transfers.
                idle_count.fetch_add(1, std::memory_order_acq_rel);
                while (!done.load(std::memory_order_acquire)) {
                    quiescent[static_cast<std::size_t>(tid)].store(
                        false, std::memory_order_release);
                    recv(true);
                    if (!open.empty()) break;
                    quiescent[static_cast<std::size_t>(tid)].store(
                        true, std::memory_order_release);
                    PraTerminationView view;
                    view.in_flight = in_flight.load(std::memory_order_acquire);
                    view.idle = idle_count.load(std::memory_order_acquire);
                    view.nthreads = T;
                    for (auto& q : quiescent)
                        view.quiescent.push_back(q.load(std::memory_order_acquire));
                    if (pra_terminated(view)) {
                        broadcast_done();
                        break;
                    }
                    Inbox& ib = inboxes[static_cast<std::size_t>(tid)];
                    WaitTimer wt(ins.coord_timing, ts.free_wait_seconds);
                    std::unique_lock lk(ib.mu);
                    if (ib.buf.empty())
                        ib.cv.wait_for(lk, std::chrono::microseconds(200));
                }
                idle_count.fetch_sub(1, std::memory_order_acq_rel);
                quiescent[static_cast<std::size_t>(tid)].store(false,
                                                               std::memory_order_release);
                continue;
            }

            NodeT* m = open.pop();
            const double ic2 = inc.cost();
            bool prune = false;
            switch (cfg.mode) {
                case PraMode::Optimal: prune = m->f >= ic2; break;
                case PraMode::Weighted: prune = w * m->f >= ic2; break;
                case PraMode::Anytime: prune = m->f >= ic2; break;
            }
            if (prune) {
                ts.pruned++;
                continue;
            }
            if (d.is_goal(m->state)) {
                std::lock_guard ik(inc_mu);
                if (inc.improve(m)) {
                    sol.stats.trace.emplace_back(lim.elapsed_s(), m->g);
                    if (on_incumbent) on_incumbent(lim.elapsed_s(), m->g);
                }
                continue;
            }
            if (m->expanded) ts.reexpansions++;
            m->expanded = true;
            ts.expansions++;
            if (ins.f_histogram) ts.expanded_f.push_back(static_cast<float>(m->f));
            succs.clear();
            d.successors(m->state, succs);
            for (const auto& [s, c] : succs) {
                ts.generations++;
                ts.routed++;
                const int peer = route_node(d, s, cfg.routing, T);
                if (peer == tid) {
                    ts.self_routed++;
                    absorb(s, m->g + c, m, c);
                } else {
                    deliver(peer, Transfer{s, m->g + c, c, m});
                }
            }
            ts.note_open_size(open.size());
            if (cfg.send_mode == SendMode::Async &&
                ++since_flush >= cfg.flush_period) {
                flush_outgoing(false);
                since_flush = 0;
            }
        }

        if (closed_keys_out) {
            auto& keys = closed_keys[static_cast<std::size_t>(tid)];
            for (const auto& [key, node] : closed) keys.push_back(key);
        }
    };

    std::vector<std::thread> pool;
    for (int t = 0; t < T; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();

    if (lim.tripped()) {
        sol.status = lim.trip() == Limits::Trip::Timeout ? Status::Timeout
                                                         : Status::MemoryExceeded;
    } else if (inc.has_solution()) {
        const bool exact = cfg.mode == PraMode::Optimal && w == 1.0;
        auto [path, cost] = reconstruct_and_validate(d, inc.node(), exact);
        sol.status = Status::Solved;
        sol.cost = cost;
        sol.path = std::move(path);
    }
    for (auto& ts : tstats) sol.stats.merge_thread(ts);
    sol.stats.wall_seconds = lim.elapsed_s();
    if (closed_keys_out) *closed_keys_out = std::move(closed_keys);
    return sol;
}

template <typename D>
Solution<typename D::State> pra_run(const D& d, const PraConfig& cfg) {
    Limits lim;
    return pra_run(d, cfg, nullptr, lim);
}

}  // namespace search
