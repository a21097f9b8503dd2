#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>
#include <tuple>
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

// ---------------------------------------------------------------------------
// PA*: one shared open list and one shared closed list, each behind its own
// mutex. Terminates when every thread is idle and the open list holds
// nothing below the incumbent.
// ---------------------------------------------------------------------------

template <typename D>
Solution<typename D::State> pastar(const D& d, int nthreads, Limits& lim,
                                   const Instrument& ins = {}) {
    using NodeT = Node<typename D::State>;
    Solution<typename D::State> sol;

    std::mutex open_mu;  // guards open and idle/done
    std::condition_variable open_cv;
    OpenList<NodeT*, FOrder, OpenIdx> open;
    std::mutex closed_mu;  // guards closed and the arena
    ClosedList<NodeT> closed;
    std::deque<NodeT> arena;
    Incumbent<NodeT> inc;
    std::mutex inc_mu;
    int idle = 0;
    bool done = false;

    auto make = [&](const typename D::State& s, double g, NodeT* parent,
                    double edge) {
        arena.emplace_back();
        NodeT* n = &arena.back();
        n->state = s;
        n->key = d.state_key(s);
        n->parent = parent;
        n->edge_cost = edge;
        n->set_costs(g, d.h(s), 1.0);
        lim.charge_nodes(1);
        return n;
    };

    {
        std::scoped_lock lk(closed_mu, open_mu);
        NodeT* root = make(d.initial(), 0.0, nullptr, 0.0);
        closed.insert(root);
        open.push(root);
    }

    std::vector<ThreadStats> tstats(static_cast<std::size_t>(nthreads));
    auto worker = [&](int tid) {
        ThreadStats& ts = tstats[static_cast<std::size_t>(tid)];
        std::vector<std::pair<typename D::State, double>> succs;
        for (;;) {
            NodeT* m = nullptr;
            {
                WaitTimer lt(ins.coord_timing, ts.lock_wait_seconds);
                std::unique_lock lk(open_mu);
                for (;;) {
                    if (done) return;
                    if (lim.tripped()) {
                        done = true;
                        open_cv.notify_all();
                        return;
                    }
                    if (!open.empty() && open.top()->f < inc.cost()) {
                        m = open.pop();
                        break;
                    }
                    idle++;
                    if (idle == nthreads) {
                        done = true;
                        open_cv.notify_all();
                        return;
                    }
                    {
                        WaitTimer wt(ins.coord_timing, ts.free_wait_seconds);
                        open_cv.wait(lk);
                    }
                    idle--;
                }
            }
            if ((ts.expansions & 255u) == 0) lim.poll_time();
            if (d.is_goal(m->state)) {
                std::lock_guard ik(inc_mu);
                inc.improve(m);
                continue;
            }
            if (m->expanded) ts.reexpansions++;
            m->expanded = true;
            ts.expansions++;
            if (ins.f_histogram) ts.expanded_f.push_back(static_cast<float>(m->f));
            succs.clear();
            d.successors(m->state, succs);
            bool pushed = false;
            for (const auto& [s, c] : succs) {
                ts.generations++;
                const std::uint64_t key = d.state_key(s);
                const double g2 = m->g + c;
                WaitTimer lt(ins.coord_timing, ts.lock_wait_seconds);
                std::lock_guard ck(closed_mu);
                NodeT* ex = closed.find(key);
                if (!ex) {
                    NodeT* n = make(s, g2, m, c);
                    closed.insert(n);
                    std::lock_guard ok(open_mu);
                    open.push(n);
                    pushed = true;
                } else if (g2 < ex->g) {
                    std::lock_guard ok(open_mu);
                    ex->set_costs(g2, ex->h, 1.0);
                    ex->parent = m;
                    ex->edge_cost = c;
                    if (open.contains(ex))
                        open.update(ex);
                    else
                        open.push(ex);
                    pushed = true;
                }
            }
            if (pushed) open_cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();

    if (lim.tripped()) {
        sol.status = lim.trip() == Limits::Trip::Timeout ? Status::Timeout
                                                         : Status::MemoryExceeded;
    } else if (inc.has_solution()) {
        auto [path, cost] = reconstruct_and_validate(d, inc.node());
        sol.status = Status::Solved;
        sol.cost = cost;
        sol.path = std::move(path);
    }
    for (auto& ts : tstats) sol.stats.merge_thread(ts);
    sol.stats.max_open_size = 0;
    sol.stats.wall_seconds = lim.elapsed_s();
    return sol;
}

template <typename D>
Solution<typename D::State> pastar(const D& d, int nthreads) {
    Limits lim;
    return pastar(d, nthreads, lim);
}

// ---------------------------------------------------------------------------
// KBFS: the master pops the k best nodes, workers expand them in parallel,
// and the master waits for the whole batch before checking children against
// the closed list. Open and closed need no locks.
// ---------------------------------------------------------------------------

// (worker, batch, phase 0=start 1=end, global sequence number)
using KbfsBatchLog = std::vector<std::tuple<int, int, int, std::uint64_t>>;

template <typename D>
Solution<typename D::State> kbfs(const D& d, int nthreads, int k, Limits& lim,
                                 const Instrument& ins = {},
                                 KbfsBatchLog* batch_log = nullptr) {
    using NodeT = Node<typename D::State>;
    if (k < nthreads || nthreads < 1)
        throw std::invalid_argument("kbfs needs k >= nthreads >= 1");
    Solution<typename D::State> sol;
    ThreadStats ts;

    OpenList<NodeT*, FOrder, OpenIdx> open;
    if (ins.open_timing) open.instrument(&ts);
    ClosedList<NodeT> closed;
    std::deque<NodeT> arena;
    NodeT* inc = nullptr;
    double inc_cost = kInfCost;

    auto make = [&](const typename D::State& s, double g, NodeT* parent, double edge) {
        arena.emplace_back();
        NodeT* n = &arena.back();
        n->state = s;
        n->key = d.state_key(s);
        n->parent = parent;
        n->edge_cost = edge;
        n->set_costs(g, d.h(s), 1.0);
        lim.charge_nodes(1);
        return n;
    };

    NodeT* root = make(d.initial(), 0.0, nullptr, 0.0);
    closed.insert(root);
    open.push(root);

    struct ChildRec {
        NodeT* parent;
        typename D::State state;
        double cost;
    };

    std::mutex mu;
    std::condition_variable cv_start, cv_done;
    std::vector<std::vector<NodeT*>> slices(static_cast<std::size_t>(nthreads));
    std::vector<std::vector<ChildRec>> results(static_cast<std::size_t>(nthreads));
    int batch_id = 0;
    int pending = 0;
    bool stop = false;
    std::atomic<std::uint64_t> seq{0};
    std::mutex log_mu;

    auto worker = [&](int tid) {
        std::vector<std::pair<typename D::State, double>> succs;
        int last_batch = 0;
        for (;;) {
            {
                std::unique_lock lk(mu);
                cv_start.wait(lk, [&] { return stop || batch_id > last_batch; });
                if (stop) return;
                last_batch = batch_id;
            }
            if (batch_log) {
                std::lock_guard lg(log_mu);
                batch_log->emplace_back(tid, last_batch, 0, seq.fetch_add(1));
            }
            auto& mine = slices[static_cast<std::size_t>(tid)];
            auto& out = results[static_cast<std::size_t>(tid)];
            out.clear();
            for (NodeT* m : mine) {
                succs.clear();
                d.successors(m->state, succs);
                for (const auto& [s, c] : succs) out.push_back({m, s, c});
            }
            if (batch_log) {
                std::lock_guard lg(log_mu);
                batch_log->emplace_back(tid, last_batch, 1, seq.fetch_add(1));
            }
            {
                std::lock_guard lk(mu);
                pending--;
            }
            cv_done.notify_one();
        }
    };

    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);

    std::vector<NodeT*> batch;
    for (;;) {
        lim.poll_time();
        if (lim.tripped()) break;
        batch.clear();
        while (static_cast<int>(batch.size()) < k && !open.empty() &&
               open.top()->f < inc_cost) {
            NodeT* m = open.pop();
            if (d.is_goal(m->state)) {
                if (m->g < inc_cost) {
                    inc = m;
                    inc_cost = m->g;
                }
                continue;
            }
            batch.push_back(m);
        }
        if (batch.empty()) break;  // solved or exhausted

        for (auto& s : slices) s.clear();
        for (std::size_t i = 0; i < batch.size(); ++i) {
            NodeT* m = batch[i];
            if (m->expanded) ts.reexpansions++;
            m->expanded = true;
            ts.expansions++;
            if (ins.f_histogram) ts.expanded_f.push_back(static_cast<float>(m->f));
            slices[i % static_cast<std::size_t>(nthreads)].push_back(m);
        }
        {
            std::lock_guard lk(mu);
            batch_id++;
            pending = nthreads;
        }
        cv_start.notify_all();
        {
            std::unique_lock lk(mu);
            WaitTimer wt(ins.coord_timing, ts.free_wait_seconds);
            cv_done.wait(lk, [&] { return pending == 0; });
        }
        for (auto& out : results) {
            for (const ChildRec& cr : out) {
                ts.generations++;
                const std::uint64_t key = d.state_key(cr.state);
                const double g2 = cr.parent->g + cr.cost;
                NodeT* ex = closed.find(key);
                if (!ex) {
                    NodeT* n = make(cr.state, g2, cr.parent, cr.cost);
                    closed.insert(n);
                    open.push(n);
                } else if (g2 < ex->g) {
                    ex->set_costs(g2, ex->h, 1.0);
                    ex->parent = cr.parent;
                    ex->edge_cost = cr.cost;
                    if (open.contains(ex))
                        open.update(ex);
                    else
                        open.push(ex);
                }
            }
        }
        ts.note_open_size(open.size());
    }

    {
        std::lock_guard lk(mu);
        stop = true;
    }
    cv_start.notify_all();
    for (auto& th : pool) th.join();

    if (lim.tripped()) {
        sol.status = lim.trip() == Limits::Trip::Timeout ? Status::Timeout
                                                         : Status::MemoryExceeded;
    } else if (inc) {
        auto [path, cost] = reconstruct_and_validate(d, inc);
        sol.status = Status::Solved;
        sol.cost = cost;
        sol.path = std::move(path);
    }
    sol.stats.merge_thread(ts);
    sol.stats.wall_seconds = lim.elapsed_s();
    return sol;
}

template <typename D>
Solution<typename D::State> kbfs(const D& d, int nthreads, int k) {
    Limits lim;
    return kbfs(d, nthreads, k, lim);
}

// ---------------------------------------------------------------------------
// Multi-weighted A*: each thread claims the highest unclaimed weight from
// the schedule and runs its own weighted A*; the incumbent is shared for
// pruning, on the unweighted f.
// ---------------------------------------------------------------------------

// (thread, schedule index) in claim order
using ClaimLog = std::vector<std::pair<int, std::size_t>>;

template <typename D>
Solution<typename D::State> multi_wastar(const D& d, int nthreads,
                                         const std::vector<double>& schedule,
                                         const IncumbentCallback& on_incumbent,
                                         Limits& lim, const Instrument& ins = {},
                                         ClaimLog* claims = nullptr,
                                         std::vector<std::pair<double, double>>*
                                             published_out = nullptr) {
    using NodeT = Node<typename D::State>;
    validate_schedule(schedule);
    Solution<typename D::State> sol;

    std::atomic<std::size_t> next_idx{0};
    Incumbent<NodeT> inc;
    std::mutex inc_mu;
    std::mutex log_mu;
    std::vector<std::deque<NodeT>> arenas(static_cast<std::size_t>(nthreads));
    std::vector<ThreadStats> tstats(static_cast<std::size_t>(nthreads));
    // (weight, cost) pairs for every published incumbent, for admissibility checks
    std::vector<std::pair<double, double>> published;

    auto worker = [&](int tid) {
        ThreadStats& ts = tstats[static_cast<std::size_t>(tid)];
        auto& arena = arenas[static_cast<std::size_t>(tid)];
        std::vector<std::pair<typename D::State, double>> succs;
        for (;;) {
            const std::size_t idx = next_idx.fetch_add(1);
            if (idx >= schedule.size()) return;
            const double w = schedule[idx];
            if (claims) {
                std::lock_guard lg(log_mu);
                claims->emplace_back(tid, idx);
            }
            OpenList<NodeT*, FPrimeOrder, OpenIdx> open;
            ClosedList<NodeT> closed;
            auto make = [&](const typename D::State& s, double g, NodeT* parent,
                            double edge) {
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
            NodeT* root = make(d.initial(), 0.0, nullptr, 0.0);
            closed.insert(root);
            open.push(root);
            while (!open.empty()) {
                if ((ts.expansions & 1023u) == 0) lim.poll_time();
                if (lim.tripped()) return;
                NodeT* m = open.pop();
                if (m->f >= inc.cost()) {
                    ts.pruned++;
                    continue;
                }
                if (d.is_goal(m->state)) {
                    std::lock_guard ik(inc_mu);
                    if (inc.improve(m)) {
                        published.emplace_back(w, m->g);
                        sol.stats.trace.emplace_back(lim.elapsed_s(), m->g);
                        if (on_incumbent) on_incumbent(lim.elapsed_s(), m->g);
                    }
                    break;  // this weight is finished; claim the next one
                }
                m->expanded = true;
                ts.expansions++;
                if (ins.f_histogram) ts.expanded_f.push_back(static_cast<float>(m->f));
                succs.clear();
                d.successors(m->state, succs);
                for (const auto& [s, c] : succs) {
                    ts.generations++;
                    const std::uint64_t key = d.state_key(s);
                    const double g2 = m->g + c;
                    NodeT* ex = closed.find(key);
                    if (!ex) {
                        NodeT* n = make(s, g2, m, c);
                        closed.insert(n);
                        open.push(n);
                    } else if (g2 < ex->g) {
                        ex->set_costs(g2, ex->h, w);
                        ex->parent = m;
                        ex->edge_cost = c;
                        if (open.contains(ex))
                            open.update(ex);
                        else
                            open.push(ex);
                    }
                }
                ts.note_open_size(open.size());
            }
        }
    };

    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();

    if (lim.tripped()) {
        sol.status = lim.trip() == Limits::Trip::Timeout ? Status::Timeout
                                                         : Status::MemoryExceeded;
    } else if (inc.has_solution()) {
        auto [path, cost] = reconstruct_and_validate(d, inc.node(), /*exact=*/false);
        sol.status = Status::Solved;
        sol.cost = cost;
        sol.path = std::move(path);
    }
    for (auto& ts : tstats) sol.stats.merge_thread(ts);
    sol.stats.wall_seconds = lim.elapsed_s();
    if (published_out) *published_out = std::move(published);
    return sol;
}

template <typename D>
Solution<typename D::State> multi_wastar(const D& d, int nthreads,
                                         const std::vector<double>& schedule) {
    Limits lim;
    return multi_wastar(d, nthreads, schedule, nullptr, lim);
}

}  // namespace search
