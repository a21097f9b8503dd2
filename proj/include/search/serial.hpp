#pragma once

#include <deque>
#include <functional>
#include <stdexcept>
#include <vector>

#include "search/closed_list.hpp"
#include "search/incumbent.hpp"
#include "search/limits.hpp"
#include "search/node.hpp"
#include "search/open_list.hpp"
#include "search/solution.hpp"
#include "search/stats.hpp"

namespace search {

enum class DupMode { Reopen, DropPerLikhachev };

using IncumbentCallback = std::function<void(double seconds, double cost)>;

namespace detail {

template <typename D>
struct Space {
    using NodeT = Node<typename D::State>;

    const D& dom;
    double w;
    Limits& lim;
    std::deque<NodeT> arena;
    ClosedList<NodeT> closed;

    Space(const D& d, double weight, Limits& l) : dom(d), w(weight), lim(l) {}

    NodeT* make(const typename D::State& s, double g, NodeT* parent, double edge) {
        arena.emplace_back();
        NodeT* n = &arena.back();
        n->state = s;
        n->key = dom.state_key(s);
        n->parent = parent;
        n->edge_cost = edge;
        n->set_costs(g, dom.h(s), w);
        lim.charge_nodes(1);
        return n;
    }

    NodeT* root() {
        NodeT* n = make(dom.initial(), 0.0, nullptr, 0.0);
        closed.insert(n);
        return n;
    }
};

template <typename Sol>
bool tripped_status(const Limits& lim, Sol& sol) {
    if (!lim.tripped()) return false;
    sol.status = lim.trip() == Limits::Trip::Timeout ? Status::Timeout
                                                     : Status::MemoryExceeded;
    return true;
}

}  // namespace detail

// Textbook A* over the domain's f ordering. Optimal for admissible h.
template <typename D>
Solution<typename D::State> astar(const D& d, Limits& lim, const Instrument& ins = {}) {
    using NodeT = Node<typename D::State>;
    Solution<typename D::State> sol;
    ThreadStats ts;
    detail::Space<D> sp(d, 1.0, lim);
    OpenList<NodeT*, FOrder, OpenIdx> open;
    if (ins.open_timing) open.instrument(&ts);

    open.push(sp.root());
    std::vector<std::pair<typename D::State, double>> succs;
    while (!open.empty()) {
        if ((ts.expansions & 1023u) == 0) lim.poll_time();
        if (detail::tripped_status(lim, sol)) break;
        NodeT* m = open.pop();
        if (d.is_goal(m->state)) {
            auto [path, cost] = reconstruct_and_validate(d, m);
            sol.status = Status::Solved;
            sol.cost = cost;
            sol.path = std::move(path);
            break;
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
            NodeT* ex = sp.closed.find(key);
            if (!ex) {
                NodeT* n = sp.make(s, g2, m, c);
                sp.closed.insert(n);
                open.push(n);
            } else if (g2 < ex->g) {
                ex->set_costs(g2, ex->h, 1.0);
                ex->parent = m;
                ex->edge_cost = c;
                if (open.contains(ex))
                    open.update(ex);
                else
                    open.push(ex);  // reopen
            }
        }
        ts.note_open_size(open.size());
    }
    sol.stats.merge_thread(ts);
    sol.stats.wall_seconds = lim.elapsed_s();
    return sol;
}

template <typename D>
Solution<typename D::State> astar(const D& d) {
    Limits lim;
    return astar(d, lim);
}

// Weighted A*: orders on f' = g + w*h and stops at the first goal pop,
// which is w-admissible. DropPerLikhachev never reopens an expanded state
// (sound for consistent h); Reopen is the classical rule.
template <typename D>
Solution<typename D::State> wastar(const D& d, double w, DupMode dup, Limits& lim,
                                   const Instrument& ins = {}) {
    using NodeT = Node<typename D::State>;
    if (w < 1.0) throw std::invalid_argument("weight must be >= 1");
    Solution<typename D::State> sol;
    ThreadStats ts;
    detail::Space<D> sp(d, w, lim);
    OpenList<NodeT*, FPrimeOrder, OpenIdx> open;
    if (ins.open_timing) open.instrument(&ts);

    open.push(sp.root());
    std::vector<std::pair<typename D::State, double>> succs;
    while (!open.empty()) {
        if ((ts.expansions & 1023u) == 0) lim.poll_time();
        if (detail::tripped_status(lim, sol)) break;
        NodeT* m = open.pop();
        if (d.is_goal(m->state)) {
            auto [path, cost] = reconstruct_and_validate(d, m);
            sol.status = Status::Solved;
            sol.cost = cost;
            sol.path = std::move(path);
            break;
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
            NodeT* ex = sp.closed.find(key);
            if (!ex) {
                NodeT* n = sp.make(s, g2, m, c);
                sp.closed.insert(n);
                open.push(n);
            } else if (g2 < ex->g) {
                if (dup == DupMode::DropPerLikhachev && ex->expanded) continue;
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
    sol.stats.merge_thread(ts);
    sol.stats.wall_seconds = lim.elapsed_s();
    return sol;
}

template <typename D>
Solution<typename D::State> wastar(const D& d, double w,
                                   DupMode dup = DupMode::Reopen) {
    Limits lim;
    return wastar(d, w, dup, lim);
}

// Optimistic search: aggressive weighted phase to find an incumbent, then
// cleanup on f until bound * min_f >= incumbent proves the bound.
template <typename D>
Solution<typename D::State> optimistic_search(const D& d, double bound, double w_agg,
                                              Limits& lim, const Instrument& ins = {}) {
    using NodeT = Node<typename D::State>;
    if (bound < 1.0 || w_agg < bound)
        throw std::invalid_argument("need w_agg >= bound >= 1");
    Solution<typename D::State> sol;
    ThreadStats ts;
    detail::Space<D> sp(d, w_agg, lim);
    OpenList<NodeT*, FPrimeOrder, OpenIdx> open;
    OpenList<NodeT*, FOrder, OpenFIdx> open_f;
    if (ins.open_timing) open.instrument(&ts);

    NodeT* root = sp.root();
    open.push(root);
    open_f.push(root);
    NodeT* inc = nullptr;
    double inc_cost = kInfCost;

    std::vector<std::pair<typename D::State, double>> succs;
    for (;;) {
        if ((ts.expansions & 1023u) == 0) lim.poll_time();
        if (detail::tripped_status(lim, sol)) break;
        if (open_f.empty()) break;
        if (inc && bound * open_f.top()->f >= inc_cost) break;  // bound proven
        // In the aggressive phase pop by f'; cleanup pops the lowest f.
        NodeT* m;
        if (!inc || open.top()->fprime < inc_cost) {
            m = open.pop();
            open_f.erase(m);
        } else {
            m = open_f.pop();
            open.erase(m);
        }
        if (inc && bound * m->f >= inc_cost) {
            ts.pruned++;
            continue;
        }
        if (d.is_goal(m->state)) {
            if (m->g < inc_cost) {
                inc = m;
                inc_cost = m->g;
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
            const std::uint64_t key = d.state_key(s);
            const double g2 = m->g + c;
            NodeT* ex = sp.closed.find(key);
            if (!ex) {
                NodeT* n = sp.make(s, g2, m, c);
                sp.closed.insert(n);
                open.push(n);
                open_f.push(n);
            } else if (g2 < ex->g) {
                ex->set_costs(g2, ex->h, w_agg);
                ex->parent = m;
                ex->edge_cost = c;
                if (open.contains(ex)) {
                    open.update(ex);
                    open_f.update(ex);
                } else {
                    open.push(ex);
                    open_f.push(ex);
                }
            }
        }
        ts.note_open_size(open.size());
    }
    if (sol.status != Status::Timeout && sol.status != Status::MemoryExceeded && inc) {
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
Solution<typename D::State> optimistic_search(const D& d, double bound) {
    Limits lim;
    return optimistic_search(d, bound, 2.0 * (bound - 1.0) + 1.0, lim);
}

// Anytime weighted A*: continues past the first solution, pruning on the
// unweighted f >= g(incumbent); run to exhaustion the incumbent is optimal.
template <typename D>
Solution<typename D::State> anytime_wastar(const D& d, double w,
                                           const IncumbentCallback& on_incumbent,
                                           Limits& lim, const Instrument& ins = {}) {
    using NodeT = Node<typename D::State>;
    if (w < 1.0) throw std::invalid_argument("weight must be >= 1");
    Solution<typename D::State> sol;
    ThreadStats ts;
    detail::Space<D> sp(d, w, lim);
    OpenList<NodeT*, FPrimeOrder, OpenIdx> open;
    if (ins.open_timing) open.instrument(&ts);

    open.push(sp.root());
    NodeT* inc = nullptr;
    double inc_cost = kInfCost;

    std::vector<std::pair<typename D::State, double>> succs;
    while (!open.empty()) {
        if ((ts.expansions & 1023u) == 0) lim.poll_time();
        if (detail::tripped_status(lim, sol)) break;
        NodeT* m = open.pop();
        if (m->f >= inc_cost) {
            ts.pruned++;
            continue;
        }
        if (d.is_goal(m->state)) {
            inc = m;
            inc_cost = m->g;
            sol.stats.trace.emplace_back(lim.elapsed_s(), inc_cost);
            if (on_incumbent) on_incumbent(lim.elapsed_s(), inc_cost);
            continue;
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
            NodeT* ex = sp.closed.find(key);
            if (!ex) {
                NodeT* n = sp.make(s, g2, m, c);
                sp.closed.insert(n);
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
    if (sol.status != Status::Timeout && sol.status != Status::MemoryExceeded && inc) {
        auto [path, cost] = reconstruct_and_validate(d, inc);
        sol.status = Status::Solved;
        sol.cost = cost;
        sol.path = std::move(path);
    }
    sol.stats.merge_thread(ts);
    sol.stats.wall_seconds = lim.elapsed_s();
    return sol;
}

inline void validate_schedule(const std::vector<double>& schedule) {
    if (schedule.empty() || schedule.back() != 1.0)
        throw std::invalid_argument("weight schedule must end at 1.0");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (schedule[i] >= schedule[i - 1])
            throw std::invalid_argument("weight schedule must be strictly decreasing");
}

// ARA*: one weighted pass per schedule entry, expanding each state at most
// once per pass. Better paths to already-expanded states go to INCONS and
// re-enter open at the next weight. The callback fires once per completed
// pass (the incumbent is then w_i-admissible); the trace records only
// strict improvements.
template <typename D>
Solution<typename D::State> arastar(const D& d, const std::vector<double>& schedule,
                                    const IncumbentCallback& on_incumbent, Limits& lim,
                                    const Instrument& ins = {}) {
    using NodeT = Node<typename D::State>;
    validate_schedule(schedule);
    Solution<typename D::State> sol;
    ThreadStats ts;
    detail::Space<D> sp(d, schedule.front(), lim);
    OpenList<NodeT*, FPrimeOrder, OpenIdx> open;
    if (ins.open_timing) open.instrument(&ts);

    open.push(sp.root());
    NodeT* inc = nullptr;
    double inc_cost = kInfCost;
    std::vector<NodeT*> incons;
    std::vector<std::pair<typename D::State, double>> succs;

    for (std::int32_t iter = 0; iter < static_cast<std::int32_t>(schedule.size());
         ++iter) {
        const double w = schedule[static_cast<std::size_t>(iter)];
        sp.w = w;  // fresh nodes must be keyed under this pass's weight
        // Move INCONS into open and re-key everything under the new weight.
        for (NodeT* n : incons) {
            n->open_f_idx = -1;
            if (!open.contains(n)) open.push(n);
        }
        incons.clear();
        for (NodeT* n : open.raw()) n->set_costs(n->g, n->h, w);
        open.resort();

        while (!open.empty() && open.top()->fprime < inc_cost) {
            if ((ts.expansions & 1023u) == 0) lim.poll_time();
            if (detail::tripped_status(lim, sol)) goto finish;
            NodeT* m = open.pop();
            if (m->f >= inc_cost) {
                ts.pruned++;
                continue;
            }
            if (d.is_goal(m->state)) {
                inc = m;
                inc_cost = m->g;
                continue;
            }
            m->stamp = iter;  // expanded in this pass
            m->expanded = true;
            ts.expansions++;
            if (ins.f_histogram) ts.expanded_f.push_back(static_cast<float>(m->f));
            succs.clear();
            d.successors(m->state, succs);
            for (const auto& [s, c] : succs) {
                ts.generations++;
                const std::uint64_t key = d.state_key(s);
                const double g2 = m->g + c;
                NodeT* ex = sp.closed.find(key);
                if (!ex) {
                    NodeT* n = sp.make(s, g2, m, c);
                    sp.closed.insert(n);
                    open.push(n);
                } else if (g2 < ex->g) {
                    ex->set_costs(g2, ex->h, w);
                    ex->parent = m;
                    ex->edge_cost = c;
                    if (open.contains(ex)) {
                        open.update(ex);
                    } else if (ex->stamp == iter) {
                        // already expanded at this weight: INCONS
                        if (ex->open_f_idx < 0) {
                            ex->open_f_idx = 0;
                            incons.push_back(ex);
                        }
                    } else {
                        open.push(ex);
                    }
                }
            }
            ts.note_open_size(open.size());
        }
        // Pass complete: the incumbent is w-admissible.
        if (inc) {
            if (sol.stats.trace.empty() || inc_cost < sol.stats.trace.back().second)
                sol.stats.trace.emplace_back(lim.elapsed_s(), inc_cost);
            if (on_incumbent) on_incumbent(lim.elapsed_s(), inc_cost);
        }
    }
finish:
    if (sol.status != Status::Timeout && sol.status != Status::MemoryExceeded && inc) {
        auto [path, cost] = reconstruct_and_validate(d, inc);
        sol.status = Status::Solved;
        sol.cost = cost;
        sol.path = std::move(path);
    }
    sol.stats.merge_thread(ts);
    sol.stats.wall_seconds = lim.elapsed_s();
    return sol;
}

}  // namespace search
