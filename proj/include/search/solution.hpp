#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "search/node.hpp"
#include "search/stats.hpp"

namespace search {

enum class Status {
    Solved,
    NoSolution,
    Timeout,
    MemoryExceeded,
    BoundTooTight,
};

inline const char* status_name(Status s) {
    switch (s) {
        case Status::Solved: return "solved";
        case Status::NoSolution: return "nosolution";
        case Status::Timeout: return "timeout";
        case Status::MemoryExceeded: return "memout";
        case Status::BoundTooTight: return "boundtootight";
    }
    return "?";
}

template <typename State>
struct Solution {
    Status status = Status::NoSolution;
    double cost = kInfCost;
    std::vector<State> path;
    SearchStats stats;

    bool solved() const { return status == Status::Solved; }
};

// Both errors signal algorithm bugs, never bad input.
struct PathError : std::logic_error {
    enum class Kind { IllegalStep, CostMismatch };
    Kind kind;
    PathError(Kind k, const std::string& what) : std::logic_error(what), kind(k) {}
};

// Walks the parent chain of a goal node, checks every step against the
// domain's successor function, and checks that the edge costs sum to the
// goal's g. Integer-cost domains must match exactly; real costs get a 1e-9
// relative tolerance. Searches that legally improve ancestors after a goal
// was recorded (anytime / weighted parallel modes) validate with
// exact=false, which only requires the physical path to be no more
// expensive than the recorded g.
template <typename Domain, typename NodeT>
std::pair<std::vector<typename Domain::State>, double> reconstruct_and_validate(
    const Domain& domain, const NodeT* goal, bool exact = true) {
    using State = typename Domain::State;
    std::vector<const NodeT*> chain;
    for (const NodeT* n = goal; n != nullptr; n = n->parent) chain.push_back(n);
    std::reverse(chain.begin(), chain.end());

    if (domain.state_key(chain.front()->state) != domain.state_key(domain.initial()))
        throw PathError(PathError::Kind::IllegalStep, "path does not start at the initial state");

    std::vector<State> path;
    path.reserve(chain.size());
    path.push_back(chain.front()->state);

    double sum = 0.0;
    bool integral = true;
    std::vector<std::pair<State, double>> succs;
    for (std::size_t i = 1; i < chain.size(); ++i) {
        succs.clear();
        domain.successors(chain[i - 1]->state, succs);
        const std::uint64_t want = domain.state_key(chain[i]->state);
        double edge = -1.0;
        for (const auto& [s, c] : succs) {
            if (domain.state_key(s) == want) {
                edge = c;
                break;
            }
        }
        if (edge < 0.0)
            throw PathError(PathError::Kind::IllegalStep,
                            "step " + std::to_string(i) + " is not a legal successor");
        sum += edge;
        if (edge != std::floor(edge)) integral = false;
        path.push_back(chain[i]->state);
    }

    const double tol = integral ? 0.0 : 1e-9 * std::max(1.0, std::abs(goal->g));
    const bool mismatch = exact ? std::abs(sum - goal->g) > tol : sum > goal->g + tol;
    if (mismatch)
        throw PathError(PathError::Kind::CostMismatch,
                        "path cost " + std::to_string(sum) + " vs g " +
                            std::to_string(goal->g));
    return {std::move(path), sum};
}

}  // namespace search
