#pragma once

#include <chrono>
#include <cstdint>
#include <utility>
#include <vector>

namespace search {

// Which optional per-run instrumentation to collect. Timing hooks cost a
// clock read per event, so they stay off unless a study asks for them.
struct Instrument {
    bool f_histogram = false;   // record f of every expansion
    bool open_timing = false;   // time every open-list operation
    bool coord_timing = false;  // time lock waits and no-work waits
};

// Per-thread counters, merged into SearchStats when the run ends.
struct ThreadStats {
    std::uint64_t expansions = 0;
    std::uint64_t generations = 0;
    std::uint64_t reexpansions = 0;
    std::uint64_t pruned = 0;
    std::uint64_t self_routed = 0;
    std::uint64_t routed = 0;
    std::uint64_t blocking_sends = 0;
    std::uint64_t open_ops = 0;
    double open_op_seconds = 0.0;
    double lock_wait_seconds = 0.0;
    double free_wait_seconds = 0.0;
    std::uint64_t max_open_size = 0;
    std::vector<float> expanded_f;  // only when Instrument::f_histogram

    void note_open_size(std::size_t s) {
        if (s > max_open_size) max_open_size = s;
    }
};

struct SearchStats {
    std::uint64_t expansions = 0;
    std::uint64_t generations = 0;
    std::uint64_t reexpansions = 0;
    std::uint64_t pruned = 0;
    std::uint64_t self_routed = 0;
    std::uint64_t routed = 0;
    std::uint64_t blocking_sends = 0;
    std::uint64_t open_ops = 0;
    double open_op_seconds = 0.0;
    std::uint64_t max_open_size = 0;
    double wall_seconds = 0.0;
    std::vector<double> lock_wait_seconds;  // one entry per thread
    std::vector<double> free_wait_seconds;  // one entry per thread
    std::vector<std::pair<double, double>> trace;  // (seconds, incumbent cost)
    std::vector<float> expanded_f;

    void merge_thread(const ThreadStats& t) {
        expansions += t.expansions;
        generations += t.generations;
        reexpansions += t.reexpansions;
        pruned += t.pruned;
        self_routed += t.self_routed;
        routed += t.routed;
        blocking_sends += t.blocking_sends;
        open_ops += t.open_ops;
        open_op_seconds += t.open_op_seconds;
        if (t.max_open_size > max_open_size) max_open_size = t.max_open_size;
        lock_wait_seconds.push_back(t.lock_wait_seconds);
        free_wait_seconds.push_back(t.free_wait_seconds);
        expanded_f.insert(expanded_f.end(), t.expanded_f.begin(), t.expanded_f.end());
    }
};

// Scoped accumulation of blocking time into a double, active only when the
// coord_timing instrumentation flag is on.
class WaitTimer {
public:
    WaitTimer(bool enabled, double& sink) : enabled_(enabled), sink_(sink) {
        if (enabled_) t0_ = std::chrono::steady_clock::now();
    }
    ~WaitTimer() {
        if (enabled_)
            sink_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
                         .count();
    }

private:
    bool enabled_;
    double& sink_;
    std::chrono::steady_clock::time_point t0_;
};

}  // namespace search
