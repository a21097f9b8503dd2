#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <limits>

namespace search {

// Cooperative wall-clock and node-count budget shared by all workers of one
// run. Searches poll at expansion boundaries and unwind when tripped.
class Limits {
public:
    enum class Trip : int { None = 0, Timeout = 1, Memory = 2 };

    Limits() : start_(Clock::now()) {}
    explicit Limits(double time_limit_s,
                    std::uint64_t node_cap = std::numeric_limits<std::uint64_t>::max())
        : time_limit_s_(time_limit_s), node_cap_(node_cap), start_(Clock::now()) {}

    void restart() {
        start_ = Clock::now();
        nodes_.store(0, std::memory_order_relaxed);
        trip_.store(0, std::memory_order_relaxed);
    }

    double elapsed_s() const {
        return std::chrono::duration<double>(Clock::now() - start_).count();
    }

    // Batched node accounting; trips the memory budget when exceeded.
    void charge_nodes(std::uint64_t n) {
        if (nodes_.fetch_add(n, std::memory_order_relaxed) + n > node_cap_)
            trip_.store(static_cast<int>(Trip::Memory), std::memory_order_release);
    }

    void poll_time() {
        if (time_limit_s_ < std::numeric_limits<double>::infinity() &&
            elapsed_s() > time_limit_s_)
            trip_.store(static_cast<int>(Trip::Timeout), std::memory_order_release);
    }

    bool tripped() const { return trip_.load(std::memory_order_acquire) != 0; }

    Trip trip() const { return static_cast<Trip>(trip_.load(std::memory_order_acquire)); }

    std::uint64_t nodes() const { return nodes_.load(std::memory_order_relaxed); }

private:
    using Clock = std::chrono::steady_clock;
    double time_limit_s_ = std::numeric_limits<double>::infinity();
    std::uint64_t node_cap_ = std::numeric_limits<std::uint64_t>::max();
    Clock::time_point start_;
    std::atomic<std::uint64_t> nodes_{0};
    std::atomic<int> trip_{0};
};

}  // namespace search
