#pragma once

#include <cstdint>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qwave {

// Precondition / domain violations. CLI maps these to exit code 1.
class ContractError : public std::runtime_error {
public:
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// Register size above the configured hard cap.
class CapacityError : public ContractError {
public:
    explicit CapacityError(const std::string& msg) : ContractError(msg) {}
};

// Bad CLI flags, unreadable files, malformed config. Exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken internal postcondition (a bug, not a caller error). Exit code 2.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractError(msg);
}

inline void internal_check(bool cond, const std::string& msg) {
    if (!cond) throw InternalError(msg);
}

// Warnings go to stderr with a greppable prefix, mirroring the CLI's
// "ERROR <stage>: <msg>" convention.
inline void warn(const std::string& stage, const std::string& msg) {
    std::cerr << "WARN " << stage << ": " << msg << "\n";
}

// splitmix64; used to derive independent per-entry / per-cell seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return mix_seed(a ^ mix_seed(b));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b) ^ mix_seed(c));
}

// Chunked parallel loop. Results must not depend on the chunking: callers
// write to disjoint slots and draw randomness from per-index seeds only.
inline void parallel_for(std::size_t count, int jobs,
                         const std::function<void(std::size_t, std::size_t)>& body) {
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs <= 1 || count < 2) {
        body(0, count);
        return;
    }
    std::size_t n_threads = std::min<std::size_t>(jobs, count);
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
        std::size_t lo = count * t / n_threads;
        std::size_t hi = count * (t + 1) / n_threads;
        pool.emplace_back(body, lo, hi);
    }
    for (auto& th : pool) th.join();
}

}  // namespace qwave
