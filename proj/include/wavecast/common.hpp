#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace wavecast {

static_assert(std::endian::native == std::endian::little,
              "binary tensor formats are little-endian; big-endian hosts are unsupported");

/// Process-wide cap on worker threads used by the fiber loops.
/// 0 means "use std::thread::hardware_concurrency()".
inline std::size_t& max_threads_setting() {
    static std::size_t value = 0;
    return value;
}

inline void set_max_threads(std::size_t n) { max_threads_setting() = n; }

inline std::size_t effective_threads() {
    std::size_t n = max_threads_setting();
    if (n == 0) {
        n = std::thread::hardware_concurrency();
        if (n == 0) n = 1;
    }
    return n;
}

/// Run fn(i) for i in [0, count). Parallel chunks only when each index
/// writes disjoint state; results are bitwise identical at any thread count.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    std::size_t workers = effective_threads();
    if (workers <= 1 || count < 2 * workers) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    if (workers > count) workers = count;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = lo + chunk < count ? lo + chunk : count;
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

/// Neumaier compensated accumulator; keeps long reductions stable to ~1 ulp.
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t log2_exact(std::size_t n) {
    if (!is_power_of_two(n)) throw std::invalid_argument("log2_exact: not a power of two");
    std::size_t k = 0;
    while ((std::size_t{1} << k) < n) ++k;
    return k;
}

/// SplitMix64 step; used to derive independent seeds for per-rider RNG streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace wavecast
