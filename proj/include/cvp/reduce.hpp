#pragma once

#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace cvp {

// Kahan-compensated accumulator.  All double sums in this library reduce in a
// fixed index order so that results are reproducible run to run.
class KahanSum {
  public:
    void add(double value) {
        const double y = value - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double kahan_total(const std::vector<double> &terms) {
    KahanSum s;
    for (double t : terms) s.add(t);
    return s.value();
}

// Thread count for parallel maps: CVP_THREADS, clamped to [1, hardware].
inline unsigned thread_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char *env = std::getenv("CVP_THREADS")) {
        const long requested = std::strtol(env, nullptr, 10);
        if (requested >= 1)
            return static_cast<unsigned>(requested) < hw
                       ? static_cast<unsigned>(requested)
                       : hw;
    }
    return hw > 4 ? 4 : hw;
}

// Evaluates f(i) for i in [0, n) into a buffer (parallel over contiguous
// chunks), then reduces sequentially in index order.  Determinism does not
// depend on the number of threads.
inline double parallel_sum(std::size_t n,
                           const std::function<double(std::size_t)> &f) {
    const unsigned workers = n > 64 ? thread_count() : 1;
    std::vector<double> buffer(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) buffer[i] = f(i);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = lo + chunk < n ? lo + chunk : n;
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi] {
                for (std::size_t i = lo; i < hi; ++i) buffer[i] = f(i);
            });
        }
        for (auto &t : pool) t.join();
    }
    return kahan_total(buffer);
}

} // namespace cvp
