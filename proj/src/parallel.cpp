#include "shapcause/parallel.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

namespace shapcause::par {

namespace {

std::atomic<int> g_override{0};

int env_limit() {
    static const int cached = [] {
        const char* s = std::getenv("SHAPCAUSE_THREADS");
        if (s == nullptr) return 0;
        try {
            const int n = std::stoi(s);
            return n > 0 ? n : 1;
        } catch (...) {
            return 0;
        }
    }();
    return cached;
}

}  // namespace

int thread_limit() {
    const int o = g_override.load(std::memory_order_relaxed);
    if (o > 0) return o;
    const int e = env_limit();
#ifdef _OPENMP
    const int hw = omp_get_max_threads();
#else
    const int hw = 1;
#endif
    if (e > 0) return e < hw ? e : hw;
    return hw > 0 ? hw : 1;
}

void set_thread_limit(int n) {
    g_override.store(n > 0 ? n : 0, std::memory_order_relaxed);
}

double MeanVar::std_error() const {
    return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
}

}  // namespace shapcause::par
