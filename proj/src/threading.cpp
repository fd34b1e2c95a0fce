#include "csplat/threading.hpp"

#include <atomic>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace csplat {

namespace {

int env_thread_cap() {
    const char* raw = std::getenv("CONIC_SPLAT_THREADS");
    if (raw == nullptr) return 0;
    int value = std::atoi(raw);
    return value > 0 ? value : 0;
}

std::atomic<int>& cap_storage() {
    static std::atomic<int> cap{env_thread_cap()};
    return cap;
}

} // namespace

int thread_cap() { return cap_storage().load(); }

void set_thread_cap(int cap) { cap_storage().store(cap > 0 ? cap : 0); }

int effective_threads() {
    int cap = thread_cap();
#ifdef _OPENMP
    int hw = omp_get_max_threads();
#else
    int hw = 1;
#endif
    return cap == 0 ? hw : cap;
}

} // namespace csplat
