#include "rediffuse/parallel.hpp"

#include <atomic>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rediffuse::par {

namespace {
std::atomic<int> g_threads{0};
}

void set_threads(int n) { g_threads.store(n < 0 ? 0 : n); }

int hardware_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : int(n);
}

int threads() {
  int n = g_threads.load();
  return n == 0 ? hardware_threads() : n;
}

void for_each_index_serial(size_t count,
                           const std::function<void(size_t)>& fn) {
  for (size_t i = 0; i < count; ++i) fn(i);
}

void for_each_index(size_t count, const std::function<void(size_t)>& fn) {
  int nthreads = threads();
  if (nthreads <= 1 || count <= 1) {
    for_each_index_serial(count, fn);
    return;
  }
#ifdef _OPENMP
  std::exception_ptr err;
#pragma omp parallel for num_threads(nthreads) schedule(static)
  for (long long i = 0; i < (long long)count; ++i) {
    if (err) continue;
    try {
      fn(size_t(i));
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
#else
  for_each_index_serial(count, fn);
#endif
}

}  // namespace rediffuse::par
