#include "wfldp/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <exception>
#include <mutex>

namespace wfldp {

namespace {
std::atomic<int> g_threads{0};
}

void set_num_threads(int threads) { g_threads = threads < 0 ? 0 : threads; }

int num_threads() {
  const int t = g_threads.load();
  return t > 0 ? t : omp_get_max_threads();
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  std::exception_ptr first_error;
  std::mutex mu;
  const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 64) num_threads(num_threads())
  for (long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(mu);
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace wfldp
