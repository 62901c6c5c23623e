#include "sphereflow/core.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace sphereflow {

namespace {

std::size_t worker_count() {
  std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SPHEREFLOW_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) hw = std::min<std::size_t>(hw, std::size_t(v));
  }
  return hw;
}

}  // namespace

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace sphereflow
