#include "giftforge/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace gf {

int env_workers() {
  const char* raw = std::getenv("GIFTFORGE_WORKERS");
  if (!raw) return 0;
  try {
    const int n = std::stoi(raw);
    return n > 0 ? n : 0;
  } catch (...) {
    return 0;
  }
}

int resolve_workers(int configured) {
  if (configured > 0) return configured;
  return omp_get_max_threads();
}

void set_workers(int workers) { omp_set_num_threads(resolve_workers(workers)); }

}  // namespace gf
