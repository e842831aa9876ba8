#include "freerep/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace freerep {

int worker_count() {
  if (const char* env = std::getenv("FREEREP_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
      // fall through to the runtime default
    }
  }
  return omp_get_max_threads();
}

void configure_threads_from_env() { omp_set_num_threads(worker_count()); }

}  // namespace freerep
