#include "almn/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace almn {

int configure_threads_from_env() {
  if (const char* env = std::getenv("ALMN_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) set_num_threads(n);
    } catch (const std::exception&) {
      // unparsable value: keep the runtime default
    }
  }
  return max_threads();
}

void set_num_threads(int threads) { omp_set_num_threads(threads); }

int max_threads() { return omp_get_max_threads(); }

}  // namespace almn
