#ifndef ALMN_PARALLEL_HPP
#define ALMN_PARALLEL_HPP

namespace almn {

/// Applies the ALMN_THREADS environment cap (if set and positive) to the
/// OpenMP runtime. Returns the resulting thread budget.
int configure_threads_from_env();

void set_num_threads(int threads);
int max_threads();

}  // namespace almn

#endif  // ALMN_PARALLEL_HPP
