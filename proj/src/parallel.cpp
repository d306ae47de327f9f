#include "mdplab/parallel.hpp"

#include <omp.h>

#include <stdexcept>

namespace mdplab {

void set_threads(int n) {
  if (n < 1) throw std::invalid_argument("thread count must be positive");
  omp_set_num_threads(n);
}

int threads() { return omp_get_max_threads(); }

}  // namespace mdplab
