#include "shellcap/parallel.hpp"

#include <omp.h>

namespace shellcap {

namespace {
int default_threads() {
  static const int n = omp_get_max_threads();
  return n;
}
}  // namespace

void set_threads(int n) {
  const int fallback = default_threads();
  omp_set_num_threads(n > 0 ? n : fallback);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace shellcap
