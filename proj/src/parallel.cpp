#include "depbreak/parallel.hpp"

#include <omp.h>

namespace depbreak {
namespace {
int default_workers() {
  static const int n = omp_get_num_procs();
  return n;
}
}  // namespace

void set_worker_count(int workers) {
  omp_set_num_threads(workers < 1 ? default_workers() : workers);
}

int worker_count() { return omp_get_max_threads(); }

}  // namespace depbreak
