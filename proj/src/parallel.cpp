#include "snlab/parallel.hpp"

#include <omp.h>

namespace snlab {

int max_threads() { return omp_get_max_threads(); }

}  // namespace snlab
