#pragma once

#include <cstddef>
#include <vector>

#include "liquidcast/numerics.hpp"

namespace liquidcast {

/// One supervised example: a standardized feature window, the per-row
/// calendar gaps in days (consumed by the continuous-time cell), and the raw
/// next-step percent return as the target. Targets are never standardized.
struct SequenceSample {
  numerics::Matrix window;   ///< L x d, standardized features
  std::vector<double> gaps;  ///< length L; first entry is 1 by convention
  double target{0.0};        ///< raw percent return of the following row
  std::size_t t_eval_row{0};  ///< frame row of the last window observation
};

}  // namespace liquidcast
