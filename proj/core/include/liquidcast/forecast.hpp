#pragma once

#include <cstddef>
#include <cstdint>

namespace liquidcast {

// One realized one-step-ahead forecast: the frame row whose return was
// predicted, its date, and the actual/predicted pair.
struct ForecastRecord {
  std::size_t row = 0;
  std::int64_t date = 0;  // days since 1970-01-01
  double actual = 0.0;
  double predicted = 0.0;
};

}  // namespace liquidcast
