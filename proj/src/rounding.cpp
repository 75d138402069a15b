#include "dialect_audit/rounding.hpp"

#include <cmath>

namespace dialect_audit {

double round_half_away(double value, int digits) {
  const double scale = std::pow(10.0, digits);
  const double scaled = value * scale;
  const double floor = std::floor(std::fabs(scaled));
  const double frac = std::fabs(scaled) - floor;
  const double magnitude = frac + 1e-9 >= 0.5 ? floor + 1.0 : floor;
  return std::copysign(magnitude, scaled) / scale;
}

}  // namespace dialect_audit
