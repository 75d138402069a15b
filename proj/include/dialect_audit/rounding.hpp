#pragma once

namespace dialect_audit {

/// Rounds half away from zero at `digits` decimals. Values within 1e-9 of a
/// tie (after scaling) are treated as ties, so 0.625 -> 0.63 even though the
/// binary double sits slightly below.
double round_half_away(double value, int digits);

}  // namespace dialect_audit
