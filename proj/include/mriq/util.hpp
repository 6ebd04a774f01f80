#ifndef MRIQ_UTIL_HPP
#define MRIQ_UTIL_HPP

#include <cmath>

namespace mriq {

// Snap to 6 decimal places. Sampled continuous parameters are quantized at
// draw time so the %.6f manifest encoding round-trips them exactly.
inline double quantize6(double x) { return std::round(x * 1e6) / 1e6; }

} // namespace mriq

#endif
