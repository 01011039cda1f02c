#pragma once

#include <cmath>
#include <stdexcept>

namespace eulab {

// Probabilists' Hermite polynomial He_k(x) by the three-term recurrence
// He_{k+1}(x) = x He_k(x) - k He_{k-1}(x).  Supported for k <= 64.
inline double hermite_eval(int k, double x) {
  if (k < 0 || k > 64) {
    throw std::invalid_argument("hermite_eval: order must be in [0, 64]");
  }
  double hk = 1.0;   // He_0
  double hk1 = 0.0;  // He_{-1}
  for (int i = 0; i < k; ++i) {
    const double next = x * hk - static_cast<double>(i) * hk1;
    hk1 = hk;
    hk = next;
  }
  return hk;
}

// He_k(0): zero for odd k, (-1)^{k/2} (k-1)!! for even k.
inline double hermite_at_zero(int k) {
  if (k % 2 != 0) return 0.0;
  double v = 1.0;
  for (int i = 1; i < k; i += 2) v *= static_cast<double>(i);
  return (k / 2) % 2 == 0 ? v : -v;
}

}  // namespace eulab
