#include "ebp/rng.hpp"

namespace ebp {

double gamma_variate(CounterRng& rng, double shape, double scale) noexcept {
  if (shape == 1.0) return -scale * std::log(rng.uniform_open());
  if (shape < 1.0) {
    const double g = gamma_variate(rng, shape + 1.0, 1.0);
    return scale * g * std::pow(rng.uniform_open(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return scale * d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return scale * d * v;
  }
}

}  // namespace ebp
