#include "varform/rng.hpp"

#include <cmath>

namespace varform {
namespace {

constexpr int kLayers = 128;
constexpr double kTailStart = 3.442619855899;        // rightmost layer boundary
constexpr double kLayerArea = 9.91256303526217e-3;   // area of each layer

struct ZigguratTables {
  double x[kLayers + 1];  // x[1] = kTailStart, x[0] = virtual base width
  double ratio[kLayers];  // x[i+1] / x[i]
  ZigguratTables() {
    const double f_tail = std::exp(-0.5 * kTailStart * kTailStart);
    x[0] = kLayerArea / f_tail;
    x[1] = kTailStart;
    x[kLayers] = 0.0;
    for (int i = 2; i < kLayers; ++i) {
      x[i] = std::sqrt(
          -2.0 * std::log(kLayerArea / x[i - 1] +
                          std::exp(-0.5 * x[i - 1] * x[i - 1])));
    }
    for (int i = 0; i < kLayers; ++i) ratio[i] = x[i + 1] / x[i];
  }
};

const ZigguratTables& tables() {
  static const ZigguratTables t;
  return t;
}

}  // namespace

double Rng::normal_tail(bool negative) {
  // Marsaglia tail sampler for |z| > kTailStart.
  double x, y;
  do {
    x = std::log(uniform_pos()) / kTailStart;
    y = std::log(uniform_pos());
  } while (-2.0 * y < x * x);
  return negative ? x - kTailStart : kTailStart - x;
}

double Rng::normal() {
  const ZigguratTables& t = tables();
  for (;;) {
    const unsigned layer = static_cast<unsigned>(next_u64() & 127u);
    const double u = 2.0 * uniform() - 1.0;
    if (std::fabs(u) < t.ratio[layer]) return u * t.x[layer];
    if (layer == 0) return normal_tail(u < 0.0);
    const double z = u * t.x[layer];
    // Wedge acceptance test against the exact density.
    const double f_lo = std::exp(-0.5 * (t.x[layer] * t.x[layer] - z * z));
    const double f_hi =
        std::exp(-0.5 * (t.x[layer + 1] * t.x[layer + 1] - z * z));
    if (f_hi + uniform() * (f_lo - f_hi) < 1.0) return z;
  }
}

double Rng::normal_polar() {
  for (;;) {
    const double v1 = 2.0 * uniform() - 1.0;
    const double v2 = 2.0 * uniform() - 1.0;
    const double s = v1 * v1 + v2 * v2;
    if (s >= 1.0 || s == 0.0) continue;
    return v1 * std::sqrt(-2.0 * std::log(s) / s);
  }
}

}  // namespace varform
