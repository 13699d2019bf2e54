#pragma once

namespace sslcox {

// Bi-level classification of one predictor's additive function.
enum class EffectType { none = 0, linear = 1, nonlinear = 2 };

inline const char* effect_name(EffectType e) {
  switch (e) {
    case EffectType::linear: return "linear";
    case EffectType::nonlinear: return "nonlinear";
    default: return "null";
  }
}

}  // namespace sslcox
