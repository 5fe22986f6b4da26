#pragma once

#include <optional>

namespace tfdlab {

/// Decoherence time with an explicit infinite state. Infinite means either a
/// unitary channel (gamma = 0) or a spectrum with zero energy variance.
class DecoherenceTime {
 public:
  static DecoherenceTime finite(double value) { return DecoherenceTime(value, false); }
  static DecoherenceTime infinite(bool unitary_limit) {
    return DecoherenceTime(std::nullopt, unitary_limit);
  }

  bool is_infinite() const noexcept { return !value_.has_value(); }
  bool unitary_limit() const noexcept { return unitary_limit_; }
  /// Precondition: !is_infinite().
  double value() const { return value_.value(); }

 private:
  DecoherenceTime(std::optional<double> v, bool unitary) : value_(v), unitary_limit_(unitary) {}

  std::optional<double> value_;
  bool unitary_limit_ = false;
};

struct CharacteristicTimes {
  DecoherenceTime tau_D = DecoherenceTime::infinite(true);
  double t_dip_est = 0.0;
  double t_plateau_est = 0.0;
  double plateau_value = 0.0;
  std::optional<double> t_dip_measured;
  std::optional<double> t_plateau_measured;
};

}  // namespace tfdlab
