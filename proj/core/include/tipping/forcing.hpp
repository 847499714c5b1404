#pragma once

#include <utility>
#include <variant>
#include <vector>

namespace tipping {

// q(t) = q_b + eps*R0 - eps^2*R2*t^2, peak at t = 0.
struct ParabolicForcing {
  double R0 = 0.0;
  double R2 = 1.0;
  double eps = 1.0;
  double q_b = 0.0;
};

// q(t) = q_inf + (R + q_b - q_inf) / cosh(S*(t_end - 2t))^2, peak q_b + R at t_end/2.
struct Sech2Forcing {
  double q_inf = 0.0;
  double R = 0.0;
  double S = 1.0;
  double t_end = 1.0;
  double q_b = 0.0;

  double amplitude() const { return R + q_b - q_inf; }
};

// Piecewise-linear through (times, values); held constant outside.
struct SampledForcing {
  std::vector<double> times;
  std::vector<double> values;
};

struct ConstantForcing {
  double q = 0.0;
};

class ForcingProfile {
 public:
  using Variant = std::variant<ConstantForcing, ParabolicForcing, Sech2Forcing, SampledForcing>;

  ForcingProfile() = default;
  ForcingProfile(ConstantForcing f) : v_(f) {}
  ForcingProfile(ParabolicForcing f);
  ForcingProfile(Sech2Forcing f);
  ForcingProfile(SampledForcing f);

  double value(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;

  // Location and value of the global maximum.
  double peak_time() const;
  double peak_value() const;

  // Natural simulation window: [0, t_end] for sech^2, the sample span for
  // sampled profiles, and for parabolas the crossing interval of q_b widened by
  // 50% or 8 intrinsic time units (eps^2 R2)^(-1/4), whichever is longer.
  std::pair<double, double> natural_span() const;

  // True when the profile rises to one maximum and falls afterwards.
  bool single_peaked() const;

  const Variant& variant() const { return v_; }

 private:
  Variant v_;
};

// Sech^2 helpers. `amp` is peak minus q_inf, `above` is threshold minus q_inf.
// Exact time spent above the threshold.
double sech2_exceedance_time(double amp, double above, double S);
// Inverse of sech2_exceedance_time for the speed S.
double sech2_speed(double amp, double above, double t_e);
// Half-window (t_end) such that q(0) - q_inf = gap.
double sech2_duration(double amp, double S, double gap);

// Sech^2 profile whose peak exceeds `threshold` by R_th and stays above it for
// t_e. The window starts where q - q_inf = start_gap.
Sech2Forcing sech2_for_exceedance(double q_inf, double q_b, double threshold, double R_th,
                                  double t_e, double start_gap);

}  // namespace tipping
