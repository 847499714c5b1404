#include "tipping/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tipping/error.hpp"

namespace tipping {

ForcingProfile::ForcingProfile(ParabolicForcing f) : v_(f) {
  if (!(f.R2 > 0.0) || !(f.eps > 0.0))
    fail_validation("invalid-forcing", "parabolic forcing needs R2 > 0 and eps > 0");
}

ForcingProfile::ForcingProfile(Sech2Forcing f) : v_(f) {
  if (!(f.S > 0.0) || !(f.t_end > 0.0))
    fail_validation("invalid-forcing", "sech2 forcing needs S > 0 and t_end > 0");
}

ForcingProfile::ForcingProfile(SampledForcing f) : v_(std::move(f)) {
  const auto& s = std::get<SampledForcing>(v_);
  if (s.times.size() < 2 || s.times.size() != s.values.size())
    fail_validation("invalid-forcing", "sampled forcing needs >= 2 matching samples");
  for (std::size_t i = 1; i < s.times.size(); ++i)
    if (!(s.times[i] > s.times[i - 1]))
      fail_validation("invalid-forcing", "sampled forcing times must increase strictly");
}

namespace {

std::size_t segment(const SampledForcing& s, double t) {
  auto it = std::upper_bound(s.times.begin(), s.times.end(), t);
  std::size_t i = static_cast<std::size_t>(it - s.times.begin());
  return std::clamp<std::size_t>(i, 1, s.times.size() - 1) - 1;
}

}  // namespace

double ForcingProfile::value(double t) const {
  return std::visit(
      [t](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ConstantForcing>) {
          return f.q;
        } else if constexpr (std::is_same_v<F, ParabolicForcing>) {
          return f.q_b + f.eps * f.R0 - f.eps * f.eps * f.R2 * t * t;
        } else if constexpr (std::is_same_v<F, Sech2Forcing>) {
          double c = std::cosh(f.S * (f.t_end - 2.0 * t));
          return f.q_inf + f.amplitude() / (c * c);
        } else {
          if (t <= f.times.front()) return f.values.front();
          if (t >= f.times.back()) return f.values.back();
          std::size_t i = segment(f, t);
          double a = (t - f.times[i]) / (f.times[i + 1] - f.times[i]);
          return (1.0 - a) * f.values[i] + a * f.values[i + 1];
        }
      },
      v_);
}

double ForcingProfile::derivative(double t) const {
  return std::visit(
      [t](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ConstantForcing>) {
          return 0.0;
        } else if constexpr (std::is_same_v<F, ParabolicForcing>) {
          return -2.0 * f.eps * f.eps * f.R2 * t;
        } else if constexpr (std::is_same_v<F, Sech2Forcing>) {
          // d/dt sech^2(u), u = S(t_end - 2t): 4 S sech^2(u) tanh(u)
          double u = f.S * (f.t_end - 2.0 * t);
          double c = std::cosh(u);
          return 4.0 * f.S * f.amplitude() * std::tanh(u) / (c * c);
        } else {
          if (t < f.times.front() || t > f.times.back()) return 0.0;
          std::size_t i = segment(f, t);
          return (f.values[i + 1] - f.values[i]) / (f.times[i + 1] - f.times[i]);
        }
      },
      v_);
}

double ForcingProfile::second_derivative(double t) const {
  return std::visit(
      [t](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ConstantForcing>) {
          return 0.0;
        } else if constexpr (std::is_same_v<F, ParabolicForcing>) {
          return -2.0 * f.eps * f.eps * f.R2;
        } else if constexpr (std::is_same_v<F, Sech2Forcing>) {
          // d^2/du^2 sech^2 = sech^2 (4 tanh^2 - 2 sech^2), chain factor 4 S^2
          double u = f.S * (f.t_end - 2.0 * t);
          double c = std::cosh(u), th = std::tanh(u);
          double s2 = 1.0 / (c * c);
          return 4.0 * f.S * f.S * f.amplitude() * s2 * (4.0 * th * th - 2.0 * s2);
        } else {
          // Parabola through the three samples nearest t.
          std::size_t n = f.times.size();
          if (n < 3) return 0.0;
          auto it = std::lower_bound(f.times.begin(), f.times.end(), t);
          std::size_t i = static_cast<std::size_t>(it - f.times.begin());
          i = std::clamp<std::size_t>(i, 1, n - 2);
          double t0 = f.times[i - 1], t1 = f.times[i], t2 = f.times[i + 1];
          double d01 = (f.values[i] - f.values[i - 1]) / (t1 - t0);
          double d12 = (f.values[i + 1] - f.values[i]) / (t2 - t1);
          return 2.0 * (d12 - d01) / (t2 - t0);
        }
      },
      v_);
}

double ForcingProfile::peak_time() const {
  return std::visit(
      [](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ConstantForcing>) {
          return 0.0;
        } else if constexpr (std::is_same_v<F, ParabolicForcing>) {
          return 0.0;
        } else if constexpr (std::is_same_v<F, Sech2Forcing>) {
          return 0.5 * f.t_end;
        } else {
          auto it = std::max_element(f.values.begin(), f.values.end());
          return f.times[static_cast<std::size_t>(it - f.values.begin())];
        }
      },
      v_);
}

double ForcingProfile::peak_value() const { return value(peak_time()); }

std::pair<double, double> ForcingProfile::natural_span() const {
  return std::visit(
      [](const auto& f) -> std::pair<double, double> {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ConstantForcing>) {
          return {0.0, 1.0};
        } else if constexpr (std::is_same_v<F, ParabolicForcing>) {
          double half = f.R0 > 0.0 ? std::sqrt(f.R0 / (f.eps * f.R2)) : 0.0;
          // At least 8 units of the intrinsic time (eps^2 R2)^(-1/4), so that
          // the passage has settled before the window closes.
          double span = std::max(1.5 * half, 8.0 / std::sqrt(f.eps * std::sqrt(f.R2)));
          return {-span, span};
        } else if constexpr (std::is_same_v<F, Sech2Forcing>) {
          return {0.0, f.t_end};
        } else {
          return {f.times.front(), f.times.back()};
        }
      },
      v_);
}

bool ForcingProfile::single_peaked() const {
  if (const auto* s = std::get_if<SampledForcing>(&v_)) {
    std::size_t n = s->values.size();
    std::size_t i = 1;
    while (i < n && s->values[i] >= s->values[i - 1]) ++i;
    while (i < n && s->values[i] <= s->values[i - 1]) ++i;
    return i == n;
  }
  return true;
}

double sech2_exceedance_time(double amp, double above, double S) {
  if (!(above > 0.0) || !(S > 0.0))
    fail_validation("invalid-forcing", "sech2 exceedance needs threshold above q_inf and S > 0");
  if (amp <= above) return 0.0;
  return std::acosh(std::sqrt(amp / above)) / S;
}

double sech2_speed(double amp, double above, double t_e) {
  if (!(above > 0.0) || !(t_e > 0.0) || !(amp > above))
    fail_validation("invalid-forcing",
                    "sech2 speed needs peak above threshold above q_inf and t_e > 0");
  return std::acosh(std::sqrt(amp / above)) / t_e;
}

double sech2_duration(double amp, double S, double gap) {
  if (!(gap > 0.0) || !(S > 0.0) || !(amp > 0.0))
    fail_validation("invalid-forcing", "sech2 duration needs amp, S, gap > 0");
  if (gap >= amp) return 0.0;
  return std::acosh(std::sqrt(amp / gap)) / S;
}

Sech2Forcing sech2_for_exceedance(double q_inf, double q_b, double threshold, double R_th,
                                  double t_e, double start_gap) {
  double above = threshold - q_inf;
  double amp = R_th + above;
  Sech2Forcing f;
  f.q_inf = q_inf;
  f.q_b = q_b;
  f.R = threshold + R_th - q_b;
  f.S = sech2_speed(amp, above, t_e);
  f.t_end = sech2_duration(amp, f.S, start_gap);
  return f;
}

}  // namespace tipping
