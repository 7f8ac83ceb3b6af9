#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <string_view>

#include "tdho/errors.hpp"

namespace tdho {

enum class ProfileKind { constant, linear_ramp, tanh_sweep, smoothed_step };

inline std::string_view to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::constant: return "constant";
    case ProfileKind::linear_ramp: return "linear_ramp";
    case ProfileKind::tanh_sweep: return "tanh_sweep";
    case ProfileKind::smoothed_step: return "piecewise_constant_smoothed";
  }
  return "unknown";
}

inline ProfileKind profile_kind_from_string(std::string_view name) {
  if (name == "constant") return ProfileKind::constant;
  if (name == "linear_ramp") return ProfileKind::linear_ramp;
  if (name == "tanh_sweep") return ProfileKind::tanh_sweep;
  if (name == "piecewise_constant_smoothed" || name == "smoothed_step") return ProfileKind::smoothed_step;
  throw DomainError("unknown frequency profile kind '" + std::string(name) + "'");
}

/// Oscillator frequency Omega(t) of H(t) = (p^2 + Omega^2(t) q^2) / 2.
///
/// All non-constant kinds move from `omega_start` to `omega_end` around
/// `center`:
///   - linear_ramp: straight line over [center - width/2, center + width/2]
///   - tanh_sweep: omega_start + (omega_end - omega_start)(1 + tanh((t - center)/width))/2
///   - smoothed_step: quintic smootherstep over [center - width/2, center + width/2] (C2)
/// Frequencies are strictly positive and the profile is only defined on
/// [t_min, t_max].
struct FrequencyProfile {
  ProfileKind kind = ProfileKind::constant;
  double omega_start = 1.0;
  double omega_end = 1.0;
  double center = 0.0;
  double width = 1.0;
  double t_min = 0.0;
  double t_max = 1.0;

  static FrequencyProfile constant(double omega, double t_min, double t_max) {
    FrequencyProfile p;
    p.kind = ProfileKind::constant;
    p.omega_start = p.omega_end = omega;
    p.t_min = t_min;
    p.t_max = t_max;
    p.validate();
    return p;
  }

  static FrequencyProfile sweep(ProfileKind kind, double omega_start, double omega_end, double center,
                                double width, double t_min, double t_max) {
    FrequencyProfile p{kind, omega_start, omega_end, center, width, t_min, t_max};
    p.validate();
    return p;
  }

  static FrequencyProfile tanh_sweep(double omega_start, double omega_end, double center, double width,
                                     double t_min, double t_max) {
    return sweep(ProfileKind::tanh_sweep, omega_start, omega_end, center, width, t_min, t_max);
  }

  void validate() const {
    auto fail = [](const std::string& what) { throw DomainError("invalid frequency profile: " + what); };
    if (!(std::isfinite(omega_start) && omega_start > 0.0)) fail("omega_start must be positive");
    if (!(std::isfinite(omega_end) && omega_end > 0.0)) fail("omega_end must be positive");
    if (!(std::isfinite(t_min) && std::isfinite(t_max) && t_max > t_min)) fail("need t_min < t_max");
    if (kind != ProfileKind::constant && !(std::isfinite(width) && width > 0.0)) fail("width must be positive");
    if (!std::isfinite(center)) fail("center must be finite");
  }

  bool contains(double t) const { return t >= t_min && t <= t_max; }
};

struct ProfileSample {
  double omega;
  double omega_sq;
  double d_omega;
};

inline ProfileSample eval_profile(const FrequencyProfile& profile, double t) {
  if (!profile.contains(t)) {
    std::ostringstream msg;
    msg << "time " << t << " outside profile domain [" << profile.t_min << ", " << profile.t_max << "]";
    throw DomainError(msg.str());
  }
  const double delta = profile.omega_end - profile.omega_start;
  double omega = profile.omega_start;
  double d_omega = 0.0;
  switch (profile.kind) {
    case ProfileKind::constant:
      break;
    case ProfileKind::tanh_sweep: {
      const double x = (t - profile.center) / profile.width;
      const double th = std::tanh(x);
      omega = profile.omega_start + 0.5 * delta * (1.0 + th);
      d_omega = 0.5 * delta * (1.0 - th * th) / profile.width;
      break;
    }
    case ProfileKind::linear_ramp: {
      const double x = (t - profile.center) / profile.width + 0.5;
      if (x >= 1.0) {
        omega = profile.omega_end;
      } else if (x > 0.0) {
        omega = profile.omega_start + delta * x;
        d_omega = delta / profile.width;
      }
      break;
    }
    case ProfileKind::smoothed_step: {
      const double x = (t - profile.center) / profile.width + 0.5;
      if (x >= 1.0) {
        omega = profile.omega_end;
      } else if (x > 0.0) {
        const double x2 = x * x;
        omega = profile.omega_start + delta * x2 * x * (10.0 - 15.0 * x + 6.0 * x2);
        d_omega = delta * 30.0 * x2 * (1.0 - x) * (1.0 - x) / profile.width;
      }
      break;
    }
  }
  return {omega, omega * omega, d_omega};
}

}  // namespace tdho
