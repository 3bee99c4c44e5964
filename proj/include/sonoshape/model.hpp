#pragma once

#include <functional>
#include <vector>

#include "sonoshape/geometry.hpp"

namespace sonoshape {

// Coefficients of  (1 - 2k psi_t) psi_tt - c^2 Lap psi - b Lap psi_t
//                  - 2 sigma grad(psi_t).grad(psi) = 0.
struct ModelParams {
  double c = 1.0;      // sound speed, m/s
  double b = 0.01;     // sound diffusivity, m^2/s
  double k = 0.0;      // nonlinearity coefficient
  double sigma = 0.0;  // gradient-nonlinearity switch
  double beta_a = 0.0; // medium nonlinearity (informational)
  double rho = 1.0;    // mass density, kg/m^3

  static ModelParams westervelt(double c, double b, double beta_a, double rho = 1.0);
  static ModelParams kuznetsov(double c, double b, double beta_a, double rho = 1.0);
  static ModelParams linear_damped(double c, double b, double rho = 1.0);

  void validate() const;
};

// Twice continuously differentiable excitation signal with s(0) = s'(0) = 0,
// so a rest start satisfies the data-compatibility conditions exactly.
class TimeSignal {
 public:
  enum class Kind { RampedSine, GaussianPulse };

  static TimeSignal ramped_sine(double amplitude, double frequency, double ramp_duration);
  static TimeSignal gaussian_pulse(double amplitude, double center, double width,
                                   double ramp_duration);
  // zero the signal smoothly over [off_time, off_time + off_ramp]
  TimeSignal& with_switch_off(double off_time, double off_ramp);
  TimeSignal& with_amplitude(double amplitude);

  double amplitude() const { return amplitude_; }
  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;

 private:
  Kind kind_ = Kind::RampedSine;
  double amplitude_ = 0.0;
  double frequency_ = 1.0;
  double ramp_ = 0.25;
  double center_ = 0.0, width_ = 1.0;
  double off_time_ = -1.0, off_ramp_ = 0.0;
  void eval(double t, double& v, double& dv, double& ddv) const;
};

// Neumann excitation g(x,t) = profile(x) * signal(t). The profile is an
// analytic function on the hold-all domain; nodal samples are taken per mesh.
struct BoundaryExcitation {
  std::function<double(const Vec2&)> profile;
  TimeSignal signal;

  double g(const Vec2& x, double t) const { return profile(x) * signal.value(t); }
  double g_t(const Vec2& x, double t) const { return profile(x) * signal.d1(t); }
  double g_tt(const Vec2& x, double t) const { return profile(x) * signal.d2(t); }
  // c^2 g + b g_t, the combined load density
  double load(const Vec2& x, double t, double c2, double b) const {
    return profile(x) * (c2 * signal.value(t) + b * signal.d1(t));
  }

  std::vector<double> sample_profile(const Mesh& mesh) const;
  // Compatibility with a rest start: signal and its rate vanish at t=0.
  void validate() const;
};

// Angular bump profile centered at center_angle on a disk-like boundary,
// tapered to zero near the origin so it is smooth on the whole plane.
std::function<double(const Vec2&)> make_arc_profile(double center_angle, double half_width,
                                                    double inner_taper_radius);

// Bump in the tangential coordinate along a straight side, constant in the
// normal direction: profile(x) = bump((coord(x) - center)/half_width).
std::function<double(const Vec2&)> make_side_profile(bool along_y, double center,
                                                     double half_width);

}  // namespace sonoshape
