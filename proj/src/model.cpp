#include "sonoshape/model.hpp"

#include <cmath>
#include <numbers>

#include "sonoshape/errors.hpp"

namespace sonoshape {

ModelParams ModelParams::westervelt(double c, double b, double beta_a, double rho) {
  ModelParams p;
  p.c = c;
  p.b = b;
  p.beta_a = beta_a;
  p.k = beta_a / (c * c);
  p.sigma = 0.0;
  p.rho = rho;
  p.validate();
  return p;
}

ModelParams ModelParams::kuznetsov(double c, double b, double beta_a, double rho) {
  ModelParams p;
  p.c = c;
  p.b = b;
  p.beta_a = beta_a;
  p.k = (beta_a - 1.0) / (c * c);
  p.sigma = 1.0;
  p.rho = rho;
  p.validate();
  return p;
}

ModelParams ModelParams::linear_damped(double c, double b, double rho) {
  ModelParams p;
  p.c = c;
  p.b = b;
  p.k = 0.0;
  p.sigma = 0.0;
  p.rho = rho;
  p.validate();
  return p;
}

void ModelParams::validate() const {
  if (!(c > 0.0)) throw ConfigError("sound speed must be positive");
  if (!(b > 0.0)) throw ConfigError("sound diffusivity must be positive");
  if (!(rho > 0.0)) throw ConfigError("density must be positive");
}

namespace {

// quintic smoothstep: w(0)=w'(0)=w''(0)=0, w(1)=1, w'(1)=w''(1)=0
void smoothstep(double s, double& w, double& dw, double& ddw) {
  if (s <= 0.0) {
    w = dw = ddw = 0.0;
  } else if (s >= 1.0) {
    w = 1.0;
    dw = ddw = 0.0;
  } else {
    w = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
    dw = 30.0 * s * s * (1.0 - s) * (1.0 - s);
    ddw = 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
  }
}

struct F {
  double v, d1, d2;
};

F product(const F& a, const F& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}

F ramp_up(double t, double t_ramp) {
  double w, dw, ddw;
  smoothstep(t / t_ramp, w, dw, ddw);
  return {w, dw / t_ramp, ddw / (t_ramp * t_ramp)};
}

}  // namespace

TimeSignal TimeSignal::ramped_sine(double amplitude, double frequency, double ramp_duration) {
  TimeSignal s;
  s.kind_ = Kind::RampedSine;
  s.amplitude_ = amplitude;
  s.frequency_ = frequency;
  s.ramp_ = ramp_duration;
  return s;
}

TimeSignal TimeSignal::gaussian_pulse(double amplitude, double center, double width,
                                      double ramp_duration) {
  TimeSignal s;
  s.kind_ = Kind::GaussianPulse;
  s.amplitude_ = amplitude;
  s.center_ = center;
  s.width_ = width;
  s.ramp_ = ramp_duration;
  return s;
}

TimeSignal& TimeSignal::with_switch_off(double off_time, double off_ramp) {
  off_time_ = off_time;
  off_ramp_ = off_ramp;
  return *this;
}

TimeSignal& TimeSignal::with_amplitude(double amplitude) {
  amplitude_ = amplitude;
  return *this;
}

void TimeSignal::eval(double t, double& v, double& dv, double& ddv) const {
  F f = ramp_up(t, ramp_);
  if (kind_ == Kind::RampedSine) {
    const double om = 2.0 * std::numbers::pi * frequency_;
    const F carrier{std::sin(om * t), om * std::cos(om * t), -om * om * std::sin(om * t)};
    f = product(f, carrier);
  } else {
    const double u = (t - center_) / width_;
    const double e = std::exp(-0.5 * u * u);
    const F carrier{e, -u / width_ * e, (u * u - 1.0) / (width_ * width_) * e};
    f = product(f, carrier);
  }
  if (off_time_ >= 0.0) {
    F down = ramp_up(t - off_time_, off_ramp_);
    down.v = 1.0 - down.v;
    down.d1 = -down.d1;
    down.d2 = -down.d2;
    f = product(f, down);
  }
  v = amplitude_ * f.v;
  dv = amplitude_ * f.d1;
  ddv = amplitude_ * f.d2;
}

double TimeSignal::value(double t) const {
  double v, dv, ddv;
  eval(t, v, dv, ddv);
  return v;
}

double TimeSignal::d1(double t) const {
  double v, dv, ddv;
  eval(t, v, dv, ddv);
  return dv;
}

double TimeSignal::d2(double t) const {
  double v, dv, ddv;
  eval(t, v, dv, ddv);
  return ddv;
}

std::vector<double> BoundaryExcitation::sample_profile(const Mesh& mesh) const {
  std::vector<double> out(mesh.vertices.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = profile(mesh.vertices[i]);
  return out;
}

void BoundaryExcitation::validate() const {
  if (!profile) throw ConfigError("excitation has no spatial profile");
  if (std::abs(signal.value(0.0)) > 1e-14 || std::abs(signal.d1(0.0)) > 1e-14)
    throw ConfigError("excitation signal is incompatible with a rest start");
}

std::function<double(const Vec2&)> make_arc_profile(double center_angle, double half_width,
                                                    double inner_taper_radius) {
  return [=](const Vec2& x) {
    const double r = x.norm();
    if (r <= 1e-300) return 0.0;
    double dth = std::atan2(x.y, x.x) - center_angle;
    while (dth > std::numbers::pi) dth -= 2.0 * std::numbers::pi;
    while (dth < -std::numbers::pi) dth += 2.0 * std::numbers::pi;
    const double u = dth / half_width;
    if (std::abs(u) >= 1.0) return 0.0;
    const double w = 1.0 - u * u;
    double taper = 1.0;
    if (r < inner_taper_radius) {
      const double s = r / inner_taper_radius;
      taper = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
    }
    return w * w * w * taper;
  };
}

std::function<double(const Vec2&)> make_side_profile(bool along_y, double center,
                                                     double half_width) {
  return [=](const Vec2& x) {
    const double u = ((along_y ? x.y : x.x) - center) / half_width;
    if (std::abs(u) >= 1.0) return 0.0;
    const double w = 1.0 - u * u;
    return w * w * w;
  };
}

}  // namespace sonoshape
