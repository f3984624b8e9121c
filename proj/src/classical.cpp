#include "magtrap/classical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace magtrap {

namespace {

struct Derivative {
  double dx, dy, dvx, dvy;
};

Derivative rhs(const RadialField& field, const ParticleState& s) {
  const auto [ax, ay] = lorentz_accel(field, s);
  return {s.vx, s.vy, ax, ay};
}

ParticleState advance(const ParticleState& s, const Derivative& d, double h) {
  return {s.x + h * d.dx, s.y + h * d.dy, s.vx + h * d.dvx, s.vy + h * d.dvy, s.t + h};
}

double exit_angle_of(const ParticleState& s) {
  const double r = s.radius();
  if (r == 0.0) return 0.0;
  const double ux = s.x / r;
  const double uy = s.y / r;
  const double radial = s.vx * ux + s.vy * uy;
  const double tangential = ux * s.vy - uy * s.vx;
  return std::atan2(tangential, radial);
}

// Sub-step tau in (0, h] that lands on |x| = R, by bisection on a single
// RK4 step from the last inside state. The exit state therefore lies on the
// discrete trajectory itself.
ParticleState refine_crossing(const RadialField& field, const ParticleState& in, double h,
                              double R) {
  double lo = 0.0;
  double hi = h;
  for (int it = 0; it < 100 && hi - lo > 1e-15 * h; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rk4_step(field, in, mid).radius() > R ? hi : lo) = mid;
  }
  return rk4_step(field, in, hi);
}

}  // namespace

std::pair<double, double> lorentz_accel(const RadialField& field, const ParticleState& state) {
  const double k = field.params().charge_to_mass() * field.B(state.radius());
  return {k * state.vy, -k * state.vx};
}

ParticleState rk4_step(const RadialField& field, const ParticleState& state, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("rk4_step: step size must be positive");
  const Derivative k1 = rhs(field, state);
  const Derivative k2 = rhs(field, advance(state, k1, 0.5 * h));
  const Derivative k3 = rhs(field, advance(state, k2, 0.5 * h));
  const Derivative k4 = rhs(field, advance(state, k3, h));
  const Derivative sum{
      k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx,
      k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy,
      k1.dvx + 2.0 * k2.dvx + 2.0 * k3.dvx + k4.dvx,
      k1.dvy + 2.0 * k2.dvy + 2.0 * k3.dvy + k4.dvy,
  };
  ParticleState next = advance(state, sum, h / 6.0);
  next.t = state.t + h;
  return next;
}

TrajectoryResult integrate(const RadialField& field, double v0, double h, double t_max,
                           IntegrateOptions options) {
  if (!(h > 0.0)) throw std::invalid_argument("integrate: h must be positive");
  if (!(t_max > 0.0)) throw std::invalid_argument("integrate: t_max must be positive");
  if (!(v0 >= 0.0)) throw std::invalid_argument("integrate: v0 must be non-negative");
  const std::size_t stride = std::max<std::size_t>(options.sample_stride, 1);

  const double R = field.region_radius();
  const auto n_steps = static_cast<std::size_t>(std::ceil(t_max / h - 1e-9));

  TrajectoryResult result;
  result.samples.reserve(std::min<std::size_t>(n_steps / stride + 2, 1u << 22));

  ParticleState state{0.0, 0.0, v0, 0.0, 0.0};
  result.samples.push_back(state);
  double max_radius = 0.0;

  for (std::size_t step = 1; step <= n_steps; ++step) {
    const ParticleState next = rk4_step(field, state, h);
    result.steps_taken = step;
    if (next.radius() > R) {
      const ParticleState exit_state = refine_crossing(field, state, h, R);
      if (result.samples.back().t != state.t) result.samples.push_back(state);
      result.samples.push_back(exit_state);
      result.outcome = Escaped{exit_state, exit_angle_of(exit_state)};
      return result;
    }
    state = next;
    max_radius = std::max(max_radius, state.radius());
    if (step % stride == 0 || step == n_steps) result.samples.push_back(state);
  }
  result.outcome = Trapped{max_radius};
  return result;
}

double exit_angle(const TrajectoryResult& result) {
  const auto* escaped = std::get_if<Escaped>(&result.outcome);
  if (escaped == nullptr) throw std::logic_error("exit_angle: trajectory did not escape");
  return escaped->exit_angle;
}

}  // namespace magtrap
