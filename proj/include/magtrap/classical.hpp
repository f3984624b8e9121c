#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <variant>
#include <vector>

#include "magtrap/field_model.hpp"

namespace magtrap {

/// Phase-space point of a particle confined to the plane.
struct ParticleState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double t = 0.0;

  double radius() const { return std::hypot(x, y); }
  double speed() const { return std::hypot(vx, vy); }
};

struct Escaped {
  ParticleState exit_state;
  double exit_angle = 0.0;
};

struct Trapped {
  double max_radius = 0.0;
};

struct Running {};

using Outcome = std::variant<Running, Trapped, Escaped>;

struct TrajectoryResult {
  std::vector<ParticleState> samples;
  Outcome outcome;
  std::size_t steps_taken = 0;

  bool escaped() const { return std::holds_alternative<Escaped>(outcome); }
  bool trapped() const { return std::holds_alternative<Trapped>(outcome); }
};

/// (q/m) B(s) (vy, -vx): the in-plane Lorentz acceleration for B = B(s) z-hat.
std::pair<double, double> lorentz_accel(const RadialField& field, const ParticleState& state);

/// One classical fourth-order Runge-Kutta step of x' = v, v' = lorentz_accel.
ParticleState rk4_step(const RadialField& field, const ParticleState& state, double h);

struct IntegrateOptions {
  /// Keep every k-th step in TrajectoryResult::samples. The initial state and
  /// the final (or exit) state are always kept.
  std::size_t sample_stride = 1;
};

/// Launches from the origin with velocity v0 x-hat and steps until the
/// particle leaves region_radius() (Escaped, with the crossing refined by
/// linear interpolation) or t_max is reached (Trapped).
///
/// Trapped is a statement about the horizon [0, t_max] only.
TrajectoryResult integrate(const RadialField& field, double v0, double h, double t_max,
                           IntegrateOptions options = {});

/// Signed angle in (-pi, pi] between the exit velocity and the outward
/// radial direction. Throws std::logic_error unless the result escaped.
double exit_angle(const TrajectoryResult& result);

}  // namespace magtrap
