#include <doctest.h>

#include <cmath>
#include <numbers>

#include "magtrap/classical.hpp"

using namespace magtrap;

namespace {

const FieldParams kUnit{1.0, 1.0, 1.0, 1.0};

// Closed-form cyclotron orbit for a uniform field, started at the origin
// moving along +x: omega = qB/m, centre (0, -v/omega).
ParticleState cyclotron(double v, double omega, double t) {
  const double r = v / omega;
  return {r * std::sin(omega * t), -r * (1.0 - std::cos(omega * t)), v * std::cos(omega * t),
          -v * std::sin(omega * t), t};
}

double position_error_after(double period_fraction, int steps) {
  const UniformField field(kUnit);
  const double t_end = 2.0 * std::numbers::pi * period_fraction;
  const double h = t_end / steps;
  ParticleState s{0.0, 0.0, 1.0, 0.0, 0.0};
  for (int i = 0; i < steps; ++i) s = rk4_step(field, s, h);
  const ParticleState exact = cyclotron(1.0, 1.0, t_end);
  return std::hypot(s.x - exact.x, s.y - exact.y);
}

}  // namespace

TEST_CASE("lorentz_accel") {
  const LinearFluxFreeField field(kUnit);
  auto [ax, ay] = lorentz_accel(field, ParticleState{0.0, 0.0, 1.0, 0.0, 0.0});
  CHECK(ax == 0.0);
  CHECK(ay == -1.0);

  std::tie(ax, ay) = lorentz_accel(field, ParticleState{1.2, 0.3, 0.7, -0.4, 0.0});
  CHECK(ax == 0.0);
  CHECK(ay == 0.0);

  std::tie(ax, ay) = lorentz_accel(field, ParticleState{0.2, 0.1, 0.0, 0.0, 0.0});
  CHECK(ax == 0.0);
  CHECK(ay == 0.0);
}

TEST_CASE("rk4_step against the cyclotron solution") {
  const UniformField field(kUnit);
  const int steps = static_cast<int>(std::round(2.0 * std::numbers::pi / 1e-3));
  const double h = 2.0 * std::numbers::pi / steps;
  ParticleState s{0.0, 0.0, 1.0, 0.0, 0.0};
  for (int i = 0; i < steps; ++i) s = rk4_step(field, s, h);
  CHECK(std::hypot(s.x, s.y) < 1e-6);
  CHECK(s.t == doctest::Approx(2.0 * std::numbers::pi));

  CHECK_THROWS_AS(rk4_step(field, s, 0.0), std::invalid_argument);
}

TEST_CASE("rk4_step in zero field is straight-line motion") {
  const LinearFluxFreeField field(FieldParams{0.0, 1.0, 1.0, 1.0});
  ParticleState s{0.1, -0.2, 0.3, 0.4, 0.0};
  for (int i = 0; i < 1000; ++i) s = rk4_step(field, s, 1e-3);
  CHECK(s.vx == 0.3);
  CHECK(s.vy == 0.4);
  CHECK(s.x == doctest::Approx(0.1 + 0.3).epsilon(1e-13));
  CHECK(s.y == doctest::Approx(-0.2 + 0.4).epsilon(1e-13));
}

TEST_CASE("rk4 global error is fourth order") {
  // Quarter period keeps the error well above round-off.
  const double coarse = position_error_after(0.25, 100);
  const double fine = position_error_after(0.25, 200);
  const double ratio = coarse / fine;
  CAPTURE(coarse);
  CAPTURE(fine);
  CHECK(ratio > 14.0);
  CHECK(ratio < 18.0);
}

TEST_CASE("integrate classifies escape and trapping") {
  const LinearFluxFreeField field(kUnit);

  const TrajectoryResult fast = integrate(field, 0.2, 1e-3, 200.0);
  REQUIRE(fast.escaped());
  const auto& exit = std::get<Escaped>(fast.outcome).exit_state;
  CHECK(exit.radius() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fast.samples.back().t == exit.t);

  const TrajectoryResult slow = integrate(field, 0.06, 1e-3, 200.0);
  REQUIRE(slow.trapped());
  CHECK(std::get<Trapped>(slow.outcome).max_radius ==
        doctest::Approx(bounding_radius(kUnit, 0.06).value()).epsilon(1e-3));

  const TrajectoryResult rest = integrate(field, 0.0, 1e-3, 10.0);
  REQUIRE(rest.trapped());
  CHECK(std::get<Trapped>(rest.outcome).max_radius == 0.0);

  CHECK_THROWS_AS(integrate(field, 0.1, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(integrate(field, 0.1, 1e-3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(integrate(field, 0.1, -1e-3, 1.0), std::invalid_argument);
}

TEST_CASE("sample stride keeps endpoints") {
  const LinearFluxFreeField field(kUnit);
  const TrajectoryResult r = integrate(field, 0.06, 1e-3, 1.0, IntegrateOptions{100});
  CHECK(r.samples.size() == 11);
  CHECK(r.samples.front().t == 0.0);
  CHECK(r.samples.back().t == doctest::Approx(1.0));
  CHECK(r.steps_taken == 1000);
}

TEST_CASE("exit_angle") {
  const LinearFluxFreeField field(kUnit);
  CHECK(std::abs(exit_angle(integrate(field, 0.2, 1e-3, 200.0))) <= 0.01);
  CHECK(std::abs(exit_angle(integrate(field, 10.0 * escape_speed(kUnit), 1e-3, 200.0))) <= 0.01);

  const LinearFluxFreeField empty(FieldParams{0.0, 1.0, 1.0, 1.0});
  CHECK(exit_angle(integrate(empty, 0.5, 1e-3, 10.0)) == 0.0);

  CHECK_THROWS_AS(exit_angle(integrate(field, 0.06, 1e-3, 5.0)), std::logic_error);
}

TEST_CASE("speed and canonical angular momentum are conserved") {
  const LinearFluxFreeField field(kUnit);
  for (double v0 : {0.03, 0.1, 0.124, 0.3}) {
    CAPTURE(v0);
    const TrajectoryResult r = integrate(field, v0, 1e-3, 200.0);
    double speed_err = 0.0;
    double p_phi = 0.0;
    for (const auto& s : r.samples) {
      speed_err = std::max(speed_err, std::abs(s.speed() - v0));
      p_phi = std::max(p_phi, std::abs(canonical_angular_momentum(field, s.x, s.y, s.vx, s.vy)));
    }
    CHECK(speed_err <= 1e-8);
    CHECK(p_phi <= 1e-8);
  }
}

TEST_CASE("sub-threshold motion stays inside the bounding circle") {
  const LinearFluxFreeField field(kUnit);
  for (double v0 : {0.01, 0.05, 0.09, 0.12}) {
    CAPTURE(v0);
    const double bound = bounding_radius(kUnit, v0).value();
    const TrajectoryResult r = integrate(field, v0, 1e-3, 100.0);
    REQUIRE(r.trapped());
    for (const auto& s : r.samples) CHECK(s.radius() <= bound + 1e-6);
  }
}

TEST_CASE("escape threshold found by bisection") {
  const LinearFluxFreeField field(kUnit);
  double lo = 0.05;
  double hi = 0.25;
  for (int i = 0; i < 20; ++i) {
    const double mid = 0.5 * (lo + hi);
    (integrate(field, mid, 1e-3, 200.0).escaped() ? hi : lo) = mid;
  }
  CHECK(0.5 * (lo + hi) == doctest::Approx(0.125).epsilon(0.01));
}

TEST_CASE("reversed field rotates the other way but escapes the same") {
  const LinearFluxFreeField plus(kUnit);
  const LinearFluxFreeField minus(FieldParams{-1.0, 1.0, 1.0, 1.0});
  const TrajectoryResult a = integrate(plus, 0.2, 1e-3, 200.0);
  const TrajectoryResult b = integrate(minus, 0.2, 1e-3, 200.0);
  REQUIRE(a.escaped());
  REQUIRE(b.escaped());
  const auto& ea = std::get<Escaped>(a.outcome).exit_state;
  const auto& eb = std::get<Escaped>(b.outcome).exit_state;
  CHECK(ea.x == doctest::Approx(eb.x).epsilon(1e-12));
  CHECK(ea.y == doctest::Approx(-eb.y).epsilon(1e-12));
}
