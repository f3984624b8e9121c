#include "magtrap/field_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace magtrap {

namespace {

void require_radius(double s) {
  if (!(s >= 0.0)) {
    throw std::invalid_argument("radial coordinate must be non-negative, got " +
                                std::to_string(s));
  }
}

struct Extremum {
  double s = 0.0;
  double value = 0.0;
};

// Location and value of max |A| on [0, hi].
Extremum locate_potential_max(const RadialField& field, double hi) {
  constexpr int kSamples = 10000;
  auto f = [&](double s) { return std::abs(field.A(s)); };

  int best = 0;
  double best_value = f(0.0);
  for (int i = 1; i <= kSamples; ++i) {
    const double v = f(hi * i / kSamples);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }

  double a = hi * std::max(best - 1, 0) / kSamples;
  double b = hi * std::min(best + 1, kSamples) / kSamples;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * (1.0 + hi); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  Extremum out{best * hi / kSamples, best_value};
  const double mid = 0.5 * (a + b);
  if (f(mid) > out.value) out = {mid, f(mid)};
  return out;
}

}  // namespace

void FieldParams::validate() const {
  if (!std::isfinite(B0) || !std::isfinite(q)) {
    throw std::invalid_argument("B0 and q must be finite");
  }
  if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("R must be positive");
  if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("m must be positive");
}

RadialField::RadialField(FieldParams params) : params_(params) { params_.validate(); }

double RadialField::max_potential() const {
  return locate_potential_max(*this, region_radius()).value;
}

std::pair<double, double> RadialField::A_cartesian(double x, double y) const {
  const double s = std::hypot(x, y);
  if (s == 0.0) return {0.0, 0.0};
  const double a = A(s) / s;
  return {-a * y, a * x};
}

LinearFluxFreeField::LinearFluxFreeField(FieldParams params) : RadialField(params) {}

double LinearFluxFreeField::B(double s) const {
  require_radius(s);
  const auto& p = params();
  if (s > p.R) return 0.0;
  return p.B0 * (1.0 - 1.5 * s / p.R);
}

double LinearFluxFreeField::A(double s) const {
  require_radius(s);
  const auto& p = params();
  if (s > p.R) return 0.0;
  return 0.5 * p.B0 * s * (1.0 - s / p.R);
}

double LinearFluxFreeField::max_potential() const {
  return std::abs(params().B0) * params().R / 8.0;
}

UniformField::UniformField(FieldParams params) : RadialField(params) {}

double UniformField::B(double s) const {
  require_radius(s);
  return params().B0;
}

double UniformField::A(double s) const {
  require_radius(s);
  return 0.5 * params().B0 * s;
}

double UniformField::region_radius() const { return std::numeric_limits<double>::infinity(); }

double UniformField::max_potential() const { return std::numeric_limits<double>::infinity(); }

double eval_B(const FieldParams& params, double s) { return LinearFluxFreeField(params).B(s); }

double eval_A(const FieldParams& params, double s) { return LinearFluxFreeField(params).A(s); }

std::pair<double, double> eval_A_cartesian(const FieldParams& params, double x, double y) {
  return LinearFluxFreeField(params).A_cartesian(x, y);
}

double flux_check(const RadialField& field, int n_quad) {
  if (n_quad < 16) throw std::invalid_argument("flux_check needs at least 16 panels");
  // Composite Simpson over n_quad panels: exact for the quadratic integrand
  // B(s) s of the linear family.
  const double R = field.params().R;
  const double h = R / n_quad;
  auto f = [&](double s) { return field.B(s) * s; };
  double sum = f(0.0) + f(R);
  for (int i = 0; i < n_quad; ++i) sum += 4.0 * f((i + 0.5) * h);
  for (int i = 1; i < n_quad; ++i) sum += 2.0 * f(i * h);
  return 2.0 * std::numbers::pi * sum * h / 6.0;
}

double flux_check(const FieldParams& params, int n_quad) {
  return flux_check(LinearFluxFreeField(params), n_quad);
}

double escape_speed(const RadialField& field) {
  const auto& p = field.params();
  return std::abs(p.q) * field.max_potential() / p.m;
}

double escape_speed(const FieldParams& params) { return escape_speed(LinearFluxFreeField(params)); }

std::optional<double> bounding_radius(const RadialField& field, double v0) {
  if (!(v0 >= 0.0)) throw std::invalid_argument("v0 must be non-negative");
  if (v0 == 0.0) return 0.0;

  const auto& p = field.params();
  if (dynamic_cast<const LinearFluxFreeField*>(&field) != nullptr) {
    const double qb = std::abs(p.q * p.B0);
    if (qb == 0.0) return std::nullopt;
    const double disc = 1.0 - 8.0 * p.m * v0 / (qb * p.R);
    if (disc < 0.0) return std::nullopt;
    return 0.5 * p.R * (1.0 - std::sqrt(disc));
  }

  // Generic family: bisection on |q| A(s) / m - v0 up to the first maximum.
  const double hi_radius = field.region_radius();
  if (!std::isfinite(hi_radius)) {
    throw std::invalid_argument("bounding_radius needs a field with a finite region");
  }
  const Extremum peak = locate_potential_max(field, hi_radius);
  auto g = [&](double s) { return std::abs(p.q * field.A(s)) / p.m - v0; };
  if (g(peak.s) < 0.0) return std::nullopt;

  // First sign change scanning outward, then bisect.
  constexpr int kScan = 10000;
  double lo = 0.0;
  double hi = peak.s;
  for (int i = 1; i <= kScan; ++i) {
    const double s = peak.s * i / kScan;
    if (g(s) >= 0.0) {
      hi = s;
      lo = peak.s * (i - 1) / kScan;
      break;
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi_radius; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) >= 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

std::optional<double> bounding_radius(const FieldParams& params, double v0) {
  return bounding_radius(LinearFluxFreeField(params), v0);
}

double canonical_angular_momentum(const RadialField& field, double x, double y, double vx,
                                  double vy) {
  const auto& p = field.params();
  const double s = std::hypot(x, y);
  return p.m * (x * vy - y * vx) + p.q * s * field.A(s);
}

std::shared_ptr<const RadialField> make_linear_field(const FieldParams& params) {
  return std::make_shared<LinearFluxFreeField>(params);
}

std::shared_ptr<const RadialField> make_uniform_field(const FieldParams& params) {
  return std::make_shared<UniformField>(params);
}

}  // namespace magtrap
