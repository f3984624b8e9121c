#include "magtrap/observables.hpp"

#include <algorithm>
#include <cmath>

namespace magtrap {

namespace {

constexpr Complex kMinusI{0.0, -1.0};

Eigen::Index at(const Grid& grid, int j, int k) {
  return static_cast<Eigen::Index>(grid.offset(j, k));
}

// Centred difference along x (axis 0) or y (axis 1), zero outside the frame.
ComplexVector centred_difference(const ComplexVector& f, const Grid& grid, int axis) {
  const int n = grid.n();
  const double inv = 1.0 / (2.0 * grid.spacing());
  ComplexVector out(f.size());
  for (int k = 1; k <= n; ++k) {
    for (int j = 1; j <= n; ++j) {
      Complex fwd{0.0, 0.0};
      Complex bwd{0.0, 0.0};
      if (axis == 0) {
        if (j < n) fwd = f[at(grid, j + 1, k)];
        if (j > 1) bwd = f[at(grid, j - 1, k)];
      } else {
        if (k < n) fwd = f[at(grid, j, k + 1)];
        if (k > 1) bwd = f[at(grid, j, k - 1)];
      }
      out[at(grid, j, k)] = (fwd - bwd) * inv;
    }
  }
  return out;
}

// Re <psi| op |psi> as a box sum, with op psi already evaluated.
double box_expectation(const ComplexVector& psi, const ComplexVector& op_psi, const Grid& grid) {
  return grid.cell_area() * psi.dot(op_psi).real();
}

void require_uniform(const std::vector<Vec2>& x, double dt) {
  if (x.size() < 3) throw std::invalid_argument("time series needs at least 3 samples");
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
}

}  // namespace

Vec2 expect_position(const WaveState& psi, const Grid& grid) {
  const int n = grid.n();
  double sx = 0.0;
  double sy = 0.0;
  double total = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double y = grid.coord(k);
    for (int j = 1; j <= n; ++j) {
      const double w = std::norm(psi.amps[at(grid, j, k)]);
      sx += w * grid.coord(j);
      sy += w * y;
      total += w;
    }
  }
  return {sx / total, sy / total};
}

Vec2 expect_momentum(const WaveState& psi, const Grid& grid) {
  const ComplexVector dx = kMinusI * centred_difference(psi.amps, grid, 0);
  const ComplexVector dy = kMinusI * centred_difference(psi.amps, grid, 1);
  return {box_expectation(psi.amps, dx, grid), box_expectation(psi.amps, dy, grid)};
}

double expect_energy(const WaveState& psi, const DiscreteHamiltonian& hamiltonian) {
  return -box_expectation(psi.amps, hamiltonian.apply(psi.amps), hamiltonian.grid());
}

double prob_within_radius(const WaveState& psi, const Grid& grid, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  const int n = grid.n();
  const double r2 = radius * radius;
  double sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double y = grid.coord(k);
    for (int j = 1; j <= n; ++j) {
      const double x = grid.coord(j);
      if (x * x + y * y <= r2) sum += std::norm(psi.amps[at(grid, j, k)]);
    }
  }
  return grid.cell_area() * sum;
}

DerivativeSeries velocity_series(const std::vector<Vec2>& x, double dt) {
  require_uniform(x, dt);
  const std::size_t n = x.size();
  DerivativeSeries out{std::vector<Vec2>(n), std::vector<bool>(n, false)};
  for (std::size_t i = 1; i + 1 < n; ++i) out.values[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
  out.values[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * dt);
  out.values[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * dt);
  out.one_sided.front() = true;
  out.one_sided.back() = true;
  return out;
}

DerivativeSeries accel_series(const std::vector<Vec2>& x, double dt) {
  require_uniform(x, dt);
  const std::size_t n = x.size();
  const double inv = 1.0 / (dt * dt);
  DerivativeSeries out{std::vector<Vec2>(n), std::vector<bool>(n, false)};
  for (std::size_t i = 1; i + 1 < n; ++i) out.values[i] = (x[i + 1] - 2.0 * x[i] + x[i - 1]) * inv;
  out.values[0] = (x[0] - 2.0 * x[1] + x[2]) * inv;
  out.values[n - 1] = (x[n - 1] - 2.0 * x[n - 2] + x[n - 3]) * inv;
  out.one_sided.front() = true;
  out.one_sided.back() = true;
  return out;
}

Vec2 ehrenfest_force(const WaveState& psi, const Grid& grid, const RadialField& field,
                     double alpha) {
  if (alpha == 0.0) return Vec2::Zero();
  const int n = grid.n();
  std::vector<double> b_node(grid.size());
  ComplexVector b_psi(psi.amps.size());
  double axb_x = 0.0;
  double axb_y = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double y = grid.coord(k);
    for (int j = 1; j <= n; ++j) {
      const double x = grid.coord(j);
      const auto idx = at(grid, j, k);
      const double b = field.B(std::hypot(x, y));
      const auto [a_x, a_y] = field.A_cartesian(x, y);
      const double w = std::norm(psi.amps[idx]);
      b_node[static_cast<std::size_t>(idx)] = b;
      b_psi[idx] = b * psi.amps[idx];
      // A x (B z-hat) = (A_y B, -A_x B)
      axb_x += w * a_y * b;
      axb_y -= w * a_x * b;
    }
  }
  axb_x *= grid.cell_area();
  axb_y *= grid.cell_area();

  // <p_a B + B p_a> with p = -i D, evaluated as -i [D(B psi) + B D psi].
  auto symmetrised = [&](int axis) {
    const ComplexVector d_b_psi = centred_difference(b_psi, grid, axis);
    const ComplexVector d_psi = centred_difference(psi.amps, grid, axis);
    ComplexVector op(psi.amps.size());
    for (Eigen::Index i = 0; i < op.size(); ++i) {
      op[i] = kMinusI * (d_b_psi[i] + b_node[static_cast<std::size_t>(i)] * d_psi[i]);
    }
    return box_expectation(psi.amps, op, grid);
  };
  const double px_b = symmetrised(0);
  const double py_b = symmetrised(1);

  return Vec2(0.5 * alpha * py_b - alpha * alpha * axb_x,
              -0.5 * alpha * px_b - alpha * alpha * axb_y);
}

Vec2 classicalish_force(const Vec2& v_exp, const Vec2& x_exp, const RadialField& field,
                        double alpha) {
  const double b = field.B(x_exp.norm());
  return alpha * b * Vec2(v_exp.y(), -v_exp.x());
}

ObservableSeries compute_series(const std::vector<WaveState>& states,
                                const DiscreteHamiltonian& hamiltonian, const RadialField& field,
                                double dt, double R_bar) {
  if (states.size() < 3) throw std::invalid_argument("need at least 3 snapshots");
  const std::size_t stride = states[1].step - states[0].step;
  if (stride == 0) throw std::invalid_argument("snapshots must advance in step");
  for (std::size_t i = 1; i < states.size(); ++i) {
    if (states[i].step - states[i - 1].step != stride) {
      throw std::invalid_argument("snapshots must be uniformly spaced");
    }
  }
  const Grid& grid = hamiltonian.grid();
  const double alpha = hamiltonian.alpha();
  const double sample_dt = dt * static_cast<double>(stride);

  ObservableSeries s;
  for (const auto& psi : states) {
    s.step.push_back(psi.step);
    s.t.push_back(dt * static_cast<double>(psi.step));
    s.x_exp.push_back(expect_position(psi, grid));
    s.p_exp.push_back(expect_momentum(psi, grid));
    s.energy.push_back(expect_energy(psi, hamiltonian));
    s.norm.push_back(total_probability(psi, grid));
    s.prob_in_R.push_back(prob_within_radius(psi, grid, R_bar));
    s.f_ehrenfest.push_back(ehrenfest_force(psi, grid, field, alpha));
  }
  const DerivativeSeries v = velocity_series(s.x_exp, sample_dt);
  const DerivativeSeries a = accel_series(s.x_exp, sample_dt);
  s.v_exp = v.values;
  s.f_lhs = a.values;
  s.endpoint = v.one_sided;
  for (std::size_t i = 0; i < s.size(); ++i) {
    s.speed.push_back(s.v_exp[i].norm());
    s.f_classicalish.push_back(classicalish_force(s.v_exp[i], s.x_exp[i], field, alpha));
  }
  return s;
}

std::ptrdiff_t first_exit_index(const ObservableSeries& series, double R_bar) {
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.x_exp[i].norm() > R_bar) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

double exit_angle_quantum(const ObservableSeries& series, double R_bar) {
  const std::ptrdiff_t out = first_exit_index(series, R_bar);
  if (out <= 0) throw NoCrossingError("<x> does not cross the field-region radius");
  const auto i = static_cast<std::size_t>(out);
  const Vec2& p0 = series.x_exp[i - 1];
  const Vec2& p1 = series.x_exp[i];
  const Vec2 d = p1 - p0;
  const double a = d.squaredNorm();
  const double b = 2.0 * p0.dot(d);
  const double c = p0.squaredNorm() - R_bar * R_bar;
  const double f = std::clamp((-b + std::sqrt(std::max(b * b - 4.0 * a * c, 0.0))) / (2.0 * a),
                              0.0, 1.0);
  const Vec2 x = p0 + f * d;
  const Vec2 v = series.v_exp[i - 1] + f * (series.v_exp[i] - series.v_exp[i - 1]);
  const Vec2 phi_hat = Vec2(-x.y(), x.x()) / x.norm();
  const double cross = phi_hat.x() * v.y() - phi_hat.y() * v.x();
  return std::atan2(std::abs(cross), phi_hat.dot(v));
}

ForceFit force_fit(const ObservableSeries& series) {
  ForceFit fit;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.endpoint[i]) continue;
    fit.rms_ehrenfest += (series.f_lhs[i] - series.f_ehrenfest[i]).squaredNorm();
    fit.rms_classicalish += (series.f_lhs[i] - series.f_classicalish[i]).squaredNorm();
    ++fit.samples;
  }
  if (fit.samples > 0) {
    fit.rms_ehrenfest = std::sqrt(fit.rms_ehrenfest / static_cast<double>(fit.samples));
    fit.rms_classicalish = std::sqrt(fit.rms_classicalish / static_cast<double>(fit.samples));
  }
  return fit;
}

}  // namespace magtrap
