#pragma once

#include <random>

#include <Eigen/Dense>
#include <vector>

#include "magtrap/quantum.hpp"

namespace magtrap::oracle {

inline constexpr Complex kI{0.0, 1.0};

// Direct evaluation of the forward-Euler bracket on a zero-padded 2D array,
// independent of the sparse assembly.
inline ComplexVector stencil_bracket(const Grid& grid, const RadialField& field, double alpha,
                                     const ComplexVector& psi) {
  const int n = grid.n();
  const double d = grid.spacing();
  auto pad = [n](int j, int k) { return static_cast<std::size_t>(k) * (n + 2) + j; };
  std::vector<Complex> p((n + 2) * (n + 2), Complex{});
  std::vector<double> ax((n + 2) * (n + 2), 0.0);
  std::vector<double> ay((n + 2) * (n + 2), 0.0);
  for (int k = 0; k <= n + 1; ++k) {
    for (int j = 0; j <= n + 1; ++j) {
      const double x = -grid.half_width() + j * d;
      const double y = -grid.half_width() + k * d;
      std::tie(ax[pad(j, k)], ay[pad(j, k)]) = field.A_cartesian(x, y);
      if (j >= 1 && j <= n && k >= 1 && k <= n) {
        p[pad(j, k)] = psi[static_cast<Eigen::Index>((k - 1) * n + (j - 1))];
      }
    }
  }
  ComplexVector out(psi.size());
  for (int k = 1; k <= n; ++k) {
    for (int j = 1; j <= n; ++j) {
      const auto c = pad(j, k), e = pad(j + 1, k), w = pad(j - 1, k), no = pad(j, k + 1),
                 so = pad(j, k - 1);
      const Complex lap = (p[e] - 2.0 * p[c] + p[w]) / (d * d) + (p[no] - 2.0 * p[c] + p[so]) / (d * d);
      const Complex div = (ax[e] * p[e] - ax[w] * p[w]) / (2.0 * d) +
                          (ay[no] * p[no] - ay[so] * p[so]) / (2.0 * d);
      const Complex adv = ax[c] * (p[e] - p[w]) / (2.0 * d) + ay[c] * (p[no] - p[so]) / (2.0 * d);
      const double a2 = ax[c] * ax[c] + ay[c] * ay[c];
      out[static_cast<Eigen::Index>((k - 1) * n + (j - 1))] =
          0.5 * (lap - kI * alpha * (div + adv) - alpha * alpha * a2 * p[c]);
    }
  }
  return out;
}

inline ComplexVector random_state(std::size_t size, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ComplexVector v(static_cast<Eigen::Index>(size));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = Complex(g(rng), g(rng));
  return v;
}

inline ComplexVector dense_cn(const DiscreteHamiltonian& h, const ComplexVector& psi, double dt) {
  const Eigen::MatrixXcd dense = Eigen::MatrixXcd(h.matrix());
  const auto id = Eigen::MatrixXcd::Identity(dense.rows(), dense.cols());
  const Eigen::MatrixXcd lhs = id - kI * (0.5 * dt) * dense;
  const Eigen::MatrixXcd rhs = id + kI * (0.5 * dt) * dense;
  return lhs.partialPivLu().solve(rhs * psi);
}

}  // namespace magtrap::oracle
