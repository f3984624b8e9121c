#include "magtrap/quantum.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include <Eigen/SparseLU>

namespace magtrap {

namespace {

constexpr Complex kI{0.0, 1.0};

SparseComplexMatrix shifted_identity(const SparseComplexMatrix& h, Complex scale) {
  SparseComplexMatrix id(h.rows(), h.cols());
  id.setIdentity();
  SparseComplexMatrix out = id + scale * h;
  out.makeCompressed();
  return out;
}

}  // namespace

Grid::Grid(int n, double half_width) : n_(n), half_width_(half_width) {
  if (n < 8) throw std::invalid_argument("grid needs at least 8 points per axis");
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw std::invalid_argument("grid half-width must be positive");
  }
  spacing_ = 2.0 * half_width / (n + 1);
}

DiscreteHamiltonian::DiscreteHamiltonian(Grid grid, SparseComplexMatrix matrix, double alpha)
    : grid_(grid), matrix_(std::move(matrix)), alpha_(alpha) {}

WaveState initial_gaussian(const Grid& grid, double a_bar, double p_bar, double x0, double y0) {
  if (!(a_bar > 0.0)) throw std::invalid_argument("a_bar must be positive");
  const int n = grid.n();
  const double amplitude = a_bar * std::sqrt(2.0 / std::numbers::pi);
  WaveState psi{ComplexVector(static_cast<Eigen::Index>(grid.size())), 0};
  for (int k = 1; k <= n; ++k) {
    const double y = grid.coord(k) - y0;
    for (int j = 1; j <= n; ++j) {
      const double xa = grid.coord(j);
      const double x = xa - x0;
      const double envelope = amplitude * std::exp(-a_bar * a_bar * (x * x + y * y));
      psi.amps[static_cast<Eigen::Index>(grid.offset(j, k))] =
          envelope * std::exp(kI * (p_bar * xa));
    }
  }
  psi.amps /= std::sqrt(total_probability(psi, grid));
  return psi;
}

DiscreteHamiltonian assemble_hamiltonian(const Grid& grid, const RadialField& field, double alpha) {
  const int n = grid.n();
  const double d = grid.spacing();
  const double hop = 0.5 / (d * d);
  const auto size = static_cast<Eigen::Index>(grid.size());

  std::vector<double> ax(grid.size());
  std::vector<double> ay(grid.size());
  for (int k = 1; k <= n; ++k) {
    for (int j = 1; j <= n; ++j) {
      const auto [a_x, a_y] = field.A_cartesian(grid.coord(j), grid.coord(k));
      ax[grid.offset(j, k)] = a_x;
      ay[grid.offset(j, k)] = a_y;
    }
  }

  // Coupling between neighbours r and r' (r' = r + 1 along x, r + N along
  // y): hop - i c for the forward neighbour, hop + i c for the backward one,
  // with c = alpha (A_r + A_r') / (4 Delta). Both entries come from the same
  // rounded c, so the stored matrix is exactly Hermitian.
  auto link = [&](double a_here, double a_there) { return alpha * (a_here + a_there) / (4.0 * d); };

  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(grid.size() * 5);
  for (int k = 1; k <= n; ++k) {
    for (int j = 1; j <= n; ++j) {
      const auto r = static_cast<Eigen::Index>(grid.offset(j, k));
      const auto ur = static_cast<std::size_t>(r);
      const double a2 = ax[ur] * ax[ur] + ay[ur] * ay[ur];
      triplets.emplace_back(r, r, Complex(-4.0 * hop - 0.5 * alpha * alpha * a2, 0.0));
      if (j < n) {
        const double c = link(ax[ur], ax[ur + 1]);
        triplets.emplace_back(r, r + 1, Complex(hop, -c));
        triplets.emplace_back(r + 1, r, Complex(hop, c));
      }
      if (k < n) {
        const auto un = ur + static_cast<std::size_t>(n);
        const double c = link(ay[ur], ay[un]);
        triplets.emplace_back(r, r + n, Complex(hop, -c));
        triplets.emplace_back(r + n, r, Complex(hop, c));
      }
    }
  }
  SparseComplexMatrix h(size, size);
  h.setFromTriplets(triplets.begin(), triplets.end());
  h.makeCompressed();
  return DiscreteHamiltonian(grid, std::move(h), alpha);
}

struct CrankNicolson::Factorization {
  Eigen::SparseLU<SparseComplexMatrix, Eigen::COLAMDOrdering<int>> lu;
};

CrankNicolson::CrankNicolson(const DiscreteHamiltonian& hamiltonian, double dt)
    : dt_(dt), lu_(std::make_unique<Factorization>()) {
  if (!(dt != 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("Crank-Nicolson time step must be finite and non-zero");
  }
  lhs_ = shifted_identity(hamiltonian.matrix(), -kI * (0.5 * dt));
  rhs_ = shifted_identity(hamiltonian.matrix(), kI * (0.5 * dt));
  lu_->lu.analyzePattern(lhs_);
  lu_->lu.factorize(lhs_);
  if (lu_->lu.info() != Eigen::Success) {
    throw SolverError("Crank-Nicolson factorisation failed: " + lu_->lu.lastErrorMessage());
  }
}

CrankNicolson::~CrankNicolson() = default;
CrankNicolson::CrankNicolson(CrankNicolson&&) noexcept = default;
CrankNicolson& CrankNicolson::operator=(CrankNicolson&&) noexcept = default;

void CrankNicolson::step(WaveState& psi) const {
  const ComplexVector b = rhs_ * psi.amps;
  ComplexVector next = lu_->lu.solve(b);
  const double scale = b.norm();
  auto residual = [&] { return (b - lhs_ * next).eval(); };

  ComplexVector r = residual();
  if (r.norm() > kResidualTolerance * scale) {
    next += lu_->lu.solve(r);
    r = residual();
    if (r.norm() > kResidualTolerance * scale) {
      throw SolverError("Crank-Nicolson solve did not reach relative residual 1e-12 (got " +
                        std::to_string(r.norm() / scale) + ")");
    }
  }
  psi.amps = std::move(next);
  ++psi.step;
}

WaveState CrankNicolson::step(const WaveState& psi) const {
  WaveState out = psi;
  step(out);
  return out;
}

WaveState cn_step(const DiscreteHamiltonian& hamiltonian, const WaveState& psi, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("cn_step: dt must be positive");
  return CrankNicolson(hamiltonian, dt).step(psi);
}

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be >= 0");
  if (!(a_bar > 0.0) || !std::isfinite(a_bar)) throw std::invalid_argument("a_bar must be positive");
  if (!std::isfinite(p_bar)) throw std::invalid_argument("p_bar must be finite");
  if (!(R_bar > 0.0) || !std::isfinite(R_bar)) throw std::invalid_argument("R_bar must be positive");
  if (!std::isfinite(B0)) throw std::invalid_argument("B0 must be finite");
  if (stride == 0) throw std::invalid_argument("stride must be at least 1");
}

EvolveResult evolve(const SolverConfig& config, const Grid& grid) {
  config.validate();
  const LinearFluxFreeField field(FieldParams{config.B0, config.R_bar, 1.0, 1.0});
  return evolve(config, grid, field);
}

EvolveResult evolve(const SolverConfig& config, const Grid& grid, const RadialField& field) {
  config.validate();
  EvolveResult result{{}, assemble_hamiltonian(grid, field, config.alpha)};
  const CrankNicolson stepper(result.hamiltonian, config.dt);

  WaveState psi = initial_gaussian(grid, config.a_bar, config.p_bar);
  result.states.reserve(config.steps / config.stride + 1);
  result.states.push_back(psi);
  for (std::size_t n = 1; n <= config.steps; ++n) {
    stepper.step(psi);
    if (n % config.stride == 0) result.states.push_back(psi);
  }
  return result;
}

double total_probability(const WaveState& psi, const Grid& grid) {
  return grid.cell_area() * psi.amps.squaredNorm();
}

}  // namespace magtrap
