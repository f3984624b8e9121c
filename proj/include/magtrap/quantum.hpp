#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "magtrap/field_model.hpp"

namespace magtrap {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using SparseComplexMatrix = Eigen::SparseMatrix<Complex>;

/// Raised when the implicit solve cannot reach its residual tolerance.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// N x N interior nodes on the square [-L, L]^2. Node j (1-based) sits at
/// -L + j * spacing with spacing = 2L / (N + 1), so the wavefunction's zero
/// frame lies exactly on x = +-L.
///
/// Storage is 0-based: node (j, k) lives at offset (k - 1) N + (j - 1),
/// i.e. the 1-based embedding g(j, k) = (k - 1) N + j minus one.
class Grid {
 public:
  Grid(int n, double half_width);

  int n() const { return n_; }
  double half_width() const { return half_width_; }
  double spacing() const { return spacing_; }
  double cell_area() const { return spacing_ * spacing_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_); }

  /// Coordinate of 1-based node index j in 1..N (same for both axes).
  double coord(int j) const { return -half_width_ + j * spacing_; }

  /// 1-based logical embedding g(j, k) = (k - 1) N + j.
  std::size_t g(int j, int k) const {
    return static_cast<std::size_t>(k - 1) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(j);
  }
  std::size_t offset(int j, int k) const { return g(j, k) - 1; }

 private:
  int n_;
  double half_width_;
  double spacing_;
};

struct WaveState {
  ComplexVector amps;
  std::size_t step = 0;
};

/// Sparse matrix H of the forward-Euler update psi' = (I + i dt H) psi:
///   H psi = (1/2) [ lap psi - i alpha (D.(A psi) + A.D psi) - alpha^2 |A|^2 psi ]
/// with the 5-point Laplacian and centred differences D. Note the sign:
/// this is minus the physical Hamiltonian, so <E> = -cell_area psi^H H psi.
class DiscreteHamiltonian {
 public:
  DiscreteHamiltonian(Grid grid, SparseComplexMatrix matrix, double alpha);

  const Grid& grid() const { return grid_; }
  const SparseComplexMatrix& matrix() const { return matrix_; }
  double alpha() const { return alpha_; }

  ComplexVector apply(const ComplexVector& psi) const { return matrix_ * psi; }

 private:
  Grid grid_;
  SparseComplexMatrix matrix_;
  double alpha_;
};

/// Samples a_bar sqrt(2/pi) exp(-a_bar^2 ((x-x0)^2 + (y-y0)^2)) exp(i p_bar x)
/// on the interior nodes and rescales to unit discrete norm.
WaveState initial_gaussian(const Grid& grid, double a_bar, double p_bar, double x0 = 0.0,
                           double y0 = 0.0);

DiscreteHamiltonian assemble_hamiltonian(const Grid& grid, const RadialField& field,
                                         double alpha);

/// Crank-Nicolson stepper (I - i dt/2 H) psi' = (I + i dt/2 H) psi with the
/// left-hand factorisation computed once. A negative dt steps backwards and
/// is the exact algebraic inverse of the forward step.
class CrankNicolson {
 public:
  static constexpr double kResidualTolerance = 1e-12;

  CrankNicolson(const DiscreteHamiltonian& hamiltonian, double dt);
  ~CrankNicolson();
  CrankNicolson(CrankNicolson&&) noexcept;
  CrankNicolson& operator=(CrankNicolson&&) noexcept;

  double dt() const { return dt_; }

  /// Advances in place. Throws SolverError when the relative residual of
  /// the solve exceeds kResidualTolerance after one refinement sweep.
  void step(WaveState& psi) const;
  WaveState step(const WaveState& psi) const;

 private:
  struct Factorization;
  double dt_;
  SparseComplexMatrix lhs_;
  SparseComplexMatrix rhs_;
  std::unique_ptr<Factorization> lu_;
};

/// Single Crank-Nicolson step; factorises on every call. Prefer CrankNicolson
/// for repeated stepping.
WaveState cn_step(const DiscreteHamiltonian& hamiltonian, const WaveState& psi, double dt);

/// Run parameters in the dimensionless units hbar = m = 1.
struct SolverConfig {
  double dt = 0.01;
  std::size_t steps = 60;
  double alpha = 5.0;
  double a_bar = 1.0;
  double p_bar = 4.0;
  double R_bar = 2.0;
  double B0 = 1.0;
  /// Keep states whose step index is a multiple of stride (step 0 included).
  std::size_t stride = 1;

  void validate() const;
};

struct EvolveResult {
  std::vector<WaveState> states;
  DiscreteHamiltonian hamiltonian;
};

/// Evolves initial_gaussian through config.steps Crank-Nicolson steps in
/// the linear flux-free field of radius R_bar (or the supplied field).
EvolveResult evolve(const SolverConfig& config, const Grid& grid);
EvolveResult evolve(const SolverConfig& config, const Grid& grid, const RadialField& field);

/// Delta^2 sum |psi|^2.
double total_probability(const WaveState& psi, const Grid& grid);

}  // namespace magtrap
