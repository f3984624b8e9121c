#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "magtrap/field_model.hpp"
#include "magtrap/quantum.hpp"

namespace magtrap {

using Vec2 = Eigen::Vector2d;

// Expectation values use the box sum Delta^2 sum_jk with the zero frame
// outside the interior nodes.

/// <x>, normalised by the discrete norm.
Vec2 expect_position(const WaveState& psi, const Grid& grid);

/// Re <psi| -i D |psi> with centred differences D.
Vec2 expect_momentum(const WaveState& psi, const Grid& grid);

/// Physical energy -Delta^2 Re(psi^H H psi); positive for a free packet.
double expect_energy(const WaveState& psi, const DiscreteHamiltonian& hamiltonian);

/// Delta^2 sum of |psi|^2 over nodes with x^2 + y^2 <= R^2.
double prob_within_radius(const WaveState& psi, const Grid& grid, double radius);

/// Finite-difference time derivative of a sampled 2-vector series.
/// Interior samples use centred differences; the two endpoints use
/// second-order one-sided stencils and are flagged in `one_sided`.
struct DerivativeSeries {
  std::vector<Vec2> values;
  std::vector<bool> one_sided;
};

DerivativeSeries velocity_series(const std::vector<Vec2>& x, double dt);
DerivativeSeries accel_series(const std::vector<Vec2>& x, double dt);

/// (alpha/2) <p x B - B x p> - alpha^2 <A x B> in the plane, with the
/// symmetrised products evaluated as D(B psi) + B D psi.
Vec2 ehrenfest_force(const WaveState& psi, const Grid& grid, const RadialField& field,
                     double alpha);

/// alpha <v> x B(<x>) z-hat = alpha B(|<x>|) (v_y, -v_x).
Vec2 classicalish_force(const Vec2& v_exp, const Vec2& x_exp, const RadialField& field,
                        double alpha);

struct ObservableSeries {
  std::vector<std::size_t> step;
  std::vector<double> t;
  std::vector<Vec2> x_exp;
  std::vector<Vec2> p_exp;
  std::vector<Vec2> v_exp;
  std::vector<double> speed;
  std::vector<double> energy;
  std::vector<double> norm;
  std::vector<double> prob_in_R;
  std::vector<Vec2> f_lhs;
  std::vector<Vec2> f_ehrenfest;
  std::vector<Vec2> f_classicalish;
  /// True where a time derivative fell back to a one-sided stencil.
  std::vector<bool> endpoint;

  std::size_t size() const { return t.size(); }
};

/// Builds every series from snapshots spaced uniformly in step index.
/// Needs at least three snapshots.
ObservableSeries compute_series(const std::vector<WaveState>& states,
                                const DiscreteHamiltonian& hamiltonian, const RadialField& field,
                                double dt, double R_bar);

class NoCrossingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Angle in [0, pi] between <v> and phi-hat where <x> first crosses R_bar
/// (linear interpolation between the straddling samples). A radial exit
/// gives pi/2. Throws NoCrossingError when <x> never leaves the disk.
double exit_angle_quantum(const ObservableSeries& series, double R_bar);

/// Index of the first sample with |<x>| > R_bar, if any.
std::ptrdiff_t first_exit_index(const ObservableSeries& series, double R_bar);

struct ForceFit {
  double rms_ehrenfest = 0.0;
  double rms_classicalish = 0.0;
  std::size_t samples = 0;
};

/// RMS of |f_lhs - f| over the interior (non-endpoint) samples.
ForceFit force_fit(const ObservableSeries& series);

}  // namespace magtrap
