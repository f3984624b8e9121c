#pragma once

#include <memory>
#include <optional>
#include <utility>

namespace magtrap {

/// Parameters of a radially symmetric field region of radius R, plus the
/// charge and mass of the particle moving through it. B0 and q may carry
/// either sign; flipping one reverses the rotation sense.
struct FieldParams {
  double B0 = 1.0;
  double R = 1.0;
  double q = 1.0;
  double m = 1.0;

  /// Throws std::invalid_argument unless R > 0 and m > 0 (all finite).
  void validate() const;
  double charge_to_mass() const { return q / m; }

  bool operator==(const FieldParams&) const = default;
};

struct FieldSample {
  double s = 0.0;
  double B_z = 0.0;
  double A_phi = 0.0;
};

/// A radially symmetric field B(s) z-hat with its azimuthal potential
/// A(s) phi-hat. Implementations must satisfy (1/s) d(sA)/ds = B.
class RadialField {
 public:
  explicit RadialField(FieldParams params);
  virtual ~RadialField() = default;

  virtual double B(double s) const = 0;
  virtual double A(double s) const = 0;

  /// Radius outside of which both B and A vanish. Infinite for fields
  /// without a bounded region.
  virtual double region_radius() const { return params_.R; }

  /// max |A(s)| over [0, region_radius()]. The default samples 10^4
  /// points and refines the best bracket with golden-section search.
  virtual double max_potential() const;

  const FieldParams& params() const { return params_; }
  FieldSample sample(double s) const { return {s, B(s), A(s)}; }

  /// Cartesian components of A(s) phi-hat; (0, 0) at the origin.
  std::pair<double, double> A_cartesian(double x, double y) const;

 private:
  FieldParams params_;
};

/// B = B0 (1 - 3s/(2R)) inside s <= R, zero outside. Its flux through the
/// disk vanishes, which pins A(R) = 0.
class LinearFluxFreeField final : public RadialField {
 public:
  explicit LinearFluxFreeField(FieldParams params);

  double B(double s) const override;
  double A(double s) const override;
  /// Analytic: |B0| R / 8 at s = R/2.
  double max_potential() const override;
};

/// Uniform B0 everywhere with the symmetric-gauge potential A = B0 s / 2.
/// Used to compare against closed-form cyclotron motion.
class UniformField final : public RadialField {
 public:
  explicit UniformField(FieldParams params);

  double B(double s) const override;
  double A(double s) const override;
  double region_radius() const override;
  double max_potential() const override;
};

// Operations on the default (linear flux-free) family. Negative s throws
// std::invalid_argument.
double eval_B(const FieldParams& params, double s);
double eval_A(const FieldParams& params, double s);
std::pair<double, double> eval_A_cartesian(const FieldParams& params, double x, double y);

/// Composite-Simpson value of the integral of B(s) 2 pi s over [0, R].
double flux_check(const RadialField& field, int n_quad);
double flux_check(const FieldParams& params, int n_quad);

/// |q| A_max / m: the minimum launch speed from the centre that reaches R.
double escape_speed(const RadialField& field);
double escape_speed(const FieldParams& params);

/// Smallest s > 0 with |q| A(s) / m = v0, or nullopt when v0 is at or
/// above the escape speed (except exactly at the threshold for the
/// analytic family, where the double root R/2 is returned).
std::optional<double> bounding_radius(const RadialField& field, double v0);
std::optional<double> bounding_radius(const FieldParams& params, double v0);

/// Canonical angular momentum m (x vy - y vx) + q s A(s).
double canonical_angular_momentum(const RadialField& field, double x, double y, double vx,
                                  double vy);

std::shared_ptr<const RadialField> make_linear_field(const FieldParams& params);
std::shared_ptr<const RadialField> make_uniform_field(const FieldParams& params);

}  // namespace magtrap
