#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <variant>

namespace twofold {

// Three-component real vector; doubles as the phase-space state (x, y, z)
// where x is the signed distance from the discontinuity surface.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }
  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

using State3 = Vec3;

inline double norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }
inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

enum class Side { Left, Right };

// Normal-form parameters V- and V+ together with the constants derived from
// them.  Construction validates V- < 0, V+ < 0 and V-V+ > 1 (strictly, with a
// 1e-12 margin) and throws Error(InvalidParams) otherwise.
class TwoFoldParams {
 public:
  TwoFoldParams(double v_minus, double v_plus);

  double v_minus() const noexcept { return v_minus_; }
  double v_plus() const noexcept { return v_plus_; }
  // Weak (smaller magnitude) eigenvalue of the sliding matrix.
  double lambda_weak() const noexcept { return lambda_; }
  // Unstable multiplier of the crossing return map.
  double mu() const noexcept { return mu_; }
  // Unstable eigenvector of the return map is (1, gamma).
  double gamma() const noexcept { return gamma_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

 private:
  double v_minus_;
  double v_plus_;
  double lambda_;
  double mu_;
  double gamma_;
  double alpha_;
  double beta_;
};

enum class Region { A, R, CPlus, CMinus, FoldBoundary, TwoFold };

const char* to_string(Region r) noexcept;

// Classifies the surface point (0, y, z).  With tol = 0 the inequalities are
// strict and FoldBoundary/TwoFold occur only on exact zeros.
Region classify_region(double y, double z, double tol = 0.0);

// Dense polynomial terms in (x, y, z) up to total degree 4, one table per
// component per side.
struct PolynomialTerms {
  static constexpr int kMaxDegree = 4;
  static constexpr std::size_t kMonomials = 35;
  using Table = std::array<double, kMonomials>;

  // [side][component] with side 0 = Left, 1 = Right.
  std::array<std::array<Table, 3>, 2> coeffs{};

  static std::size_t monomial_index(int i, int j, int k);
  double& at(Side side, int component, int i, int j, int k);
  double at(Side side, int component, int i, int j, int k) const;
  Vec3 eval(Side side, const Vec3& X) const;
};

enum class PerturbationKind { None, LinearDamping, Cubic, Polynomial };

const char* to_string(PerturbationKind k) noexcept;

struct NormalFormField {
  TwoFoldParams params;
  PerturbationKind perturbation = PerturbationKind::None;
  PolynomialTerms terms{};  // used only for PerturbationKind::Polynomial
};

// Gains and switching window of the time-windowed discontinuous control applied
// to the planar Hopf oscillator.
struct ControlParams {
  double a1 = -0.2;
  double a2 = -1.0;
  double a3 = 0.2;
  double a4 = 1.0;
  double t1 = -5.0;
  double t2 = 2.5;
};

struct ControlledHopfField {
  ControlParams control;
};

// A piecewise vector field on either side of {x = 0}, built through the
// validating named constructors.
class FieldSpec {
 public:
  using Kind = std::variant<NormalFormField, ControlledHopfField>;

  static FieldSpec normal_form(const TwoFoldParams& params,
                               PerturbationKind kind = PerturbationKind::None);
  // Throws InvalidParams unless the table satisfies the order conditions at
  // the origin: no constant term in any component and no linear y/z term in
  // the first component.
  static FieldSpec polynomial(const TwoFoldParams& params, const PolynomialTerms& terms);
  // Throws InvalidParams unless t1 <= t2.  The gain ordering is checked
  // separately by verify_twofold_conditions.
  static FieldSpec controlled_hopf(const ControlParams& control);

  const Kind& kind() const noexcept { return kind_; }
  bool is_normal_form() const noexcept { return std::holds_alternative<NormalFormField>(kind_); }
  // Both accessors throw Error(InvalidArgument) on the wrong kind.
  const NormalFormField& normal_form_field() const;
  const ControlledHopfField& hopf_field() const;
  const TwoFoldParams& params() const { return normal_form_field().params; }

 private:
  explicit FieldSpec(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

// For normal-form kinds returns F_side(X) + G_side(X).  For the controlled
// Hopf field the planar state is (X.x, X.y) and the result is the time-
// augmented vector (xdot, ydot, 1); `side` selects the control branch.
Vec3 eval_field(const FieldSpec& spec, Side side, const State3& X, double t);

// x <= 0 is Left.
Side side_of(const State3& X) noexcept;

struct SlidingField {
  double ydot = 0.0;
  double zdot = 0.0;
  double q = 0.0;  // weight of the right field in the convex combination
};

// Filippov convex combination on x = 0 whose normal component vanishes.
// Throws DegenerateSliding when both normal components vanish together and
// NotSlidingRegion when they have the same sign (q outside the open unit
// interval, including the fold lines where one of them is zero).
SlidingField filippov_sliding_field(const FieldSpec& spec, const State3& X, double t);

struct SlidingState {
  double q = 0.0;
  bool on_surface = false;
};

// |x| < 1e-12 (1 + |X|).
bool on_surface(const State3& X) noexcept;

// q of the Filippov combination at X when X is on the surface inside a
// sliding region; on_surface = false (q = 0) otherwise.
SlidingState sliding_state(const FieldSpec& spec, const State3& X, double t);

}  // namespace twofold
