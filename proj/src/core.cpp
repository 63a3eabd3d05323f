#include "twofold/core.hpp"

#include <numbers>
#include <sstream>

#include "twofold/error.hpp"

namespace twofold {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::DegenerateSliding: return "DegenerateSliding";
    case ErrorCode::NotSlidingRegion: return "NotSlidingRegion";
    case ErrorCode::LeavesCrossingRegime: return "LeavesCrossingRegime";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::MaxStepsExceeded: return "MaxStepsExceeded";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NoCrossingBefore: return "NoCrossingBefore";
    case ErrorCode::SeedEscaped: return "SeedEscaped";
    case ErrorCode::DepthTooLarge: return "DepthTooLarge";
  }
  return "Unknown";
}

TwoFoldParams::TwoFoldParams(double v_minus, double v_plus) : v_minus_(v_minus), v_plus_(v_plus) {
  if (!std::isfinite(v_minus) || !std::isfinite(v_plus) || !(v_minus < 0.0) || !(v_plus < 0.0) ||
      !(v_minus * v_plus > 1.0 + 1e-12)) {
    std::ostringstream os;
    os << "normal-form parameters require V- < 0, V+ < 0, V-V+ > 1; got V- = " << v_minus
       << ", V+ = " << v_plus;
    fail(ErrorCode::InvalidParams, os.str());
  }
  const double vv = v_minus * v_plus;
  const double root = std::sqrt(1.0 - 1.0 / vv);
  const double diff = v_plus - v_minus;
  lambda_ = 0.5 * (v_plus + v_minus + std::sqrt(diff * diff + 4.0));
  mu_ = 2.0 * vv * (1.0 + root) - 1.0;
  gamma_ = v_plus * (1.0 + root);
  alpha_ = 1.0 / (1.0 + (1.0 - 1.0 / v_minus) / root);
  beta_ = 2.0 * std::numbers::pi * alpha_ / std::log(mu_);

  if (!(mu_ > 1.0) || !(gamma_ < 0.0) || !(alpha_ > 0.0 && alpha_ < 0.5) ||
      !(beta_ > 0.0 && beta_ < std::numbers::pi)) {
    std::ostringstream os;
    os << "derived constants out of range for V- = " << v_minus << ", V+ = " << v_plus
       << " (mu = " << mu_ << ", gamma = " << gamma_ << ", alpha = " << alpha_
       << ", beta = " << beta_ << ")";
    fail(ErrorCode::InvalidParams, os.str());
  }
}

const char* to_string(Region r) noexcept {
  switch (r) {
    case Region::A: return "A";
    case Region::R: return "R";
    case Region::CPlus: return "C+";
    case Region::CMinus: return "C-";
    case Region::FoldBoundary: return "FoldBoundary";
    case Region::TwoFold: return "TwoFold";
  }
  return "?";
}

Region classify_region(double y, double z, double tol) {
  if (!(tol >= 0.0)) fail(ErrorCode::InvalidArgument, "classify_region: tol must be >= 0");
  const bool y_zero = std::abs(y) <= tol;
  const bool z_zero = std::abs(z) <= tol;
  if (y_zero && z_zero) return Region::TwoFold;
  if (y_zero || z_zero) return Region::FoldBoundary;
  if (y > 0.0) return z > 0.0 ? Region::A : Region::CMinus;
  return z > 0.0 ? Region::CPlus : Region::R;
}

namespace {

struct MonomialTable {
  std::array<std::array<std::array<int, 5>, 5>, 5> index{};
  std::array<std::array<int, 3>, PolynomialTerms::kMonomials> exponents{};

  constexpr MonomialTable() {
    int n = 0;
    for (int d = 0; d <= PolynomialTerms::kMaxDegree; ++d)
      for (int i = d; i >= 0; --i)
        for (int j = d - i; j >= 0; --j) {
          const int k = d - i - j;
          index[i][j][k] = n;
          exponents[n] = {i, j, k};
          ++n;
        }
  }
};

constexpr MonomialTable kMonomialTable{};

std::size_t side_index(Side s) { return s == Side::Left ? 0 : 1; }

}  // namespace

std::size_t PolynomialTerms::monomial_index(int i, int j, int k) {
  if (i < 0 || j < 0 || k < 0 || i + j + k > kMaxDegree)
    fail(ErrorCode::InvalidArgument, "monomial exponent out of range (total degree <= 4)");
  return static_cast<std::size_t>(kMonomialTable.index[i][j][k]);
}

double& PolynomialTerms::at(Side side, int component, int i, int j, int k) {
  if (component < 0 || component > 2) fail(ErrorCode::InvalidArgument, "component must be 0, 1 or 2");
  return coeffs[side_index(side)][component][monomial_index(i, j, k)];
}

double PolynomialTerms::at(Side side, int component, int i, int j, int k) const {
  if (component < 0 || component > 2) fail(ErrorCode::InvalidArgument, "component must be 0, 1 or 2");
  return coeffs[side_index(side)][component][monomial_index(i, j, k)];
}

Vec3 PolynomialTerms::eval(Side side, const Vec3& X) const {
  std::array<double, 5> px{1.0}, py{1.0}, pz{1.0};
  for (int p = 1; p <= kMaxDegree; ++p) {
    px[p] = px[p - 1] * X.x;
    py[p] = py[p - 1] * X.y;
    pz[p] = pz[p - 1] * X.z;
  }
  const auto& tables = coeffs[side_index(side)];
  std::array<double, 3> out{};
  for (std::size_t n = 0; n < kMonomials; ++n) {
    const auto& e = kMonomialTable.exponents[n];
    const double m = px[e[0]] * py[e[1]] * pz[e[2]];
    for (int c = 0; c < 3; ++c) out[c] += tables[c][n] * m;
  }
  return {out[0], out[1], out[2]};
}

const char* to_string(PerturbationKind k) noexcept {
  switch (k) {
    case PerturbationKind::None: return "none";
    case PerturbationKind::LinearDamping: return "linear";
    case PerturbationKind::Cubic: return "cubic";
    case PerturbationKind::Polynomial: return "polynomial";
  }
  return "?";
}

FieldSpec FieldSpec::normal_form(const TwoFoldParams& params, PerturbationKind kind) {
  if (kind == PerturbationKind::Polynomial)
    fail(ErrorCode::InvalidArgument, "use FieldSpec::polynomial for tabulated perturbations");
  return FieldSpec(NormalFormField{params, kind, {}});
}

FieldSpec FieldSpec::polynomial(const TwoFoldParams& params, const PolynomialTerms& terms) {
  for (Side side : {Side::Left, Side::Right}) {
    for (int c = 0; c < 3; ++c) {
      for (const auto& v : terms.coeffs[side_index(side)][c])
        if (!std::isfinite(v)) fail(ErrorCode::InvalidParams, "polynomial coefficient is not finite");
      if (terms.at(side, c, 0, 0, 0) != 0.0)
        fail(ErrorCode::InvalidParams, "polynomial perturbation must vanish at the origin");
    }
    if (terms.at(side, 0, 0, 1, 0) != 0.0 || terms.at(side, 0, 0, 0, 1) != 0.0)
      fail(ErrorCode::InvalidParams,
           "first component of the perturbation may not have linear y or z terms");
  }
  return FieldSpec(NormalFormField{params, PerturbationKind::Polynomial, terms});
}

FieldSpec FieldSpec::controlled_hopf(const ControlParams& control) {
  const double vals[] = {control.a1, control.a2, control.a3, control.a4, control.t1, control.t2};
  for (double v : vals)
    if (!std::isfinite(v)) fail(ErrorCode::InvalidParams, "control parameters must be finite");
  if (!(control.t1 <= control.t2))
    fail(ErrorCode::InvalidParams, "control window requires t1 <= t2");
  return FieldSpec(ControlledHopfField{control});
}

const NormalFormField& FieldSpec::normal_form_field() const {
  if (const auto* nf = std::get_if<NormalFormField>(&kind_)) return *nf;
  fail(ErrorCode::InvalidArgument, "field is not a normal-form field");
}

const ControlledHopfField& FieldSpec::hopf_field() const {
  if (const auto* h = std::get_if<ControlledHopfField>(&kind_)) return *h;
  fail(ErrorCode::InvalidArgument, "field is not a controlled Hopf field");
}

namespace {

Vec3 eval_normal_form(const NormalFormField& nf, Side side, const State3& X) {
  Vec3 f = side == Side::Left ? Vec3{X.z, nf.params.v_minus(), 1.0}
                              : Vec3{-X.y, 1.0, nf.params.v_plus()};
  switch (nf.perturbation) {
    case PerturbationKind::None: break;
    case PerturbationKind::LinearDamping: f -= X; break;
    case PerturbationKind::Cubic:
      f.x -= X.x * X.x * X.x;
      f.y -= X.y * X.y * X.y;
      break;
    case PerturbationKind::Polynomial: f += nf.terms.eval(side, X); break;
  }
  return f;
}

Vec3 eval_controlled_hopf(const ControlledHopfField& h, Side side, const State3& X, double t) {
  const double r2 = X.x * X.x + X.y * X.y;
  Vec3 f{X.x - X.y - X.x * r2, X.x + X.y - X.y * r2, 1.0};
  const auto& c = h.control;
  if (c.t1 < t && t < c.t2) {
    if (side == Side::Left) {
      f.x += c.a1 * t;
      f.y += c.a2;
    } else {
      f.x += c.a3 * t;
      f.y += c.a4;
    }
  }
  return f;
}

}  // namespace

Vec3 eval_field(const FieldSpec& spec, Side side, const State3& X, double t) {
  if (const auto* nf = std::get_if<NormalFormField>(&spec.kind())) return eval_normal_form(*nf, side, X);
  return eval_controlled_hopf(std::get<ControlledHopfField>(spec.kind()), side, X, t);
}

Side side_of(const State3& X) noexcept { return X.x <= 0.0 ? Side::Left : Side::Right; }

SlidingField filippov_sliding_field(const FieldSpec& spec, const State3& X, double t) {
  const Vec3 fl = eval_field(spec, Side::Left, X, t);
  const Vec3 fr = eval_field(spec, Side::Right, X, t);
  const double denom = fl.x - fr.x;
  if (denom == 0.0) {
    if (fl.x == 0.0) fail(ErrorCode::DegenerateSliding, "both normal components vanish");
    fail(ErrorCode::NotSlidingRegion, "normal components have the same sign");
  }
  const double q = fl.x / denom;
  if (!(q > 0.0 && q < 1.0)) fail(ErrorCode::NotSlidingRegion, "point is not in a sliding region");
  return {(1.0 - q) * fl.y + q * fr.y, (1.0 - q) * fl.z + q * fr.z, q};
}

bool on_surface(const State3& X) noexcept { return std::abs(X.x) < 1e-12 * (1.0 + norm(X)); }

SlidingState sliding_state(const FieldSpec& spec, const State3& X, double t) {
  if (!on_surface(X)) return {};
  try {
    return {filippov_sliding_field(spec, X, t).q, true};
  } catch (const Error&) {
    return {};
  }
}

}  // namespace twofold
