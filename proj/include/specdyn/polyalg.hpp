#pragma once

#include <specdyn/fock.hpp>
#include <specdyn/rational.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace specdyn::polyalg {

using fock::Cplx;
using fock::Mat;
using fock::Vec;

/// Invariant quantum numbers (n, kappa, s) of one joint invariant subspace
/// of the two-mode harmonics model: kappa unpaired scattered bosons,
/// s pump photons in the lowest vector.  The derived eigenvalues of the
/// invariant operators R0, R1 are exact rationals.
struct SectorLabel {
  int n;
  int kappa;
  int s;

  SectorLabel(int n_, int kappa_, int s_) : n(n_), kappa(kappa_), s(s_) {
    if (n < 2) throw std::invalid_argument("SectorLabel: n must be >= 2");
    if (kappa < 0 || kappa >= n) throw std::invalid_argument("SectorLabel: kappa must be in [0, n)");
    if (s < 0) throw std::invalid_argument("SectorLabel: s must be >= 0");
  }

  Rational l0() const { return Rational(kappa - s, 1 + n); }
  Rational l1() const { return Rational(kappa + static_cast<std::int64_t>(n) * s, 1 + n); }
  double j() const { return 0.5 * s; }
  int dim() const { return s + 1; }

  friend bool operator==(const SectorLabel& a, const SectorLabel& b) {
    return a.n == b.n && a.kappa == b.kappa && a.s == b.s;
  }
};

/// Structure polynomial Psi(y; r1) = (r1 - y + 1) (n y + r1)^(n), exact.
inline Rational psi_eval(int n, const Rational& y, const Rational& r1) {
  if (n < 2) throw std::invalid_argument("psi_eval: n must be >= 2");
  return (r1 - y + Rational(1)) * falling_factorial(Rational(n) * y + r1, n);
}

/// Phi(y; r1) = Psi(y+1; r1) - Psi(y; r1): closes [Y-, Y+] = Phi(Y0; R1).
inline Rational phi_eval(int n, const Rational& y, const Rational& r1) {
  return psi_eval(n, y + Rational(1), r1) - psi_eval(n, y, r1);
}

/// Double-precision Psi for mean-field quantities (classical Ybar arguments).
inline double psi_eval_real(int n, double y, double r1) {
  if (n < 2) throw std::invalid_argument("psi_eval_real: n must be >= 2");
  double prod = r1 - y + 1.0;
  for (int k = 0; k < n; ++k) prod *= n * y + r1 - k;
  return prod;
}

/// One-mode structure polynomial Psi(Y0) = (E11)^(n) as a function of the
/// occupation N = n*Y0; r1-independent.
inline Rational psi_one_mode(int n, const Rational& occupation) {
  if (n < 2) throw std::invalid_argument("psi_one_mode: n must be >= 2");
  return falling_factorial(occupation, n);
}

enum class AlgebraKind {
  TwoModeSU2,   // su_pd(2) on a finite (s+1)-dimensional sector
  OneModeSU11,  // su_pd(1,1) on a truncated residue-class Fock chain
};

/// Matrix realization of (Y0, Y+, Y-) on one sector basis {e_0, ..., e_s}.
///
/// The basis is the normalized ladder (Y+)^eta applied to the sector lowest
/// vector, phases fixed by <eta+1|Y+|eta> > 0.  For the one-mode kind the
/// sector is a truncation of an infinite-dimensional space; residual checks
/// must then mask the top `mask_margin` basis rows.
struct AlgebraRep {
  AlgebraKind kind;
  int n;
  int kappa;
  int s;  // top excitation index; dimension = s + 1
  Rational l0;
  Rational r1;  // l1 of the sector; unused (0) for the one-mode kind
  Mat Y0;
  Mat Yp;
  Mat Ym;
  int mask_margin = 0;
  double fock_agreement = 0.0;  // max entry difference vs the Fock-space build
  int fock_n_max = 0;           // truncation used for the Fock-space build

  int dim() const { return s + 1; }

  /// Exact Psi at basis level eta (the squared Y+ norm into level eta).
  Rational psi_at_level(int eta) const {
    if (kind == AlgebraKind::TwoModeSU2) return psi_eval(n, l0 + Rational(eta), r1);
    return psi_one_mode(n, Rational(kappa + static_cast<std::int64_t>(n) * eta));
  }

  /// Exact Phi at basis level eta: Psi(level eta+1) - Psi(level eta).
  Rational phi_at_level(int eta) const { return psi_at_level(eta + 1) - psi_at_level(eta); }

  Rational y0_at_level(int eta) const { return l0 + Rational(eta); }
};

/// Two-mode sector basis state eta: |n1 = kappa + n*eta, n0 = s - eta> with
/// mode 0 the scattered mode a_1 and mode 1 the pump a_0.
inline fock::Occupation sector_occupation(const SectorLabel& sec, int eta) {
  return {sec.kappa + sec.n * eta, sec.s - eta};
}

/// Fock-space realization of Y+ = (a+_1)^n a_0 restricted to the sector,
/// computed by chaining single-ladder actions through the fock module.  This
/// is the independent counterpart of the bidiagonal-from-Psi construction.
inline Mat supd2_fock_restriction(const SectorLabel& sec,
                                  std::size_t dim_cap = fock::kDefaultDimCap) {
  const int embed_n_max = sec.kappa + sec.n * sec.s;
  const auto basis = fock::build_basis(2, embed_n_max, dim_cap);
  Mat m = Mat::Zero(sec.dim(), sec.dim());
  for (int eta = 0; eta < sec.s; ++eta) {
    const auto src = basis->index_of(sector_occupation(sec, eta));
    if (!src) throw std::logic_error("supd2_fock_restriction: sector state missing");
    auto hit = fock::annihilation_action(*basis, *src, 1);
    if (!hit) throw std::logic_error("supd2_fock_restriction: pump annihilation vanished");
    double amp = hit->amp;
    std::size_t idx = hit->index;
    for (int k = 0; k < sec.n; ++k) {
      hit = fock::creation_action(*basis, idx, 0);
      if (!hit) throw std::logic_error("supd2_fock_restriction: creation left the basis");
      amp *= hit->amp;
      idx = hit->index;
    }
    const auto dst = basis->index_of(sector_occupation(sec, eta + 1));
    if (!dst || *dst != idx) throw std::logic_error("supd2_fock_restriction: wrong image state");
    m(eta + 1, eta) = amp;
  }
  return m;
}

inline constexpr double kDualBuildTol = 1e-12;

/// su_pd(2) realization on one sector: Y0 = diag(l0 + eta), Y+ strictly lower
/// bidiagonal with <eta+1|Y+|eta> = sqrt(Psi(l0+eta+1; l1)).  Cross-checked
/// entrywise against the Fock-space restriction; both builds must agree to
/// kDualBuildTol.
inline AlgebraRep build_supd2_rep(const SectorLabel& sec) {
  const Rational l0 = sec.l0();
  const Rational l1 = sec.l1();
  const int d = sec.dim();

  Mat y0 = Mat::Zero(d, d);
  for (int eta = 0; eta < d; ++eta) y0(eta, eta) = (l0 + Rational(eta)).to_double();

  Mat yp = Mat::Zero(d, d);
  for (int eta = 0; eta + 1 < d; ++eta) {
    const Rational psi = psi_eval(sec.n, l0 + Rational(eta + 1), l1);
    if (psi < Rational(0)) throw std::logic_error("build_supd2_rep: negative structure value");
    yp(eta + 1, eta) = std::sqrt(psi.to_double());
  }

  const Mat cross = supd2_fock_restriction(sec);
  const double agreement = d > 0 ? fock::max_abs(yp - cross) : 0.0;
  if (agreement > kDualBuildTol) {
    throw std::logic_error("build_supd2_rep: bidiagonal and Fock builds disagree by " +
                           std::to_string(agreement));
  }

  AlgebraRep rep;
  rep.kind = AlgebraKind::TwoModeSU2;
  rep.n = sec.n;
  rep.kappa = sec.kappa;
  rep.s = sec.s;
  rep.l0 = l0;
  rep.r1 = l1;
  rep.Y0 = std::move(y0);
  rep.Ym = yp.adjoint();
  rep.Yp = std::move(yp);
  rep.mask_margin = 0;
  rep.fock_agreement = agreement;
  rep.fock_n_max = sec.kappa + sec.n * sec.s;
  return rep;
}

/// su_pd(1,1) realization on the one-mode residue class N = kappa (mod n),
/// truncated at N <= n_max.  Level nu holds |kappa + n*nu>; the rep is a
/// truncation of an infinite-dimensional module, so the top n(n+1) rows are
/// flagged unreliable via mask_margin.
inline AlgebraRep build_supd11_rep(int n, int kappa, int n_max,
                                   std::size_t dim_cap = fock::kDefaultDimCap) {
  if (n < 2) throw std::invalid_argument("build_supd11_rep: n must be >= 2");
  if (kappa < 0 || kappa >= n) throw std::invalid_argument("build_supd11_rep: invalid kappa");
  if (n_max < kappa) throw std::invalid_argument("build_supd11_rep: n_max below kappa");

  const auto basis = fock::build_basis(1, n_max, dim_cap);
  const int levels = (n_max - kappa) / n + 1;
  const int d = levels;

  Mat y0 = Mat::Zero(d, d);
  Mat yp = Mat::Zero(d, d);
  double agreement = 0.0;
  for (int nu = 0; nu < d; ++nu) {
    const int occ = kappa + n * nu;
    y0(nu, nu) = Rational(occ, n).to_double();
    if (nu + 1 < d) {
      const Rational psi = psi_one_mode(n, Rational(occ + n));
      yp(nu + 1, nu) = std::sqrt(psi.to_double());
      // chained ladder cross-check: (a+)^n on |occ>
      auto idx = basis->index_of({occ});
      double amp = 1.0;
      for (int k = 0; k < n; ++k) {
        const auto hit = fock::creation_action(*basis, *idx, 0);
        if (!hit) throw std::logic_error("build_supd11_rep: creation left the basis");
        amp *= hit->amp;
        idx = hit->index;
      }
      agreement = std::max(agreement, std::abs(yp(nu + 1, nu).real() - amp));
    }
  }
  if (agreement > kDualBuildTol) {
    throw std::logic_error("build_supd11_rep: bidiagonal and Fock builds disagree by " +
                           std::to_string(agreement));
  }

  AlgebraRep rep;
  rep.kind = AlgebraKind::OneModeSU11;
  rep.n = n;
  rep.kappa = kappa;
  rep.s = levels - 1;
  rep.l0 = Rational(kappa, n);
  rep.r1 = Rational(0);
  rep.Y0 = std::move(y0);
  rep.Ym = yp.adjoint();
  rep.Yp = std::move(yp);
  rep.mask_margin = std::min(n * (n + 1), levels - 1);
  rep.fock_agreement = agreement;
  rep.fock_n_max = n_max;
  return rep;
}

/// Residual normalization used throughout: raw max-abs entry divided by
/// (1 + scale of the operands entering the identity).  At desk-scale sectors
/// the scale is O(1) and the value coincides with the absolute residual; at
/// large structure values it measures the identity relative to the rounding
/// floor of the matrices themselves.
inline double normalized_residual(double raw, double operand_scale) {
  return raw / (1.0 + operand_scale);
}

struct CommutationReport {
  double res_raise;  // [Y0, Y+] - Y+
  double res_lower;  // [Y0, Y-] + Y-
  double res_phi;    // [Y-, Y+] - Phi(Y0; R1)
  int margin;
  double tol;
  bool pass;

  double max_residual() const { return std::max({res_raise, res_lower, res_phi}); }
};

/// Checks the defining commutation relations on the interior of the rep.
inline CommutationReport verify_commutation(const AlgebraRep& rep, double tol) {
  const int margin = rep.mask_margin;
  const auto masked = [margin](const Mat& m) { return fock::masked_max_abs(m, margin); };

  const double ny0 = fock::max_abs(rep.Y0);
  const double nyp = fock::max_abs(rep.Yp);

  Mat phi = Mat::Zero(rep.dim(), rep.dim());
  for (int eta = 0; eta < rep.dim(); ++eta) phi(eta, eta) = rep.phi_at_level(eta).to_double();

  const double raw_raise = masked(rep.Y0 * rep.Yp - rep.Yp * rep.Y0 - rep.Yp);
  const double raw_lower = masked(rep.Y0 * rep.Ym - rep.Ym * rep.Y0 + rep.Ym);
  const double raw_phi = masked(rep.Ym * rep.Yp - rep.Yp * rep.Ym - phi);

  CommutationReport report;
  report.res_raise = normalized_residual(raw_raise, ny0 * nyp + nyp);
  report.res_lower = normalized_residual(raw_lower, ny0 * nyp + nyp);
  report.res_phi = normalized_residual(raw_phi, 2.0 * nyp * nyp + fock::max_abs(phi));
  report.margin = margin;
  report.tol = tol;
  report.pass = report.max_residual() <= tol;
  return report;
}

struct CasimirReport {
  double scalar;         // exact predicted constant (s+1) kappa^(n)
  double max_deviation;  // normalized deviation of Psi(Y0;R1) - Y+Y- from scalar*I
};

/// Psi(Y0; R1) - Y+ Y- defines the Casimir; on a sector it is the constant
/// (s+1) kappa^(n), hence zero whenever kappa < n.
inline CasimirReport casimir_check(const AlgebraRep& rep) {
  Mat psi = Mat::Zero(rep.dim(), rep.dim());
  for (int eta = 0; eta < rep.dim(); ++eta) psi(eta, eta) = rep.psi_at_level(eta).to_double();

  // Y+Y- annihilates the lowest vector, so the constant is Psi at level 0,
  // which equals (s+1) kappa^(n) for the two-mode kind.
  const Rational scalar = rep.psi_at_level(0);
  const Mat casimir = psi - rep.Yp * rep.Ym;
  const double scale = fock::max_abs(psi) + fock::max_abs(rep.Yp) * fock::max_abs(rep.Ym);
  const Mat dev = casimir - scalar.to_double() * Mat::Identity(rep.dim(), rep.dim());
  return {scalar.to_double(), normalized_residual(fock::masked_max_abs(dev, rep.mask_margin), scale)};
}

/// Exact su(2) generators obtained from the su_pd(2) rep by the square-root
/// dressing V+ = Y+ [phi(V0)]^(1/2), phi(V0) = (J+V0+1)(J-V0)/Psi(Y0+1; R1),
/// with V0 = Y0 - R0 - J.  Highest weight j = s/2.
struct HPRep {
  SectorLabel sector;
  double j;
  Mat V0;
  Mat Vp;
  Mat Vm;
  std::vector<double> phi_vals;  // phi at each level; 1.0 sentinel at the top
};

inline HPRep hp_map(const AlgebraRep& rep) {
  if (rep.kind != AlgebraKind::TwoModeSU2) {
    throw std::invalid_argument("hp_map: requires a finite su_pd(2) sector rep");
  }
  const SectorLabel sec(rep.n, rep.kappa, rep.s);
  const int d = sec.dim();
  const Rational j2(sec.s, 2);

  Mat v0 = Mat::Zero(d, d);
  for (int eta = 0; eta < d; ++eta) {
    v0(eta, eta) = (Rational(eta) - j2).to_double();  // eta - j, exact half-integers
  }

  std::vector<double> phi_vals(static_cast<std::size_t>(d), 1.0);
  Mat vp = Mat::Zero(d, d);
  for (int eta = 0; eta + 1 < d; ++eta) {
    const Rational numer = Rational(eta + 1) * Rational(sec.s - eta);  // (J+V0+1)(J-V0)
    const Rational denom = psi_eval(sec.n, rep.l0 + Rational(eta + 1), rep.r1);
    if (!(denom > Rational(0))) {
      throw std::runtime_error(
          "hp_map: structure value vanished inside the sector (internal inconsistency)");
    }
    const Rational phi = numer / denom;
    phi_vals[static_cast<std::size_t>(eta)] = phi.to_double();
    vp(eta + 1, eta) = rep.Yp(eta + 1, eta).real() * std::sqrt(phi.to_double());
  }

  HPRep hp{sec, j2.to_double(), std::move(v0), Mat(), Mat(), std::move(phi_vals)};
  hp.Vm = vp.adjoint();
  hp.Vp = std::move(vp);
  return hp;
}

/// Canonical n-boson cluster operators on the residue class N = kappa (mod n):
/// W+ = Y+ [(Y0 - R0 + 1)/(E11 + n)^(n)]^(1/2), acting as sqrt(nu+1) steps of
/// the cluster number nu = (N - kappa)/n.  NW is exactly diag(floor(N/n)).
struct WOps {
  int n;
  int kappa;
  int n_max;
  Mat Wp;
  Mat Wm;
  Mat NW;
  Mat E11;
  int mask_margin;  // levels at the top where the canonical relation is truncated
};

inline WOps w_operators(int n, int kappa, int n_max,
                        std::size_t dim_cap = fock::kDefaultDimCap) {
  const AlgebraRep rep = build_supd11_rep(n, kappa, n_max, dim_cap);
  const int d = rep.dim();

  Mat wp = Mat::Zero(d, d);
  Mat nw = Mat::Zero(d, d);
  Mat e11 = Mat::Zero(d, d);
  for (int nu = 0; nu < d; ++nu) {
    const int occ = kappa + n * nu;
    nw(nu, nu) = static_cast<double>(occ / n);  // floor(N/n) = nu, exact
    e11(nu, nu) = static_cast<double>(occ);
    if (nu + 1 < d) {
      // dressing factor (Y0 - R0 + 1)/(E11 + n)^(n) evaluated at level nu
      const Rational numer(nu + 1);
      const Rational denom = falling_factorial(Rational(occ + n), n);
      wp(nu + 1, nu) = rep.Yp(nu + 1, nu).real() * std::sqrt((numer / denom).to_double());
    }
  }

  WOps ops;
  ops.n = n;
  ops.kappa = kappa;
  ops.n_max = n_max;
  ops.Wm = wp.adjoint();
  ops.Wp = std::move(wp);
  ops.NW = std::move(nw);
  ops.E11 = std::move(e11);
  ops.mask_margin = std::min(2, d - 1);
  return ops;
}

struct NilpotencyReport {
  int n;
  int margin;
  double residual_np1;  // normalized interior residual of ad^(n+1)_Y Y+
  double norm_n;        // normalized interior magnitude of ad^n_Y Y+
  double norm_1;        // normalized magnitude of ad_Y Y+ (sanity: nonzero)
};

/// Nested commutators ad^k_Y Y+ with Y = Y-.  For the one-mode algebra the
/// chain terminates: ad^(n+1) = 0 (Green-type relations), while ad^n stays
/// finite.  Each level k is reported relative to the operand scale
/// 2 |Y-| |ad^(k-1)| of the commutator that produced it, so the residual is
/// meaningful at any structure-value magnitude.
inline NilpotencyReport green_nilpotency_check(const AlgebraRep& rep) {
  const int margin = rep.mask_margin;
  const double nym = fock::max_abs(rep.Ym);

  std::vector<double> level_norm;
  level_norm.push_back(fock::masked_max_abs(rep.Yp, margin));
  Mat c = rep.Yp;
  for (int k = 1; k <= rep.n + 1; ++k) {
    c = rep.Ym * c - c * rep.Ym;
    level_norm.push_back(fock::masked_max_abs(c, margin));
  }

  const auto normalized_level = [&](int k) {
    return normalized_residual(level_norm[static_cast<std::size_t>(k)],
                               2.0 * nym * level_norm[static_cast<std::size_t>(k - 1)]);
  };

  NilpotencyReport report;
  report.n = rep.n;
  report.margin = margin;
  report.residual_np1 = normalized_level(rep.n + 1);
  report.norm_n = normalized_level(rep.n);
  report.norm_1 = normalized_level(1);
  return report;
}

}  // namespace specdyn::polyalg
