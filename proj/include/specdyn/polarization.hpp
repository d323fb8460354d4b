#pragma once

#include <specdyn/fock.hpp>

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace specdyn::polar {

using fock::Cplx;
using fock::Mat;
using fock::Vec;

/// Two-polarization multimode basis: m spatiotemporal modes, each carrying a
/// (+, -) polarization pair.  Underlying Fock modes are ordered
/// (+1, -1, +2, -2, ...); the pairing is part of the contract.
struct PolarizedBasis {
  int m;
  int n_max;
  fock::BasisPtr basis;

  int plus_mode(int i) const { return 2 * i; }
  int minus_mode(int i) const { return 2 * i + 1; }
  std::size_t dim() const { return basis->size(); }
};

inline PolarizedBasis build_polarized_basis(int m, int n_max,
                                            std::size_t dim_cap = fock::kDefaultDimCap) {
  if (m < 1) throw std::invalid_argument("build_polarized_basis: m must be >= 1");
  return {m, n_max, fock::build_basis(2 * m, n_max, dim_cap)};
}

inline int shell_of(const PolarizedBasis& pb, std::size_t index) {
  return pb.basis->total(index);
}

/// Total and per-mode polarization quasispin operators
/// P0(i) = (N_{+i} - N_{-i})/2, P+-(i) = a+_{+-i} a_{-+i}, and the derived
/// Cartesian components P1 = (P+ + P-)/2, P2 = (P+ - P-)/(2i) together with
/// the total quasispin square Psq and photon number N.  All of them conserve
/// the photon number, so their mutual relations carry no truncation error.
struct QuasispinOps {
  fock::OperatorMatrix P0, Pp, Pm, P1, P2, Psq, N;
  std::vector<fock::OperatorMatrix> P0_mode, Pp_mode, Pm_mode;

  const fock::OperatorMatrix& component(int alpha) const {
    switch (alpha) {
      case 0: return P0;
      case 1: return P1;
      case 2: return P2;
      default: throw std::invalid_argument("QuasispinOps: component index must be 0, 1 or 2");
    }
  }
};

inline QuasispinOps build_quasispin(const PolarizedBasis& pb) {
  QuasispinOps qs;
  auto p0 = fock::zero_op(pb.basis);
  auto pp = fock::zero_op(pb.basis);
  auto n = fock::zero_op(pb.basis);
  for (int i = 0; i < pb.m; ++i) {
    const auto np = fock::number_op(pb.basis, pb.plus_mode(i));
    const auto nm = fock::number_op(pb.basis, pb.minus_mode(i));
    const auto p0i = 0.5 * (np - nm);
    const auto ppi = fock::creation_op(pb.basis, pb.plus_mode(i)) *
                     fock::annihilation_op(pb.basis, pb.minus_mode(i));
    qs.P0_mode.push_back(p0i);
    qs.Pp_mode.push_back(ppi);
    qs.Pm_mode.push_back(fock::adjoint(ppi));
    p0 = p0 + p0i;
    pp = pp + ppi;
    n = n + np + nm;
  }
  qs.P0 = std::move(p0);
  qs.Pm = fock::adjoint(pp);
  qs.Pp = std::move(pp);
  qs.P1 = 0.5 * (qs.Pp + qs.Pm);
  qs.P2 = Cplx(0.0, -0.5) * (qs.Pp - qs.Pm);
  qs.Psq = qs.P0 * qs.P0 + 0.5 * (qs.Pp * qs.Pm + qs.Pm * qs.Pp);
  qs.N = std::move(n);
  return qs;
}

/// P-scalar and P0-scalar bi-photon cluster operators
/// X+_{ij} = a+_{+i} a+_{-j} - a+_{-i} a+_{+j}  (vanishes identically at i = j),
/// Y+_{ij} = (a+_{+i} a+_{-j} + a+_{-i} a+_{+j})/2,
/// plus the polarization-blind u(m) generators E_{ij} = sum_a a+_{ai} a_{aj}.
struct ClusterOps {
  int m;
  std::vector<fock::OperatorMatrix> Xp;  // index pair(i, j), i <= j
  std::vector<fock::OperatorMatrix> Yp;
  std::vector<fock::OperatorMatrix> E;   // index i * m + j, all pairs

  static std::size_t pair_index(int m, int i, int j) {
    // i <= j over the upper triangle
    if (i > j) std::swap(i, j);
    std::size_t idx = 0;
    for (int a = 0; a < i; ++a) idx += static_cast<std::size_t>(m - a);
    return idx + static_cast<std::size_t>(j - i);
  }

  const fock::OperatorMatrix& xplus(int i, int j) const { return Xp[pair_index(m, i, j)]; }
  const fock::OperatorMatrix& yplus(int i, int j) const { return Yp[pair_index(m, i, j)]; }
  const fock::OperatorMatrix& e(int i, int j) const {
    return E[static_cast<std::size_t>(i * m + j)];
  }
};

inline ClusterOps build_clusters(const PolarizedBasis& pb) {
  ClusterOps ops;
  ops.m = pb.m;
  const auto cr = [&](int mode) { return fock::creation_op(pb.basis, mode); };
  for (int i = 0; i < pb.m; ++i) {
    for (int j = i; j < pb.m; ++j) {
      const auto fwd = cr(pb.plus_mode(i)) * cr(pb.minus_mode(j));
      const auto rev = cr(pb.minus_mode(i)) * cr(pb.plus_mode(j));
      ops.Xp.push_back(fwd - rev);  // the literal formula; X+_{ii} comes out zero
      ops.Yp.push_back(0.5 * (fwd + rev));
    }
  }
  for (int i = 0; i < pb.m; ++i) {
    for (int j = 0; j < pb.m; ++j) {
      auto e = fock::zero_op(pb.basis);
      e = e + cr(pb.plus_mode(i)) * fock::annihilation_op(pb.basis, pb.plus_mode(j));
      e = e + cr(pb.minus_mode(i)) * fock::annihilation_op(pb.basis, pb.minus_mode(j));
      ops.E.push_back(std::move(e));
    }
  }
  return ops;
}

inline Cplx expect_state(const Mat& op, const Vec& psi) { return psi.dot(op * psi); }

inline Cplx expect_rho(const Mat& op, const Mat& rho) { return (rho * op).trace(); }

inline constexpr double kRhoTraceTol = 1e-8;

inline void require_density_matrix(const Mat& rho) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("density matrix not square");
  if (std::abs(rho.trace() - Cplx(1.0, 0.0)) > kRhoTraceTol) {
    throw std::invalid_argument("density matrix trace differs from 1");
  }
  if (fock::max_abs(rho - rho.adjoint()) > kRhoTraceTol) {
    throw std::invalid_argument("density matrix not Hermitian");
  }
}

/// Polarization degree P = |(<P0>, <P1>, <P2>)| / (<N>/2), defined as 0 for
/// the vacuum (<N> = 0).  The normalization by <N>/2 is a fixed convention
/// recorded in every report.
inline double polarization_degree(const Vec& psi, const QuasispinOps& qs) {
  const double p0 = expect_state(qs.P0.mat, psi).real();
  const double p1 = expect_state(qs.P1.mat, psi).real();
  const double p2 = expect_state(qs.P2.mat, psi).real();
  const double n = expect_state(qs.N.mat, psi).real();
  if (n <= 0.0) return 0.0;
  return std::sqrt(p0 * p0 + p1 * p1 + p2 * p2) / (0.5 * n);
}

inline double polarization_degree(const Mat& rho, const QuasispinOps& qs) {
  require_density_matrix(rho);
  const double p0 = expect_rho(qs.P0.mat, rho).real();
  const double p1 = expect_rho(qs.P1.mat, rho).real();
  const double p2 = expect_rho(qs.P2.mat, rho).real();
  const double n = expect_rho(qs.N.mat, rho).real();
  if (n <= 0.0) return 0.0;
  return std::sqrt(p0 * p0 + p1 * p1 + p2 * p2) / (0.5 * n);
}

/// Moments <P_alpha^s> for alpha in {0,1,2}, s = 1..order.  Hermitian powers
/// give real values; the largest imaginary residue is recorded.
struct MomentTable {
  int order = 0;
  std::array<std::vector<double>, 3> values;  // values[alpha][s-1]
  double max_imag = 0.0;

  double at(int alpha, int s) const {
    return values[static_cast<std::size_t>(alpha)][static_cast<std::size_t>(s - 1)];
  }
};

inline MomentTable moment_profile(const Vec& psi, const QuasispinOps& qs, int order) {
  if (order < 1) throw std::invalid_argument("moment_profile: order must be >= 1");
  MomentTable table;
  table.order = order;
  for (int alpha = 0; alpha < 3; ++alpha) {
    Vec power = psi;
    for (int s = 1; s <= order; ++s) {
      power = qs.component(alpha).mat * power;
      const Cplx val = psi.dot(power);
      table.values[static_cast<std::size_t>(alpha)].push_back(val.real());
      table.max_imag = std::max(table.max_imag, std::abs(val.imag()));
    }
  }
  return table;
}

inline MomentTable moment_profile(const Mat& rho, const QuasispinOps& qs, int order) {
  if (order < 1) throw std::invalid_argument("moment_profile: order must be >= 1");
  require_density_matrix(rho);
  MomentTable table;
  table.order = order;
  for (int alpha = 0; alpha < 3; ++alpha) {
    Mat power = Mat::Identity(rho.rows(), rho.cols());
    for (int s = 1; s <= order; ++s) {
      power = qs.component(alpha).mat * power;
      const Cplx val = (rho * power).trace();
      table.values[static_cast<std::size_t>(alpha)].push_back(val.real());
      table.max_imag = std::max(table.max_imag, std::abs(val.imag()));
    }
  }
  return table;
}

/// Deterministic uniform stream pinned to mt19937_64 output bits, so reports
/// are byte-identical across platforms for a given seed.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(gen_() >> 11) * 0x1p-53);
  }

 private:
  std::mt19937_64 gen_;
};

/// Applies SU(2)_p group elements in the Euler form
/// S = exp(i phi P0) exp(i Theta P2) exp(i psi P0) reusing one
/// eigendecomposition of P2; P0 is diagonal, so the outer factors are phase
/// masks.
class QuasispinRotation {
 public:
  explicit QuasispinRotation(const QuasispinOps& qs) {
    const Eigen::Index d = qs.P0.mat.rows();
    p0_diag_.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) p0_diag_(i) = qs.P0.mat(i, i).real();
    Eigen::SelfAdjointEigenSolver<Mat> solver(qs.P2.mat);
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("QuasispinRotation: eigensolver failed");
    }
    u_ = solver.eigenvectors();
    lam_ = solver.eigenvalues();
  }

  Vec apply(double phi, double theta, double psi, const Vec& v) const {
    Vec out = phase_p0(psi, v);
    out = u_.adjoint() * out;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      out(i) *= std::exp(Cplx(0.0, theta * lam_(i)));
    }
    out = u_ * out;
    return phase_p0(phi, out);
  }

  Mat conjugate(double phi, double theta, double psi, const Mat& rho) const {
    // S = diag(e^{i phi P0}) U diag(e^{i theta lam}) U^H diag(e^{i psi P0})
    Mat mid = Mat::Zero(lam_.size(), lam_.size());
    for (Eigen::Index i = 0; i < lam_.size(); ++i) mid(i, i) = std::exp(Cplx(0.0, theta * lam_(i)));
    Mat s = u_ * mid * u_.adjoint();
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
      for (Eigen::Index c = 0; c < s.cols(); ++c) {
        s(r, c) *= std::exp(Cplx(0.0, phi * p0_diag_(r) + psi * p0_diag_(c)));
      }
    }
    return s * rho * s.adjoint();
  }

 private:
  Vec phase_p0(double angle, const Vec& v) const {
    Vec out = v;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      out(i) *= std::exp(Cplx(0.0, angle * p0_diag_(i)));
    }
    return out;
  }

  Mat u_;
  Eigen::VectorXd lam_;
  Eigen::VectorXd p0_diag_;
};

/// Invariance residuals ||S rho S^+ - rho|| over sampled group elements:
/// seeded Haar samples of the full SU(2)_p for P-invariance, and the
/// exp(i b0 P0) grid plus exp(i pi P2) for P0-invariance.
struct InvarianceResiduals {
  int su2_samples = 0;
  double su2_max = 0.0;
  double p0_grid_max = 0.0;
  double p0_pi_rotation = 0.0;
};

namespace detail {

struct EulerAngles {
  double phi, theta, psi;
};

inline EulerAngles haar_sample(SeededRng& rng) {
  const double two_pi = 2.0 * std::acos(-1.0);
  return {rng.uniform(0.0, two_pi), std::acos(rng.uniform(-1.0, 1.0)),
          rng.uniform(0.0, two_pi)};
}

inline double pure_conjugation_residual(const QuasispinRotation& rot, const EulerAngles& a,
                                        const Vec& psi) {
  const Vec phi = rot.apply(a.phi, a.theta, a.psi, psi);
  // || phi phi^+ - psi psi^+ ||_max without forming S
  double out = 0.0;
  for (Eigen::Index r = 0; r < psi.size(); ++r) {
    for (Eigen::Index c = 0; c < psi.size(); ++c) {
      out = std::max(out, std::abs(phi(r) * std::conj(phi(c)) - psi(r) * std::conj(psi(c))));
    }
  }
  return out;
}

inline double rho_conjugation_residual(const QuasispinRotation& rot, const EulerAngles& a,
                                       const Mat& rho) {
  return fock::max_abs(rot.conjugate(a.phi, a.theta, a.psi, rho) - rho);
}

template <typename StateLike, typename ResidualFn>
InvarianceResiduals invariance_residuals(const QuasispinRotation& rot, const StateLike& state,
                                         ResidualFn&& residual, int sample_count,
                                         std::uint64_t seed) {
  InvarianceResiduals inv;
  inv.su2_samples = sample_count;
  SeededRng rng(seed);
  for (int k = 0; k < sample_count; ++k) {
    inv.su2_max = std::max(inv.su2_max, residual(rot, haar_sample(rng), state));
  }
  const double two_pi = 2.0 * std::acos(-1.0);
  for (int k = 1; k < sample_count; ++k) {
    const EulerAngles a{two_pi * k / sample_count, 0.0, 0.0};
    inv.p0_grid_max = std::max(inv.p0_grid_max, residual(rot, a, state));
  }
  inv.p0_pi_rotation = residual(rot, EulerAngles{0.0, std::acos(-1.0), 0.0}, state);
  return inv;
}

}  // namespace detail

/// Classification verdicts for unpolarized light, ordered from most to least
/// specific within the decision chain.
enum class ULVerdict { Polarized, PScalar, P0Scalar, StrongULInvariance, WeakUL };

inline std::string verdict_name(ULVerdict v) {
  switch (v) {
    case ULVerdict::Polarized: return "polarized";
    case ULVerdict::PScalar: return "P-scalar";
    case ULVerdict::P0Scalar: return "P0-scalar";
    case ULVerdict::StrongULInvariance: return "strong-UL-invariance";
    case ULVerdict::WeakUL: return "weak-UL";
  }
  return "unknown";
}

struct ULReport {
  ULVerdict verdict = ULVerdict::WeakUL;
  double polarization_degree = 0.0;
  double mean_photon_number = 0.0;
  MomentTable moments;
  double first_moment_norm = 0.0;
  double eq7a_residual = 0.0;  // max |<P_alpha^s>|, alpha in {0,1,2}, s = 2..order
  double eq7b_residual = 0.0;  // max |<P0^s>|, s = 2..order
  InvarianceResiduals invariance;
  double tol = 0.0;
  int order = 0;
  std::uint64_t seed = 0;
};

inline constexpr double kPureStateTol = 1e-8;
inline constexpr double kDensityTol = 1e-6;

namespace detail {

inline ULReport classify_from_parts(double degree, double mean_n, MomentTable&& table,
                                    const InvarianceResiduals& inv, double tol, int order,
                                    std::uint64_t seed, bool strict_invariance) {
  ULReport rep;
  rep.polarization_degree = degree;
  rep.mean_photon_number = mean_n;
  rep.moments = std::move(table);
  rep.invariance = inv;
  rep.tol = tol;
  rep.order = order;
  rep.seed = seed;

  double first = 0.0;
  double res7a = 0.0, res7b = 0.0;
  for (int alpha = 0; alpha < 3; ++alpha) {
    first += rep.moments.at(alpha, 1) * rep.moments.at(alpha, 1);
    for (int s = 2; s <= order; ++s) {
      const double v = std::abs(rep.moments.at(alpha, s));
      res7a = std::max(res7a, v);
      if (alpha == 0) res7b = std::max(res7b, v);
    }
  }
  // Eq. (7) demands vanishing from s = 2 up; the first moments enter through
  // the polarization degree and are tracked separately.
  rep.first_moment_norm = std::sqrt(first);
  rep.eq7a_residual = std::max(res7a, rep.first_moment_norm);
  rep.eq7b_residual = std::max(res7b, std::abs(rep.moments.at(0, 1)));

  if (degree > tol) {
    rep.verdict = ULVerdict::Polarized;
  } else if (rep.eq7a_residual <= tol) {
    rep.verdict = ULVerdict::PScalar;
  } else if (rep.eq7b_residual <= tol) {
    rep.verdict = ULVerdict::P0Scalar;
  } else if (strict_invariance && inv.su2_max <= tol) {
    rep.verdict = ULVerdict::StrongULInvariance;
  } else {
    rep.verdict = ULVerdict::WeakUL;
  }
  return rep;
}

}  // namespace detail

/// Unpolarized-light classification of a pure state.  Decision chain:
/// polarized (degree > tol), P-scalar (all Eq. 7a moments vanish), P0-scalar
/// (Eq. 7b moments vanish), then weak UL; with strict_invariance set, a state
/// that fails the moment criteria but is invariant under every sampled
/// SU(2)_p element is reported strong-UL-invariance instead of weak UL.
/// Invariance residuals are always attached.
inline ULReport classify_ul(const Vec& psi, const QuasispinOps& qs, int order = 6,
                            double tol = kPureStateTol, int sample_count = 32,
                            std::uint64_t seed = 0, bool strict_invariance = false) {
  if (std::abs(psi.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("classify_ul: state not normalized");
  }
  const QuasispinRotation rot(qs);
  const auto inv = detail::invariance_residuals(
      rot, psi,
      [](const QuasispinRotation& r, const detail::EulerAngles& a, const Vec& v) {
        return detail::pure_conjugation_residual(r, a, v);
      },
      sample_count, seed);
  return detail::classify_from_parts(polarization_degree(psi, qs),
                                     expect_state(qs.N.mat, psi).real(),
                                     moment_profile(psi, qs, order), inv, tol, order, seed,
                                     strict_invariance);
}

/// Density-matrix variant; same decision chain at the density tolerance.
inline ULReport classify_ul(const Mat& rho, const QuasispinOps& qs, int order = 6,
                            double tol = kDensityTol, int sample_count = 32,
                            std::uint64_t seed = 0, bool strict_invariance = false) {
  require_density_matrix(rho);
  const QuasispinRotation rot(qs);
  const auto inv = detail::invariance_residuals(
      rot, rho,
      [](const QuasispinRotation& r, const detail::EulerAngles& a, const Mat& m) {
        return detail::rho_conjugation_residual(r, a, m);
      },
      sample_count, seed);
  return detail::classify_from_parts(polarization_degree(rho, qs),
                                     expect_rho(qs.N.mat, rho).real(),
                                     moment_profile(rho, qs, order), inv, tol, order, seed,
                                     strict_invariance);
}

inline constexpr double kLeakageTol = 1e-10;

/// Two-mode squeezed vacuum exp(beta Y+_{11} - beta* Y_{11})|0>, truncated.
/// The generator preserves the |k,k> pair ladder of the first spatiotemporal
/// mode, so the exponential is evaluated exactly on that invariant chain; the
/// probability mass the truncation would cut off is measured on an extended
/// chain and must stay below leak_tol.
inline Vec tmsv_state(Cplx beta, const PolarizedBasis& pb, double leak_tol = kLeakageTol) {
  const int k_max = pb.n_max / 2;

  const auto chain_amplitudes = [&](int levels) {
    // tridiagonal restriction: <k+1,k+1| (beta Y+ - beta* Y) |k,k> = beta (k+1)
    Mat gen = Mat::Zero(levels, levels);
    for (int k = 0; k + 1 < levels; ++k) {
      gen(k + 1, k) = beta * static_cast<double>(k + 1);
      gen(k, k + 1) = -std::conj(beta) * static_cast<double>(k + 1);
    }
    Eigen::SelfAdjointEigenSolver<Mat> solver(Cplx(0.0, 1.0) * gen);
    if (solver.info() != Eigen::Success) throw std::runtime_error("tmsv_state: eigensolver failed");
    Vec e0 = Vec::Zero(levels);
    e0(0) = 1.0;
    Vec w = solver.eigenvectors().adjoint() * e0;
    for (int k = 0; k < levels; ++k) w(k) *= std::exp(Cplx(0.0, -solver.eigenvalues()(k)));
    return Vec(solver.eigenvectors() * w);
  };

  // leakage estimate on an extended chain
  const int extended = k_max + 1 + 8;
  const Vec probe = chain_amplitudes(extended);
  double leaked = 0.0;
  for (int k = k_max + 1; k < extended; ++k) leaked += std::norm(probe(k));
  if (leaked > leak_tol) {
    std::ostringstream msg;
    msg << "tmsv_state: truncation leakage " << std::scientific << leaked
        << " exceeds tolerance " << leak_tol << "; increase n_max for this |beta|";
    throw std::runtime_error(msg.str());
  }

  const Vec amps = chain_amplitudes(k_max + 1);
  Vec out = Vec::Zero(static_cast<Eigen::Index>(pb.dim()));
  for (int k = 0; k <= k_max; ++k) {
    fock::Occupation occ(static_cast<std::size_t>(2 * pb.m), 0);
    occ[static_cast<std::size_t>(pb.plus_mode(0))] = k;
    occ[static_cast<std::size_t>(pb.minus_mode(0))] = k;
    const auto idx = pb.basis->index_of(occ);
    if (!idx) throw std::logic_error("tmsv_state: pair state missing from basis");
    out(static_cast<Eigen::Index>(*idx)) = amps(k);
  }
  out /= out.norm();
  return out;
}

/// Per-shell SU(2)_p content: multiplicity of each total quasispin p.
struct ShellMultiplicities {
  int photon_number;
  std::vector<std::pair<double, int>> spectral;  // (p, multiplicity) from Psq eigenvalues
  std::vector<std::pair<double, int>> counting;  // same from weight counting
  bool match;
};

struct RankCheck {
  int photon_number;
  double p;
  int rank;
  int expected;
  bool pass;
};

struct DualityReport {
  double commutant_x_residual;  // max |[P_alpha, X+(i,j)]| on the interior
  double commutant_e_residual;  // max |[P_alpha, E(i,j)]|
  std::vector<ShellMultiplicities> shells;
  std::vector<RankCheck> rank_checks;  // m = 2 only
  bool multiplicities_match;
  bool pass(double commutant_tol) const {
    if (commutant_x_residual > commutant_tol || commutant_e_residual > commutant_tol) return false;
    if (!multiplicities_match) return false;
    for (const auto& rc : rank_checks)
      if (!rc.pass) return false;
    return true;
  }
};

namespace detail {

inline std::vector<Eigen::Index> shell_indices(const PolarizedBasis& pb, int photon_number) {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < pb.dim(); ++i) {
    if (pb.basis->total(i) == photon_number) out.push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

inline Mat restrict_to(const Mat& op, const std::vector<Eigen::Index>& idx) {
  Mat out(idx.size(), idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t c = 0; c < idx.size(); ++c) out(r, c) = op(idx[r], idx[c]);
  return out;
}

/// Weight counting: multiplicity of spin p in the shell equals
/// w(mu = p) - w(mu = p + 1), with w the dimension of the P0 weight space.
inline std::vector<std::pair<double, int>> counting_multiplicities(const PolarizedBasis& pb,
                                                                   int photon_number) {
  std::map<int, int> twice_mu_count;  // 2*mu -> dimension
  for (std::size_t i = 0; i < pb.dim(); ++i) {
    if (pb.basis->total(i) != photon_number) continue;
    const auto& occ = pb.basis->state(i);
    int twice_mu = 0;
    for (int md = 0; md < pb.m; ++md) {
      twice_mu += occ[static_cast<std::size_t>(pb.plus_mode(md))] -
                  occ[static_cast<std::size_t>(pb.minus_mode(md))];
    }
    twice_mu_count[twice_mu] += 1;
  }
  std::vector<std::pair<double, int>> out;
  for (int twice_p = photon_number; twice_p >= 0; twice_p -= 2) {
    const int w_p = twice_mu_count.count(twice_p) ? twice_mu_count.at(twice_p) : 0;
    const int w_p1 = twice_mu_count.count(twice_p + 2) ? twice_mu_count.at(twice_p + 2) : 0;
    const int mult = w_p - w_p1;
    if (mult > 0) out.emplace_back(0.5 * twice_p, mult);
  }
  return out;
}

inline std::vector<std::pair<double, int>> spectral_multiplicities(const PolarizedBasis& pb,
                                                                   const QuasispinOps& qs,
                                                                   int photon_number) {
  const auto idx = shell_indices(pb, photon_number);
  const Mat block = restrict_to(qs.Psq.mat, idx);
  Eigen::SelfAdjointEigenSolver<Mat> solver(block);
  std::map<int, int> eig_count;  // 2*p -> raw eigenvalue count
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    const double e = solver.eigenvalues()(k);
    // invert p(p+1) = e for half-integer p
    const double p = 0.5 * (std::sqrt(1.0 + 4.0 * e) - 1.0);
    const int twice_p = static_cast<int>(std::llround(2.0 * p));
    if (std::abs(0.5 * twice_p * (0.5 * twice_p + 1.0) - e) > 1e-6) {
      throw std::runtime_error("duality_check: Psq eigenvalue off the p(p+1) grid");
    }
    eig_count[twice_p] += 1;
  }
  std::vector<std::pair<double, int>> out;
  for (auto it = eig_count.rbegin(); it != eig_count.rend(); ++it) {
    const int twice_p = it->first;
    const int mult = it->second / (twice_p + 1);
    if (it->second % (twice_p + 1) != 0) {
      throw std::runtime_error("duality_check: eigenvalue count not a full multiplet");
    }
    out.emplace_back(0.5 * twice_p, mult);
  }
  return out;
}

}  // namespace detail

/// Numerical witness of the (SU(2)_p, so*(2m)) duality: commutant relations,
/// per-shell multiplicity tables checked against weight counting, and, for
/// m = 2, a rank test that polynomials in X+ and E acting on the all-plus
/// pseudovacua span each joint (p, mu = p) eigenspace.
inline DualityReport duality_check(const PolarizedBasis& pb, const QuasispinOps& qs,
                                   const ClusterOps& clusters, int n_cut) {
  if (pb.m > 3) throw std::invalid_argument("duality_check: m <= 3 expected");
  if (n_cut > pb.n_max - 2) throw std::invalid_argument("duality_check: need n_cut <= n_max - 2");

  DualityReport report;
  report.commutant_x_residual = 0.0;
  report.commutant_e_residual = 0.0;

  // commutators evaluated on columns whose image stays inside the truncation
  const auto masked_columns_max = [&](const Mat& c, int max_shell) {
    double out = 0.0;
    for (std::size_t col = 0; col < pb.dim(); ++col) {
      if (pb.basis->total(col) <= max_shell) {
        out = std::max(out, c.col(static_cast<Eigen::Index>(col)).cwiseAbs().maxCoeff());
      }
    }
    return out;
  };

  for (int alpha = 0; alpha < 3; ++alpha) {
    const Mat& p = qs.component(alpha).mat;
    for (int i = 0; i < pb.m; ++i) {
      for (int j = i; j < pb.m; ++j) {
        const Mat& x = clusters.xplus(i, j).mat;
        report.commutant_x_residual = std::max(
            report.commutant_x_residual, masked_columns_max(p * x - x * p, pb.n_max - 2));
      }
    }
    for (int i = 0; i < pb.m; ++i) {
      for (int j = 0; j < pb.m; ++j) {
        const Mat& e = clusters.e(i, j).mat;
        report.commutant_e_residual =
            std::max(report.commutant_e_residual, fock::max_abs(p * e - e * p));
      }
    }
  }

  report.multiplicities_match = true;
  for (int n = 0; n <= n_cut; ++n) {
    ShellMultiplicities shell;
    shell.photon_number = n;
    shell.spectral = detail::spectral_multiplicities(pb, qs, n);
    shell.counting = detail::counting_multiplicities(pb, n);
    shell.match = shell.spectral == shell.counting;
    report.multiplicities_match = report.multiplicities_match && shell.match;
    report.shells.push_back(std::move(shell));
  }

  if (pb.m == 2) {
    for (int twice_p = 0; twice_p <= n_cut; ++twice_p) {
      for (int n = twice_p; n <= n_cut; n += 2) {
        const int k = (n - twice_p) / 2;
        // expected multiplicity from the counting table
        int expected = 0;
        for (const auto& [p, mult] : detail::counting_multiplicities(pb, n)) {
          if (std::llround(2.0 * p) == twice_p) expected = mult;
        }
        if (expected == 0) continue;

        // seeds: all-plus states at photon number 2p (highest weight mu = p)
        std::vector<Vec> candidates;
        for (int t = 0; t <= twice_p; ++t) {
          fock::Occupation occ(static_cast<std::size_t>(2 * pb.m), 0);
          occ[static_cast<std::size_t>(pb.plus_mode(0))] = t;
          occ[static_cast<std::size_t>(pb.plus_mode(1))] = twice_p - t;
          Vec seed = fock::basis_vector(pb.basis, occ);
          for (int kk = 0; kk < k; ++kk) seed = clusters.xplus(0, 1).mat * seed;
          if (seed.norm() < 1e-12) continue;
          candidates.push_back(seed / seed.norm());
          // degree-1 E dressing for span insurance
          for (const auto* e : {&clusters.e(0, 1), &clusters.e(1, 0)}) {
            Vec dressed = e->mat * candidates.back();
            if (dressed.norm() > 1e-12) candidates.push_back(dressed / dressed.norm());
          }
        }
        Mat span(pb.dim(), candidates.size());
        for (std::size_t c = 0; c < candidates.size(); ++c) span.col(static_cast<Eigen::Index>(c)) = candidates[c];
        Eigen::ColPivHouseholderQR<Mat> qr(span);
        qr.setThreshold(1e-8);
        const int rank = static_cast<int>(qr.rank());
        report.rank_checks.push_back(
            {n, 0.5 * twice_p, rank, expected, rank == expected});
      }
    }
  }
  return report;
}

/// Quadratic pair-creation coupling g a+_{alpha i} a+_{beta j} + h.c.
/// alpha, beta are polarization signs (+1 or -1); i, j spatial (0-based).
struct QuadraticCoupling {
  int i;
  int j;
  int alpha;
  int beta;
  Cplx g;
};

/// H^2 = H_f + H_p^2: free part sum_i w_i (N_{+i} + N_{-i}) plus the
/// parametric pair terms.
inline fock::OperatorMatrix quadratic_hamiltonian(const std::vector<double>& frequencies,
                                                  const std::vector<QuadraticCoupling>& couplings,
                                                  const PolarizedBasis& pb) {
  if (static_cast<int>(frequencies.size()) != pb.m) {
    throw std::invalid_argument("quadratic_hamiltonian: one frequency per spatial mode");
  }
  auto h = fock::zero_op(pb.basis);
  for (int i = 0; i < pb.m; ++i) {
    h = h + frequencies[static_cast<std::size_t>(i)] *
                (fock::number_op(pb.basis, pb.plus_mode(i)) +
                 fock::number_op(pb.basis, pb.minus_mode(i)));
  }
  for (const auto& c : couplings) {
    if (c.i < 0 || c.i >= pb.m || c.j < 0 || c.j >= pb.m) {
      throw std::invalid_argument("quadratic_hamiltonian: spatial index out of range");
    }
    if ((c.alpha != 1 && c.alpha != -1) || (c.beta != 1 && c.beta != -1)) {
      throw std::invalid_argument("quadratic_hamiltonian: polarization signs must be +-1");
    }
    const int mode_a = c.alpha == 1 ? pb.plus_mode(c.i) : pb.minus_mode(c.i);
    const int mode_b = c.beta == 1 ? pb.plus_mode(c.j) : pb.minus_mode(c.j);
    const auto term = fock::creation_op(pb.basis, mode_a) * fock::creation_op(pb.basis, mode_b);
    h = h + c.g * term + std::conj(c.g) * fock::adjoint(term);
  }
  return h;
}

/// P0-scalar production preset: couples each Y+_{ij} with strength
/// gtilde_{ij}, i.e. g^{+-}_{ij} = g^{-+}_{ij} = gtilde_{ij}/2, so that
/// H_p = sum gtilde Y+ + h.c. and evolution from vacuum reproduces
/// tmsv_state at beta = -i gtilde t (m = 1, short time).
inline std::vector<QuadraticCoupling> y_pair_preset(int i, int j, Cplx gtilde) {
  return {{i, j, +1, -1, 0.5 * gtilde}, {i, j, -1, +1, 0.5 * gtilde}};
}

/// P-scalar counterpart: g^{+-}_{ij} = -g^{-+}_{ij} = gtilde_{ij}, giving
/// H_p = gtilde X+_{ij} + h.c. (vanishes identically at i = j).
inline std::vector<QuadraticCoupling> x_pair_preset(int i, int j, Cplx gtilde) {
  return {{i, j, +1, -1, gtilde}, {i, j, -1, +1, -gtilde}};
}

/// Probability mass on the top graded shell; used to monitor truncation
/// leakage of pair-creation evolution.
inline double top_shell_population(const PolarizedBasis& pb, const Vec& psi) {
  double out = 0.0;
  for (std::size_t i = 0; i < pb.dim(); ++i) {
    if (pb.basis->total(i) == pb.n_max) out += std::norm(psi(static_cast<Eigen::Index>(i)));
  }
  return out;
}

}  // namespace specdyn::polar
