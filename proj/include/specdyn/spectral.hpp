#pragma once

#include <specdyn/fock.hpp>
#include <specdyn/polyalg.hpp>

#include <Eigen/Eigenvalues>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace specdyn::spectral {

using fock::Cplx;
using fock::Mat;
using fock::Vec;
using polyalg::AlgebraRep;
using polyalg::SectorLabel;

/// Parameters of the harmonics-generation model.  The linear-form
/// coefficients a = n w1 - w0, b = g, c = w1 + w0 are recomputed on every
/// access so they can never drift from (n, w1, w0).
struct ModelParams {
  int n = 2;
  double omega1 = 1.0;
  double omega0 = 2.0;
  Cplx g = Cplx(1.0, 0.0);

  double a() const { return n * omega1 - omega0; }
  Cplx b() const { return g; }
  double c() const { return omega1 + omega0; }
};

/// One sector of the two-mode decomposition embedded in a truncated basis:
/// how many of its s+1 states fit, and whether all of them do.  Partial
/// sectors are excluded from invariant suites rather than silently included.
struct SectorCoverage {
  SectorLabel label;
  bool complete;
  int states_in_basis;
};

/// Enumerates the sectors (kappa, s) whose basis states
/// |n1 = kappa + n eta, n0 = s - eta| intersect the two-mode truncation
/// N_total <= n_max.  Every two-mode state belongs to exactly one sector
/// (kappa = n1 mod n, s = n0 + floor(n1/n)); the per-sector state counts
/// partition the full basis.
inline std::vector<SectorCoverage> decompose_sectors(int n, int n_max) {
  if (n < 2) throw std::invalid_argument("decompose_sectors: n must be >= 2");
  if (n_max < 0) throw std::invalid_argument("decompose_sectors: n_max must be >= 0");
  std::vector<SectorCoverage> out;
  for (int kappa = 0; kappa < n; ++kappa) {
    for (int s = 0; kappa + s <= n_max; ++s) {
      const int fitting = std::min(s, (n_max - kappa - s) / (n - 1)) + 1;
      const bool complete = kappa + n * s <= n_max;
      out.push_back({SectorLabel(n, kappa, s), complete, fitting});
    }
  }
  return out;
}

/// Sector of a two-mode occupation (n1, n0).
inline SectorLabel sector_of_state(int n, int n1, int n0) {
  return SectorLabel(n, n1 % n, n0 + n1 / n);
}

/// Sum of per-sector state counts; equals C(n_max + 2, 2) by the partition
/// property.
inline std::size_t coverage_total(const std::vector<SectorCoverage>& coverage) {
  std::size_t total = 0;
  for (const auto& c : coverage) total += static_cast<std::size_t>(c.states_in_basis);
  return total;
}

/// Linear form a Y0 + b Y+ + b* Y- + c R1 on the sector, from the algebraic
/// realization.
inline Mat build_hhg_linear(const ModelParams& p, const AlgebraRep& rep) {
  if (p.n != rep.n) throw std::invalid_argument("build_hhg_linear: n mismatch");
  const int d = rep.dim();
  return p.a() * rep.Y0 + p.b() * rep.Yp + std::conj(p.b()) * rep.Ym +
         p.c() * rep.r1.to_double() * Mat::Identity(d, d);
}

/// Fock form w1 N1 + w0 N0 + g (a+_1)^n a_0 + g* (a_1)^n a+_0 restricted to
/// the sector, built from occupations and chained ladder amplitudes.
inline Mat build_hhg_fock(const ModelParams& p, const SectorLabel& sec) {
  if (p.n != sec.n) throw std::invalid_argument("build_hhg_fock: n mismatch");
  const int d = sec.dim();
  Mat h = Mat::Zero(d, d);
  for (int eta = 0; eta < d; ++eta) {
    const auto occ = polyalg::sector_occupation(sec, eta);
    h(eta, eta) = p.omega1 * occ[0] + p.omega0 * occ[1];
  }
  const Mat f = polyalg::supd2_fock_restriction(sec);
  h += p.b() * f + std::conj(p.b()) * f.adjoint();
  return h;
}

inline constexpr double kFormAgreementTol = 1e-12;

/// Harmonics-generation Hamiltonian on one sector.  Both independent builds
/// (linear form from the algebra, Fock form from ladder actions) are
/// computed and must agree entrywise to kFormAgreementTol.
inline Mat build_hhg(const ModelParams& p, const SectorLabel& sec) {
  const AlgebraRep rep = polyalg::build_supd2_rep(sec);
  const Mat linear = build_hhg_linear(p, rep);
  const Mat fockform = build_hhg_fock(p, sec);
  const double diff = fock::max_abs(linear - fockform);
  if (diff > kFormAgreementTol) {
    throw std::logic_error("build_hhg: linear and Fock builds disagree by " +
                           std::to_string(diff));
  }
  return linear;
}

/// Quasi-spin form a V0 + b V+ phi^(-1/2) + b* phi^(-1/2) V- + c R1 + a(R0+J):
/// the same operator written through the exact su(2) generators.  The
/// diagonal phi^(-1/2) uses a sentinel at the top level, where both V+'s
/// column and V-'s row vanish.
inline Mat build_hqs(const ModelParams& p, const AlgebraRep& rep) {
  if (p.n != rep.n) throw std::invalid_argument("build_hqs: n mismatch");
  const auto hp = polyalg::hp_map(rep);
  const int d = rep.dim();

  Mat phi_inv_sqrt = Mat::Zero(d, d);
  for (int eta = 0; eta < d; ++eta) {
    phi_inv_sqrt(eta, eta) = 1.0 / std::sqrt(hp.phi_vals[static_cast<std::size_t>(eta)]);
  }

  const double r0_plus_j = rep.l0.to_double() + hp.j;
  return p.a() * hp.V0 + p.b() * hp.Vp * phi_inv_sqrt +
         std::conj(p.b()) * phi_inv_sqrt * hp.Vm +
         (p.c() * rep.r1.to_double() + p.a() * r0_plus_j) * Mat::Identity(d, d);
}

/// One-mode multi-boson model w1 a+a + g Y+ + g* Y on the residue class
/// N = kappa (mod n), truncated at n_max.
inline Mat build_hn_multiboson(double omega1, Cplx g, int n, int kappa, int n_max) {
  const AlgebraRep rep = polyalg::build_supd11_rep(n, kappa, n_max);
  const int d = rep.dim();
  Mat h = Mat::Zero(d, d);
  for (int nu = 0; nu < d; ++nu) h(nu, nu) = omega1 * (kappa + n * nu);
  h += g * rep.Yp + std::conj(g) * rep.Ym;
  return h;
}

/// Coupling of the general multiphoton model: a sorted index multiset
/// (1-based scattered modes) and its complex strength.
struct MultiphotonCoupling {
  std::vector<int> modes;  // i_1 <= ... <= i_n in [1, m]
  Cplx g;
};

/// General multiphoton Hamiltonian on the full (m+1)-mode Fock space,
/// modes 0..m-1 the scattered modes a_1..a_m and mode m the pump a_0:
/// sum_i w_i N_i + w0 N_pump + sum [g (a+_{i1}...a+_{in}) a_pump + h.c.].
inline fock::OperatorMatrix build_hmp_general(const std::vector<double>& frequencies,
                                              double omega0,
                                              const std::vector<MultiphotonCoupling>& couplings,
                                              int n, int n_max,
                                              std::size_t dim_cap = fock::kDefaultDimCap) {
  if (n < 2) throw std::invalid_argument("build_hmp_general: n must be >= 2");
  const int m = static_cast<int>(frequencies.size());
  if (m < 1) throw std::invalid_argument("build_hmp_general: need at least one scattered mode");
  const auto basis = fock::build_basis(m + 1, n_max, dim_cap);
  const int pump = m;

  auto h = fock::zero_op(basis);
  for (int i = 0; i < m; ++i) h = h + frequencies[static_cast<std::size_t>(i)] * fock::number_op(basis, i);
  h = h + omega0 * fock::number_op(basis, pump);

  for (const auto& coupling : couplings) {
    if (static_cast<int>(coupling.modes.size()) != n) {
      throw std::invalid_argument("build_hmp_general: coupling multiset size must equal n");
    }
    auto term = fock::annihilation_op(basis, pump);
    int prev = 1;
    for (int idx : coupling.modes) {
      if (idx < prev || idx > m) {
        throw std::invalid_argument("build_hmp_general: coupling indices must be sorted in [1, m]");
      }
      prev = idx;
      term = fock::creation_op(basis, idx - 1) * term;
    }
    h = h + coupling.g * term + std::conj(coupling.g) * fock::adjoint(term);
  }
  return h;
}

/// Full two-mode Fock-space harmonics Hamiltonian (mode 0 = a_1, mode 1 = a_0)
/// for cross-sector evolution and the [H, R1] = 0 dynamic-constant check.
inline fock::OperatorMatrix build_hhg_full(const ModelParams& p, int n_max,
                                           std::size_t dim_cap = fock::kDefaultDimCap) {
  const auto basis = fock::build_basis(2, n_max, dim_cap);
  auto h = p.omega1 * fock::number_op(basis, 0) + p.omega0 * fock::number_op(basis, 1);
  auto term = fock::annihilation_op(basis, 1);
  for (int k = 0; k < p.n; ++k) term = fock::creation_op(basis, 0) * term;
  return h + p.b() * term + std::conj(p.b()) * fock::adjoint(term);
}

/// R1 = (N1 + n N0)/(1 + n) on the full two-mode basis.  Entries are built
/// from the integer numerator so states of one sector share the exact same
/// double value and [H, R1] vanishes identically.
inline fock::OperatorMatrix r1_operator(const fock::BasisPtr& basis, int n) {
  Mat m = Mat::Zero(static_cast<Eigen::Index>(basis->size()),
                    static_cast<Eigen::Index>(basis->size()));
  for (std::size_t i = 0; i < basis->size(); ++i) {
    const auto& occ = basis->state(i);
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
        static_cast<double>(occ[0] + n * occ[1]) / (1 + n);
  }
  return {basis, std::move(m)};
}

inline constexpr double kHermTol = 1e-10;

struct Spectrum {
  Eigen::VectorXd eigenvalues;  // ascending
  Mat eigenvectors;             // orthonormal columns
};

/// Hermitian eigendecomposition; rejects inputs whose anti-Hermitian part
/// exceeds `herm_tol`.
inline Spectrum diagonalize(const Mat& h, double herm_tol = kHermTol) {
  if (h.rows() != h.cols()) throw std::invalid_argument("diagonalize: matrix not square");
  const double herm_dev = fock::max_abs(h - h.adjoint());
  if (herm_dev > herm_tol) {
    throw std::invalid_argument("diagonalize: input not Hermitian (deviation " +
                                std::to_string(herm_dev) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Mat> solver(h);
  if (solver.info() != Eigen::Success) throw std::runtime_error("diagonalize: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Spectrum of one sector, tagged with its label.
struct SectorSpectrum {
  SectorLabel sector;
  Eigen::VectorXd eigenvalues;
  Mat eigenvectors;
};

enum class HamiltonianForm { Linear, Fock, Quasispin };

inline SectorSpectrum sector_spectrum(const ModelParams& p, const SectorLabel& sec,
                                      HamiltonianForm form = HamiltonianForm::Linear) {
  Mat h;
  switch (form) {
    case HamiltonianForm::Linear:
      h = build_hhg(p, sec);
      break;
    case HamiltonianForm::Fock:
      h = build_hhg_fock(p, sec);
      break;
    case HamiltonianForm::Quasispin:
      h = build_hqs(p, polyalg::build_supd2_rep(sec));
      break;
  }
  auto spec = diagonalize(h);
  return {sec, std::move(spec.eigenvalues), std::move(spec.eigenvectors)};
}

/// Named observable for evolution output.
struct Observable {
  std::string name;
  Mat op;
};

struct EvolveResult {
  std::vector<double> t;
  std::vector<Vec> states;
  std::map<std::string, std::vector<Cplx>> expectations;
  double max_norm_drift = 0.0;
};

/// Unitary evolution by spectral resolution:
/// psi(t) = sum_k exp(-i E_k t) <v_k|psi0> v_k.  Exact to eigensolver
/// precision; norm drift is tracked and reported.
inline EvolveResult evolve(const Mat& h, const Vec& psi0, const std::vector<double>& t_grid,
                           const std::vector<Observable>& observables = {}) {
  if (t_grid.empty()) throw std::invalid_argument("evolve: empty time grid");
  if (psi0.size() != h.rows()) throw std::invalid_argument("evolve: state dimension mismatch");
  if (std::abs(psi0.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("evolve: psi0 not normalized");
  }
  const auto spec = diagonalize(h);
  const Vec coeffs = spec.eigenvectors.adjoint() * psi0;

  EvolveResult result;
  result.t = t_grid;
  result.states.reserve(t_grid.size());
  for (const auto& obs : observables) {
    result.expectations[obs.name].reserve(t_grid.size());
  }
  for (double t : t_grid) {
    Vec phase(coeffs.size());
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
      phase(k) = std::exp(Cplx(0.0, -spec.eigenvalues(k) * t)) * coeffs(k);
    }
    Vec psi = spec.eigenvectors * phase;
    result.max_norm_drift = std::max(result.max_norm_drift, std::abs(psi.norm() - 1.0));
    for (const auto& obs : observables) {
      result.expectations[obs.name].push_back(psi.dot(obs.op * psi));
    }
    result.states.push_back(std::move(psi));
  }
  return result;
}

/// Sector observables (Y0, Y+, Y-, N1, N0) on the sector basis, for
/// evolution reporting.
inline std::vector<Observable> sector_observables(const SectorLabel& sec) {
  const AlgebraRep rep = polyalg::build_supd2_rep(sec);
  const int d = sec.dim();
  Mat n1 = Mat::Zero(d, d);
  Mat n0 = Mat::Zero(d, d);
  for (int eta = 0; eta < d; ++eta) {
    const auto occ = polyalg::sector_occupation(sec, eta);
    n1(eta, eta) = occ[0];
    n0(eta, eta) = occ[1];
  }
  return {{"Y0", rep.Y0}, {"Yplus", rep.Yp}, {"Yminus", rep.Ym}, {"N1", n1}, {"N0", n0}};
}

}  // namespace specdyn::spectral
