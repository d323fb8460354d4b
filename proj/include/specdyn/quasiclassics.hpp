#pragma once

#include <specdyn/polyalg.hpp>
#include <specdyn/spectral.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace specdyn::quasi {

using fock::Cplx;
using fock::Mat;
using fock::Vec;
using polyalg::HPRep;
using polyalg::SectorLabel;
using spectral::ModelParams;

/// SU(2) coherent trial function on one sector:
/// |sector; v; xi> = S_V(xi) N V_+^v |lowest>, xi = r exp(-i theta).
struct TrialState {
  SectorLabel sector;
  int v;
  Cplx xi;
};

/// Normalized excitation V_+^v |lowest> (the eta = v basis vector up to
/// rounding of the ladder product).
inline Vec excited_lowest(const HPRep& hp, int v) {
  const int d = hp.sector.dim();
  if (v < 0 || v >= d) throw std::invalid_argument("excited_lowest: v out of range");
  Vec w = Vec::Zero(d);
  w(0) = 1.0;
  for (int k = 0; k < v; ++k) w = hp.Vp * w;
  w /= w.norm();
  return w;
}

/// exp(xi V+ - xi* V-) N V_+^v |lowest>, the matrix exponential computed
/// exactly on the sector via the Hermitian eigendecomposition of
/// i(xi V+ - xi* V-).  xi = 0 returns the normalized excitation itself.
inline Vec coherent_state(const HPRep& hp, int v, Cplx xi) {
  const Vec w = excited_lowest(hp, v);
  if (xi == Cplx(0.0, 0.0)) return w;
  const Mat b = Cplx(0.0, 1.0) * (xi * hp.Vp - std::conj(xi) * hp.Vm);
  Eigen::SelfAdjointEigenSolver<Mat> solver(b);
  if (solver.info() != Eigen::Success) throw std::runtime_error("coherent_state: eigensolver failed");
  const int d = hp.sector.dim();
  Vec phase(d);
  for (int k = 0; k < d; ++k) phase(k) = std::exp(Cplx(0.0, -solver.eigenvalues()(k)));
  return solver.eigenvectors() * phase.asDiagonal() * (solver.eigenvectors().adjoint() * w);
}

/// Cached coherent-state machinery for one (H, sector, v): many evaluations
/// of the energy surface reuse a single eigendecomposition of i(V+ - V-)
/// through the phase factorization
/// exp(xi V+ - xi* V-) = exp(i a V0) exp(rho (V+ - V-)) exp(-i a V0),
/// xi = rho exp(i a).
class CoherentEvaluator {
 public:
  CoherentEvaluator(Mat h, const HPRep& hp, int v)
      : h_(std::move(h)), d_(hp.sector.dim()), j_(hp.j), l0_(0.0) {
    if (h_.rows() != d_) throw std::invalid_argument("CoherentEvaluator: dimension mismatch");
    h2_ = h_ * h_;
    v0_diag_.resize(static_cast<std::size_t>(d_));
    for (int k = 0; k < d_; ++k) v0_diag_[static_cast<std::size_t>(k)] = hp.V0(k, k).real();
    Eigen::SelfAdjointEigenSolver<Mat> solver(Cplx(0.0, 1.0) * (hp.Vp - hp.Vm));
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("CoherentEvaluator: eigensolver failed");
    }
    u_ = solver.eigenvectors();
    lam_ = solver.eigenvalues();
    w_ = u_.adjoint() * excited_lowest(hp, v);
    v_level_ = v;
    y0_ = Mat::Zero(d_, d_);
    for (int k = 0; k < d_; ++k) y0_(k, k) = hp.V0(k, k).real();  // V0; Y0 = V0 + (l0+j) I
  }

  void set_y0_offset(double l0_plus_j) { l0_ = l0_plus_j; }

  Vec state(Cplx xi) const {
    const double rho = std::abs(xi);
    const double alpha = std::arg(xi);
    Vec amp(d_);
    for (int k = 0; k < d_; ++k) amp(k) = std::exp(Cplx(0.0, -rho * lam_(k))) * w_(k);
    Vec psi = u_ * amp;
    const double v0_at_v = v0_diag_[static_cast<std::size_t>(v_level_)];
    for (int k = 0; k < d_; ++k) {
      psi(k) *= std::exp(Cplx(0.0, alpha * (v0_diag_[static_cast<std::size_t>(k)] - v0_at_v)));
    }
    return psi;
  }

  double energy(Cplx xi) const {
    const Vec psi = state(xi);
    return psi.dot(h_ * psi).real();
  }

  double variance(Cplx xi) const {
    const Vec psi = state(xi);
    const double e = psi.dot(h_ * psi).real();
    return psi.dot(h2_ * psi).real() - e * e;
  }

  /// <Y0> = <V0> + (l0 + j); the offset is set by the flow constructor.
  double y0_expect(Cplx xi) const {
    const Vec psi = state(xi);
    return psi.dot(y0_ * psi).real() + l0_;
  }

  int dim() const { return d_; }
  double j() const { return j_; }

 private:
  Mat h_;
  Mat h2_;
  Mat y0_;
  Mat u_;
  Eigen::VectorXd lam_;
  Vec w_;
  std::vector<double> v0_diag_;
  int d_;
  int v_level_ = 0;
  double j_;
  double l0_;
};

/// <sector; v; xi| H |sector; v; xi>, real by Hermiticity.
inline double energy_functional(const Mat& h, const HPRep& hp, int v, Cplx xi) {
  if (h.rows() != hp.sector.dim()) throw std::invalid_argument("energy_functional: basis mismatch");
  const Vec psi = coherent_state(hp, v, xi);
  const Cplx e = psi.dot(h * psi);
  return e.real();
}

inline double energy_functional(const Mat& h, const HPRep& hp, const TrialState& trial) {
  return energy_functional(h, hp, trial.v, trial.xi);
}

struct StationaryPoint {
  double r;
  double theta;
  double energy;
  double residual;  // |dH/dr| at the reported point
  double variance;  // <H^2> - <H>^2, the selection quality measure
};

namespace detail {

inline constexpr int kGridPoints = 2000;
inline constexpr double kDerivStep = 1e-5;

inline double radial_derivative(const CoherentEvaluator& eval, double r, double theta) {
  // r * exp(-i theta) stays valid for the (r - h) < 0 stencil point, where the
  // theta-line continues through the pole
  const Cplx dir = std::polar(1.0, -theta);
  return (eval.energy((r + kDerivStep) * dir) - eval.energy((r - kDerivStep) * dir)) /
         (2.0 * kDerivStep);
}

}  // namespace detail

/// Stationary points of the energy functional over the v-th coherent family.
/// The phase is fixed by exp(-i theta) = b/|b| (theta arbitrary, taken 0,
/// when b = 0); the radial direction is scanned on a 2000-point grid over
/// [0, pi] — the coherent orbit is 2 pi periodic in 2r, so this covers the
/// sphere — and every bracketed root of dH/dr is bisected down and reported
/// with its residual and energy variance.
inline std::vector<StationaryPoint> stationary_points(const ModelParams& p,
                                                      const SectorLabel& sec, int v) {
  const auto rep = polyalg::build_supd2_rep(sec);
  const auto hp = polyalg::hp_map(rep);
  const Mat h = spectral::build_hhg(p, sec);
  const CoherentEvaluator eval(h, hp, v);

  const double theta = std::abs(p.b()) == 0.0 ? 0.0 : -std::arg(p.b());

  const double pi = std::acos(-1.0);
  const int grid = detail::kGridPoints;
  std::vector<double> deriv(static_cast<std::size_t>(grid + 1));
  for (int i = 0; i <= grid; ++i) {
    deriv[static_cast<std::size_t>(i)] = detail::radial_derivative(eval, pi * i / grid, theta);
  }

  std::vector<double> roots;
  const double node_tol = 1e-12;
  for (int i = 0; i <= grid; ++i) {
    if (std::abs(deriv[static_cast<std::size_t>(i)]) <= node_tol) {
      roots.push_back(pi * i / grid);
      continue;
    }
    if (i == grid) break;
    const double g0 = deriv[static_cast<std::size_t>(i)];
    const double g1 = deriv[static_cast<std::size_t>(i + 1)];
    if (g0 * g1 < 0.0) {
      double lo = pi * i / grid, hi = pi * (i + 1) / grid;
      double glo = g0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = detail::radial_derivative(eval, mid, theta);
        if (glo * gm <= 0.0) {
          hi = mid;
        } else {
          lo = mid;
          glo = gm;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
  }

  // dedupe near-identical roots (grid nodes sitting on a bracketed root)
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-9; }),
              roots.end());

  std::vector<StationaryPoint> out;
  for (double r : roots) {
    const Cplx xi = r * std::polar(1.0, -theta);
    out.push_back({r, theta, eval.energy(xi), std::abs(detail::radial_derivative(eval, r, theta)),
                   eval.variance(xi)});
  }
  if (out.empty()) {
    // cannot happen for a continuous energy on the compact sphere
    throw std::runtime_error("stationary_points: no stationary point found (solver bug)");
  }
  return out;
}

/// Quality criterion: minimal energy variance, ties broken by smaller r.
inline const StationaryPoint& select_best(const std::vector<StationaryPoint>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("select_best: empty candidate list");
  return *std::min_element(candidates.begin(), candidates.end(),
                           [](const StationaryPoint& a, const StationaryPoint& b) {
                             if (a.variance != b.variance) return a.variance < b.variance;
                             return a.r < b.r;
                           });
}

/// Canonical flow state: q = theta, p = <Y0>, with the conserved energy
/// H(q, p) carried along.
struct FlowState {
  double q;
  double p;
  double t;
  double energy;
};

/// Classical Hamiltonian flow dq/dt = dH/dp, dp/dt = -dH/dq on the v = 0
/// coherent family, trial states S_V(z)|lowest> with z = -r exp(i theta).
/// Fixed-step fourth-order Runge-Kutta; p is recovered from r by inverting
/// the numerically monotone p(r) on [0, pi/2].
class ClassicalFlow {
 public:
  ClassicalFlow(const ModelParams& p, const SectorLabel& sec)
      : eval_(spectral::build_hhg(p, sec), polyalg::hp_map(polyalg::build_supd2_rep(sec)), 0),
        j_(0.5 * sec.s),
        l0_(sec.l0().to_double()) {
    eval_.set_y0_offset(l0_ + j_);
    p_min_ = l0_;
    p_max_ = l0_ + sec.s;
  }

  double p_of_r(double r, double theta) const { return eval_.y0_expect(z_of(r, theta)); }

  /// Inverts p(r) on the monotone segment [0, pi/2]: closed-form seed from
  /// the exact su(2) relation <V0> = -j cos 2r, then Newton steps against
  /// the numerically evaluated p(r).
  double r_of_p(double p, double theta) const {
    const double clamped = std::clamp(1.0 - (p - l0_) / j_, -1.0, 1.0);
    double r = 0.5 * std::acos(clamped);
    for (int it = 0; it < 4; ++it) {
      const double slope = 2.0 * j_ * std::sin(2.0 * r);
      if (std::abs(slope) < 1e-9) break;
      const double f = p_of_r(r, theta) - p;
      r -= f / slope;
      r = std::clamp(r, 0.0, 0.5 * std::acos(-1.0));
    }
    return r;
  }

  double energy_at(double q, double p) const { return eval_.energy(z_of(r_of_p(p, q), q)); }

  std::vector<FlowState> integrate(double q0, double p0, double t_max, double dt) const {
    if (dt <= 0.0 || t_max <= 0.0) throw std::invalid_argument("ClassicalFlow: bad time step");
    check_range(p0);
    std::vector<FlowState> traj;
    const auto steps = static_cast<std::size_t>(std::llround(t_max / dt));
    traj.reserve(steps + 1);
    double q = q0, p = p0;
    traj.push_back({q, p, 0.0, energy_at(q, p)});
    for (std::size_t k = 1; k <= steps; ++k) {
      step_rk4(q, p, dt);
      check_range(p);
      traj.push_back({q, p, dt * static_cast<double>(k), energy_at(q, p)});
    }
    return traj;
  }

 private:
  static Cplx z_of(double r, double theta) { return -std::polar(r, theta); }

  void check_range(double p) const {
    const double tol = 1e-6 * (p_max_ - p_min_ + 1.0);
    if (p < p_min_ - tol || p > p_max_ + tol) {
      throw std::runtime_error("ClassicalFlow: p left the admissible range [l0, l0+s]; "
                               "refine dt");
    }
  }

  double dH_dp(double q, double p) const {
    const double h = 1e-6 * (p_max_ - p_min_);
    double lo = std::clamp(p - h, p_min_, p_max_ - 2.0 * h);
    const double hi = lo + 2.0 * h;
    return (energy_at(q, hi) - energy_at(q, lo)) / (hi - lo);
  }

  double dH_dq(double q, double p) const {
    const double h = 1e-6;
    return (energy_at(q + h, p) - energy_at(q - h, p)) / (2.0 * h);
  }

  void step_rk4(double& q, double& p, double dt) const {
    const auto f = [this](double qq, double pp, double& dq, double& dp) {
      dq = dH_dp(qq, pp);
      dp = -dH_dq(qq, pp);
    };
    double k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p;
    f(q, p, k1q, k1p);
    f(q + 0.5 * dt * k1q, p + 0.5 * dt * k1p, k2q, k2p);
    f(q + 0.5 * dt * k2q, p + 0.5 * dt * k2p, k3q, k3p);
    f(q + dt * k3q, p + dt * k3p, k4q, k4p);
    q += dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    p += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  }

  CoherentEvaluator eval_;
  double j_;
  double l0_;
  double p_min_;
  double p_max_;
};

inline std::vector<FlowState> classical_flow(const ModelParams& p, const SectorLabel& sec,
                                             double q0, double p0, double t_max, double dt) {
  return ClassicalFlow(p, sec).integrate(q0, p0, t_max, dt);
}

/// Mean-field manifold defect 2 Ybar+ Ybar- - Psi(Ybar0; l1) - Psi(Ybar0+1; l1).
/// Zero defines the classical surface hosting the quasiclassical trajectories;
/// exact-state expectations need not lie on it, so the value is reported, not
/// asserted.
inline double manifold_residual(int n, double l1, double ybar0, Cplx ybar_plus,
                                Cplx ybar_minus) {
  return (2.0 * ybar_plus * ybar_minus).real() - polyalg::psi_eval_real(n, ybar0, l1) -
         polyalg::psi_eval_real(n, ybar0 + 1.0, l1);
}

}  // namespace specdyn::quasi
