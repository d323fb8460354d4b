#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

namespace specdyn::fock {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Occupation = std::vector<int>;

inline void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

/// Binomial coefficient as size_t; throws on overflow past `cap`.
inline std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  return r;
}

/// Truncated bosonic occupation-number basis: all occupation vectors with
/// total quanta <= n_max, over `mode_count` modes.
///
/// Ordering contract (part of the public interface; serialized bases are
/// reproducible): states are sorted by total occupation, and within each
/// total lexicographically ascending in the occupation tuple, e.g. for two
/// modes and total 2: (0,2) < (1,1) < (2,0).
class FockBasis {
 public:
  FockBasis(int mode_count, int n_max, std::size_t dim_cap) {
    require(mode_count >= 1, "FockBasis: mode_count must be >= 1");
    require(n_max >= 0, "FockBasis: n_max must be >= 0");
    const std::size_t dim = binomial(n_max + mode_count, mode_count);
    if (dim > dim_cap) {
      throw std::length_error("FockBasis: dimension " + std::to_string(dim) +
                              " exceeds safety cap " + std::to_string(dim_cap));
    }
    mode_count_ = mode_count;
    n_max_ = n_max;
    states_.reserve(dim);
    totals_.reserve(dim);
    Occupation occ(static_cast<std::size_t>(mode_count), 0);
    for (int total = 0; total <= n_max; ++total) emit(occ, 0, total, total);
  }

  int mode_count() const { return mode_count_; }
  int n_max() const { return n_max_; }
  std::size_t size() const { return states_.size(); }
  const Occupation& state(std::size_t i) const { return states_[i]; }
  int total(std::size_t i) const { return totals_[i]; }

  std::optional<std::size_t> index_of(const Occupation& occ) const {
    if (occ.size() != static_cast<std::size_t>(mode_count_)) return std::nullopt;
    int total = 0;
    for (int v : occ) {
      if (v < 0) return std::nullopt;
      total += v;
    }
    if (total > n_max_) return std::nullopt;
    const auto it = std::lower_bound(states_.begin(), states_.end(), occ,
                                     [](const Occupation& a, const Occupation& b) {
                                       const int ta = std::accumulate(a.begin(), a.end(), 0);
                                       const int tb = std::accumulate(b.begin(), b.end(), 0);
                                       if (ta != tb) return ta < tb;
                                       return a < b;
                                     });
    if (it == states_.end() || *it != occ) return std::nullopt;
    return static_cast<std::size_t>(it - states_.begin());
  }

  bool same_shape(const FockBasis& other) const {
    return mode_count_ == other.mode_count_ && n_max_ == other.n_max_;
  }

 private:
  void emit(Occupation& occ, int mode, int remaining, int total) {
    if (mode == mode_count_ - 1) {
      occ[static_cast<std::size_t>(mode)] = remaining;
      states_.push_back(occ);
      totals_.push_back(total);
      return;
    }
    for (int k = 0; k <= remaining; ++k) {
      occ[static_cast<std::size_t>(mode)] = k;
      emit(occ, mode + 1, remaining - k, total);
    }
    occ[static_cast<std::size_t>(mode)] = 0;
  }

  int mode_count_ = 0;
  int n_max_ = 0;
  std::vector<Occupation> states_;
  std::vector<int> totals_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

inline constexpr std::size_t kDefaultDimCap = 200000;

inline BasisPtr build_basis(int mode_count, int n_max, std::size_t dim_cap = kDefaultDimCap) {
  return std::make_shared<const FockBasis>(mode_count, n_max, dim_cap);
}

/// Dense complex matrix tagged with the basis it acts on.  Immutable after
/// construction; all algebra below is by value.
struct OperatorMatrix {
  BasisPtr basis;
  Mat mat;

  std::size_t dim() const { return static_cast<std::size_t>(mat.rows()); }
};

inline void require_same_basis(const OperatorMatrix& a, const OperatorMatrix& b) {
  require(a.basis && b.basis, "operator algebra: missing basis");
  require(a.basis->same_shape(*b.basis), "operator algebra: basis mismatch");
}

inline void require_mode(const FockBasis& basis, int mode) {
  require(mode >= 0 && mode < basis.mode_count(), "invalid mode index");
}

/// Action of a single ladder operator on one basis state: target index and
/// real amplitude, or nullopt when the image leaves the truncated basis
/// (creation past n_max) or vanishes (annihilation of an empty mode).
struct LadderHit {
  std::size_t index;
  double amp;
};

inline std::optional<LadderHit> creation_action(const FockBasis& basis, std::size_t i, int mode) {
  require_mode(basis, mode);
  if (basis.total(i) + 1 > basis.n_max()) return std::nullopt;
  Occupation occ = basis.state(i);
  const int n = occ[static_cast<std::size_t>(mode)];
  occ[static_cast<std::size_t>(mode)] = n + 1;
  const auto j = basis.index_of(occ);
  if (!j) return std::nullopt;
  return LadderHit{*j, std::sqrt(static_cast<double>(n + 1))};
}

inline std::optional<LadderHit> annihilation_action(const FockBasis& basis, std::size_t i, int mode) {
  require_mode(basis, mode);
  Occupation occ = basis.state(i);
  const int n = occ[static_cast<std::size_t>(mode)];
  if (n == 0) return std::nullopt;
  occ[static_cast<std::size_t>(mode)] = n - 1;
  const auto j = basis.index_of(occ);
  if (!j) return std::nullopt;
  return LadderHit{*j, std::sqrt(static_cast<double>(n))};
}

/// <m|a+_k|n> = sqrt(n_k + 1) iff m = n with mode k incremented and the
/// total still within n_max; zero otherwise.
inline OperatorMatrix creation_op(const BasisPtr& basis, int mode) {
  require_mode(*basis, mode);
  Mat m = Mat::Zero(static_cast<Eigen::Index>(basis->size()), static_cast<Eigen::Index>(basis->size()));
  for (std::size_t col = 0; col < basis->size(); ++col) {
    if (const auto hit = creation_action(*basis, col, mode)) {
      m(static_cast<Eigen::Index>(hit->index), static_cast<Eigen::Index>(col)) = hit->amp;
    }
  }
  return {basis, std::move(m)};
}

inline OperatorMatrix annihilation_op(const BasisPtr& basis, int mode) {
  require_mode(*basis, mode);
  Mat m = Mat::Zero(static_cast<Eigen::Index>(basis->size()), static_cast<Eigen::Index>(basis->size()));
  for (std::size_t col = 0; col < basis->size(); ++col) {
    if (const auto hit = annihilation_action(*basis, col, mode)) {
      m(static_cast<Eigen::Index>(hit->index), static_cast<Eigen::Index>(col)) = hit->amp;
    }
  }
  return {basis, std::move(m)};
}

/// Diagonal with entries n_k; equal to creation_op * annihilation_op
/// entrywise on the full truncated basis.
inline OperatorMatrix number_op(const BasisPtr& basis, int mode) {
  require_mode(*basis, mode);
  Mat m = Mat::Zero(static_cast<Eigen::Index>(basis->size()), static_cast<Eigen::Index>(basis->size()));
  for (std::size_t i = 0; i < basis->size(); ++i) {
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
        static_cast<double>(basis->state(i)[static_cast<std::size_t>(mode)]);
  }
  return {basis, std::move(m)};
}

inline OperatorMatrix identity_op(const BasisPtr& basis) {
  return {basis, Mat::Identity(static_cast<Eigen::Index>(basis->size()),
                               static_cast<Eigen::Index>(basis->size()))};
}

inline OperatorMatrix zero_op(const BasisPtr& basis) {
  return {basis, Mat::Zero(static_cast<Eigen::Index>(basis->size()),
                           static_cast<Eigen::Index>(basis->size()))};
}

inline OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_basis(a, b);
  return {a.basis, a.mat + b.mat};
}

inline OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_basis(a, b);
  return {a.basis, a.mat - b.mat};
}

inline OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_basis(a, b);
  return {a.basis, a.mat * b.mat};
}

inline OperatorMatrix operator*(const Cplx& c, const OperatorMatrix& a) {
  return {a.basis, c * a.mat};
}

inline OperatorMatrix operator*(double c, const OperatorMatrix& a) {
  return {a.basis, c * a.mat};
}

inline OperatorMatrix adjoint(const OperatorMatrix& a) {
  return {a.basis, a.mat.adjoint()};
}

inline OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_basis(a, b);
  return {a.basis, a.mat * b.mat - b.mat * a.mat};
}

inline OperatorMatrix anticommutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_basis(a, b);
  return {a.basis, a.mat * b.mat + b.mat * a.mat};
}

/// Unit basis vector for the given occupation.
inline Vec basis_vector(const BasisPtr& basis, const Occupation& occ) {
  const auto idx = basis->index_of(occ);
  require(idx.has_value(), "basis_vector: occupation not in basis");
  Vec v = Vec::Zero(static_cast<Eigen::Index>(basis->size()));
  v(static_cast<Eigen::Index>(*idx)) = 1.0;
  return v;
}

inline Vec apply_op(const OperatorMatrix& op, const Vec& state) {
  require(state.size() == op.mat.cols(), "apply_op: dimension mismatch");
  return op.mat * state;
}

inline constexpr double kNormTol = 1e-12;

/// <state|op|state>; the state must be normalized within `norm_tol`.
inline Cplx expectation(const OperatorMatrix& op, const Vec& state, double norm_tol = kNormTol) {
  require(state.size() == op.mat.cols(), "expectation: dimension mismatch");
  const double nrm = state.norm();
  if (std::abs(nrm - 1.0) > norm_tol) {
    throw std::invalid_argument("expectation: state not normalized (norm deviates by " +
                                std::to_string(std::abs(nrm - 1.0)) + ", tolerance " +
                                std::to_string(norm_tol) + ")");
  }
  return state.dot(op.mat * state);
}

/// Max absolute entry over the leading square block of side dim - margin.
/// Used for residual checks that must ignore the top truncation shell.
inline double masked_max_abs(const Mat& m, Eigen::Index margin) {
  const Eigen::Index d = std::max<Eigen::Index>(m.rows() - margin, 0);
  if (d == 0) return 0.0;
  return m.topLeftCorner(d, d).cwiseAbs().maxCoeff();
}

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace specdyn::fock
