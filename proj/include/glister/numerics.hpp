#pragma once

// Dense algebra aliases, stable reductions and the seeded generator shared by
// every other module. All math is double precision.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace glister {

using Index = std::ptrdiff_t;

template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using ColVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using DenseMatrix = RowMatrix<double>;
using Vector = ColVector<double>;

/// log(sum(exp(v))) with the max shifted out.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (v.size() == 0) throw std::invalid_argument("log_sum_exp: empty vector");
  const Scalar hi = v.maxCoeff();
  if (!std::isfinite(hi)) throw std::invalid_argument("log_sum_exp: non-finite entry");
  return hi + std::log((v.derived().array() - hi).exp().sum());
}

/// Numerically stable log(1 + exp(x)).
inline double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Squared Euclidean distances between every pair of rows of `a`.
/// The result is exactly symmetric with an exactly zero diagonal.
template <typename Derived>
RowMatrix<typename Derived::Scalar> pairwise_sq_dists(
    const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const Index n = a.rows();
  if (n < 1) throw std::invalid_argument("pairwise_sq_dists: matrix has no rows");
  RowMatrix<Scalar> out(n, n);
  for (Index i = 0; i < n; ++i) {
    out(i, i) = Scalar(0);
    for (Index j = i + 1; j < n; ++j) {
      const Scalar d = (a.row(i) - a.row(j)).squaredNorm();
      out(i, j) = d;
      out(j, i) = d;
    }
  }
  return out;
}

/// Squared distances between rows of `a` (output rows) and rows of `b`
/// (output columns).
template <typename DerivedA, typename DerivedB>
RowMatrix<typename DerivedA::Scalar> cross_sq_dists(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("cross_sq_dists: column mismatch");
  RowMatrix<typename DerivedA::Scalar> out(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.rows(); ++j)
      out(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  return out;
}

/// Central-difference gradient of `f` at `x`.
Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& x, double h);

/// Relative error used by gradient checks:
/// |a - b| / max(|a|, |b|, floor).
double relative_error(const Vector& a, const Vector& b, double floor = 1e-8);

/// xoshiro256** seeded through SplitMix64.
///
/// The output sequence depends only on the seed, so traces replay bit for bit
/// on any platform. Distribution helpers are implemented here rather than
/// through <random>, whose distributions are implementation-defined.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound). Unbiased (Lemire rejection).
  std::uint64_t uniform_int(std::uint64_t bound);
  /// Standard normal via Box-Muller (second variate cached).
  double normal();

  /// Child stream seeded with seed XOR splitmix(stream index).
  SeededRng split(std::uint64_t stream) const;

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// `k` distinct values drawn uniformly from [0, n), in draw order.
  std::vector<Index> sample_without_replacement(Index n, Index k);

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// FNV-1a over the sorted indices (each as 8 little-endian bytes), as 16
/// lowercase hex digits.
std::string subset_digest(std::span<const Index> indices);

/// Format a double so that parsing it back yields the same value.
std::string format_double(double x);

}  // namespace glister
