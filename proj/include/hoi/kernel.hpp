#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hoi/error.hpp"
#include "hoi/partition.hpp"

namespace hoi {

/// n observations of one variable of dimension m (one row per observation).
struct VariableSamples {
  Eigen::MatrixXd values;
  std::string name;

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

/// Joint i.i.d. sample of d variables sharing the same n.
class Dataset {
 public:
  Dataset() = default;
  /// Throws DataError on mismatched n, n < 2, d < 2 or non-finite entries.
  explicit Dataset(std::vector<VariableSamples> variables);

  int d() const { return static_cast<int>(variables_.size()); }
  Eigen::Index n() const { return variables_.empty() ? 0 : variables_.front().n(); }
  const VariableSamples& variable(int i) const { return variables_[static_cast<std::size_t>(i)]; }
  const std::vector<VariableSamples>& variables() const { return variables_; }

  /// Keeps the listed variables (0-based) in the given order.
  Dataset select(const std::vector<int>& indices) const;

 private:
  std::vector<VariableSamples> variables_;
};

/// Per-variable n x n kernel matrices.
struct GramSet {
  std::vector<Eigen::MatrixXd> matrices;
  bool centred = false;
  std::vector<double> bandwidths;

  int d() const { return static_cast<int>(matrices.size()); }
  Eigen::Index n() const { return matrices.empty() ? 0 : matrices.front().rows(); }
  const Eigen::MatrixXd& operator[](int i) const { return matrices[static_cast<std::size_t>(i)]; }
};

/// Squared Euclidean distances between the rows of X.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> pairwise_sq_distances(
    const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = X.rows();
  Matrix D(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    D(a, a) = Scalar(0);
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const Scalar v = (X.row(a) - X.row(b)).squaredNorm();
      D(a, b) = v;
      D(b, a) = v;
    }
  }
  return D;
}

/// Median pairwise distance over distinct observations. Falls back to the
/// smallest positive distance when the median is 0, and to 1 when every
/// observation is identical.
template <typename Derived>
typename Derived::Scalar median_heuristic(const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = X.rows();
  if (n < 2) throw DataError("median heuristic needs at least 2 observations");
  if (!X.allFinite()) throw DataError("median heuristic: non-finite sample value");

  std::vector<Scalar> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) dist.push_back((X.row(a) - X.row(b)).norm());
  }
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  Scalar median = dist[mid];
  if (dist.size() % 2 == 0) {
    const Scalar below = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    median = (median + below) / Scalar(2);
  }
  if (median > Scalar(0)) return median;

  Scalar smallest(0);
  for (Scalar v : dist) {
    if (v > Scalar(0) && (smallest == Scalar(0) || v < smallest)) smallest = v;
  }
  return smallest > Scalar(0) ? smallest : Scalar(1);
}

inline double median_heuristic(const VariableSamples& samples) { return median_heuristic(samples.values); }

/// K[a][b] = exp(-|x_a - x_b|^2 / (2 bandwidth^2)).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> gram_gaussian(
    const Eigen::MatrixBase<Derived>& X, typename Derived::Scalar bandwidth) {
  using Scalar = typename Derived::Scalar;
  if (!(bandwidth > Scalar(0))) throw ParameterError("Gaussian kernel bandwidth must be positive");
  const Scalar scale = Scalar(-1) / (Scalar(2) * bandwidth * bandwidth);
  return (pairwise_sq_distances(X) * scale).array().exp().matrix();
}

inline Eigen::MatrixXd gram_gaussian(const VariableSamples& samples, double bandwidth) {
  return gram_gaussian(samples.values, bandwidth);
}

/// HKH with H = I - 11^T/n, without forming H.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> centre(const Eigen::MatrixBase<Derived>& K) {
  using Scalar = typename Derived::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Vector row_means = K.rowwise().mean();
  const Vector col_means = K.colwise().mean().transpose();
  const Scalar grand = row_means.mean();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out = K;
  out.colwise() -= row_means;
  out.rowwise() -= col_means.transpose();
  out.array() += grand;
  return out;
}

/// Gaussian grams with per-variable median-heuristic bandwidths.
GramSet build_grams(const Dataset& data, bool centred);

/// Centres every matrix of an uncentred set.
GramSet centred_copy(const GramSet& grams);

/// Hadamard product of the member grams: the product kernel on the
/// concatenated block. Requires uncentred grams.
Eigen::MatrixXd block_kernel(const GramSet& grams, BlockMask block);
/// Rows and columns reordered together: out(a, b) = K(perm[a], perm[b]).
Eigen::MatrixXd permute_gram(const Eigen::MatrixXd& K, const std::vector<int>& perm);
Eigen::MatrixXd block_kernel(const GramSet& grams, const std::vector<int>& block);  // 1-based

}  // namespace hoi
