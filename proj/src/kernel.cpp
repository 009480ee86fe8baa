#include "hoi/kernel.hpp"

namespace hoi {

Dataset::Dataset(std::vector<VariableSamples> variables) : variables_(std::move(variables)) {
  if (variables_.size() < 2) throw DataError("a dataset needs at least 2 variables");
  const Eigen::Index n = variables_.front().n();
  if (n < 2) throw DataError("a dataset needs at least 2 observations");
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    const auto& v = variables_[i];
    if (v.n() != n) {
      throw DataError("variable '" + v.name + "' has " + std::to_string(v.n()) + " observations, expected " +
                      std::to_string(n));
    }
    if (v.dim() < 1) throw DataError("variable '" + v.name + "' has no columns");
    if (!v.values.allFinite()) throw DataError("variable '" + v.name + "' contains non-finite values");
  }
}

Dataset Dataset::select(const std::vector<int>& indices) const {
  std::vector<VariableSamples> picked;
  for (int i : indices) {
    if (i < 0 || i >= d()) throw DataError("variable index " + std::to_string(i) + " out of range");
    picked.push_back(variables_[static_cast<std::size_t>(i)]);
  }
  return Dataset(std::move(picked));
}

GramSet build_grams(const Dataset& data, bool centred) {
  GramSet g;
  g.centred = centred;
  for (const auto& v : data.variables()) {
    const double bw = median_heuristic(v);
    g.bandwidths.push_back(bw);
    Eigen::MatrixXd K = gram_gaussian(v, bw);
    g.matrices.push_back(centred ? centre(K) : std::move(K));
  }
  return g;
}

GramSet centred_copy(const GramSet& grams) {
  if (grams.centred) return grams;
  GramSet out = grams;
  for (auto& K : out.matrices) K = centre(K);
  out.centred = true;
  return out;
}

Eigen::MatrixXd block_kernel(const GramSet& grams, BlockMask block) {
  if (block == 0) throw ParameterError("block kernel over an empty block");
  if (grams.centred) throw ContractViolation("block kernels are built from uncentred grams");
  if ((block >> grams.d()) != 0) throw ParameterError("block refers to a variable beyond d");
  Eigen::MatrixXd out = Eigen::MatrixXd::Ones(grams.n(), grams.n());
  for (BlockMask m = block; m != 0; m &= static_cast<BlockMask>(m - 1)) {
    out.array() *= grams[lowest_index(m)].array();
  }
  return out;
}

Eigen::MatrixXd block_kernel(const GramSet& grams, const std::vector<int>& block) {
  BlockMask mask = 0;
  for (int i : block) {
    if (i < 1 || i > grams.d()) throw ParameterError("block index " + std::to_string(i) + " out of range");
    mask |= static_cast<BlockMask>(1u << (i - 1));
  }
  return block_kernel(grams, mask);
}

Eigen::MatrixXd permute_gram(const Eigen::MatrixXd& K, const std::vector<int>& perm) {
  const Eigen::Index n = K.rows();
  if (K.cols() != n || static_cast<Eigen::Index>(perm.size()) != n) throw DimensionError("permute_gram: size mismatch");
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index b = 0; b < n; ++b) {
    const double* col = K.col(perm[static_cast<std::size_t>(b)]).data();
    double* dst = out.col(b).data();
    for (Eigen::Index a = 0; a < n; ++a) dst[a] = col[perm[static_cast<std::size_t>(a)]];
  }
  return out;
}

}  // namespace hoi
