#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "hoi/kernel.hpp"
#include "hoi/lattice.hpp"

namespace hoi {

/// Blocks of a partition of some variable subset, in canonical (sorted) order.
using SubPartition = std::vector<BlockMask>;

/// One partial sum of the contraction: an inner block of the larger
/// partition, split by the outer blocks it overlaps.
struct ContractionStep {
  BlockMask inner_block = 0;
  /// (outer block index, variables of inner_block falling in that outer block)
  std::vector<std::pair<int, BlockMask>> factors;
};

/// Evaluation order for the inner product of the embeddings of two
/// factorisations. Loops run over the indices of `outer` (the partition
/// with fewer blocks); each block of `inner` collapses to one partial sum.
struct ContractionPlan {
  SubPartition outer;
  SubPartition inner;
  std::vector<ContractionStep> steps;
  int cost_exponent = 0;  // min(|left|, |right|) + 1
};

/// Throws ContractViolation if either partition has a singleton block.
ContractionPlan plan_contraction(const Partition& left, const Partition& right);
/// Works on partitions of a variable subset; no singleton check.
ContractionPlan plan_contraction(const SubPartition& left, const SubPartition& right);

/// (1/n^(|outer|+|inner|)) * sum over all index tuples of prod_i K^i[a_{outer(i)}][c_{inner(i)}].
double evaluate_plan(const ContractionPlan& plan, const GramSet& grams);

/// Memo of inner products keyed by (variable subset, left, right), valid for
/// one GramSet. Lookups may run concurrently; insertion is exclusive.
class InnerProductCache {
 public:
  using Key = std::tuple<BlockMask, SubPartition, SubPartition>;

  InnerProductCache() = default;
  InnerProductCache(const InnerProductCache& other);
  InnerProductCache& operator=(const InnerProductCache& other);

  std::optional<double> find(const Key& key) const;
  void insert(const Key& key, double value);
  std::size_t size() const;
  void clear();

  /// Copy holding only entries unaffected by jointly permuting the
  /// observations of the variables in `permuted`: subsets entirely inside
  /// or entirely outside it.
  InnerProductCache invariant_under(BlockMask permuted) const;

  static Key make_key(BlockMask subset, SubPartition left, SubPartition right);

 private:
  mutable std::shared_mutex mutex_;
  std::map<Key, double> entries_;
};

/// <mu_left, mu_right> evaluated by factoring across the blocks of
/// join(left, right) and memoising each factor.
double cached_inner_product(const Partition& left, const Partition& right, const GramSet& grams,
                            InnerProductCache& cache);

/// Product-lattice term table for the centred Streitberg statistic at one d,
/// prepared once and reused across permutation replicates.
class StreitbergEvaluator {
 public:
  explicit StreitbergEvaluator(int d);
  /// Centred grams required.
  double operator()(const GramSet& grams, InnerProductCache* cache = nullptr) const;
  const std::vector<ProductTerm>& terms() const { return terms_; }
  int d() const { return d_; }

 private:
  int d_;
  std::vector<ProductTerm> terms_;
};

/// Centred Streitberg statistic after permuting the observations of every
/// variable in `block` with one shared permutation. Contraction steps that
/// involve only variables outside the block are computed once, steps inside
/// it are re-indexed, and only steps straddling the split are recomputed.
class BlockPermutationStreitberg {
 public:
  BlockPermutationStreitberg(const GramSet& centred, BlockMask block);
  /// Row a of the permuted data is row perm[a] of the original. Thread-safe.
  double operator()(const std::vector<int>& perm) const;
  /// Distinct steps recomputed per permutation.
  std::size_t recomputed_steps() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// (1/n^2) sum_ab prod_i K~^i_ab. Centred grams.
double lancaster_stat(const GramSet& grams);
/// Squared norm of the embedded Streitberg interaction. Centred grams.
double streitberg_stat(const GramSet& grams);
double streitberg_stat(const GramSet& grams, InnerProductCache& cache);
/// Unoptimised evaluation: every product term by a plain full-tuple loop
/// with no caching. Used for benchmarking the planner.
double streitberg_stat_naive(const GramSet& grams);
/// dHSIC-style squared norm of joint minus product of marginals. Uncentred grams.
double joint_independence_stat(const GramSet& grams);
/// Squared norm of the generalised interaction over [0̂, pi_s]. Centred grams.
double generalized_stat(const GramSet& grams, const Partition& pi_s);

/// Brute-force V-statistic of ||sum c_pi mu_pi||^2, looping over every
/// index assignment. Throws ResourceError when n^(2 max|pi|) > 1e8.
double generic_norm(const SignedExpansion& expansion, const GramSet& grams);

/// Sum with pairwise (tree) accumulation.
double pairwise_sum(std::span<const double> values);

}  // namespace hoi
