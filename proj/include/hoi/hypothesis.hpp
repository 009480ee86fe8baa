#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hoi/estimator.hpp"
#include "hoi/kernel.hpp"
#include "hoi/lattice.hpp"

namespace hoi {

/// Statistic evaluated on the original and the permuted data.
enum class Statistic {
  Auto,        // follow the lattice kind
  Streitberg,  // centred Streitberg V-statistic
  Lancaster,   // centred Lancaster V-statistic
  Dhsic,       // joint-independence (dHSIC) V-statistic
  BlockHsic,   // two-variable HSIC between the product kernels of b and b'
};

enum class Correction { Bonferroni, None };

const char* to_string(Statistic s);
const char* to_string(Correction c);
Statistic parse_statistic(const std::string& s);

struct TestConfig {
  LatticeKind kind = LatticeKind::streitberg();
  Statistic statistic = Statistic::Auto;
  double alpha = 0.05;
  int permutations = 500;
  std::uint64_t seed = 0;
  bool early_exit = false;
  Correction correction = Correction::Bonferroni;
  int workers = 1;

  /// Throws ParameterError unless 0 < alpha < 1 and permutations >= 20.
  void validate() const;
  /// Statistic actually used once Auto is resolved against the kind.
  Statistic resolved_statistic() const;
};

struct SubTestResult {
  Partition partition;  // b|b', or 0̂ for joint independence
  double statistic = 0.0;
  double p_value = 1.0;
  double level = 0.0;  // corrected per-test threshold
  bool rejected = false;
  std::vector<int> permuted_block;  // 1-based
  int exceedances = 0;              // replicates with T[p] >= observed
};

struct TestReport {
  bool composite_rejected = false;
  double observed_statistic = 0.0;
  std::vector<SubTestResult> sub_results;
  std::vector<Partition> surviving_partitions;
  bool completed = false;  // every sub-hypothesis was tested
  int sub_hypotheses = 0;
  int n = 0;
  int d = 0;
  TestConfig config;
};

/// Grams computed once per dataset; permutations only reorder them.
struct PreparedData {
  GramSet raw;
  GramSet centred;

  static PreparedData from(const Dataset& data);
  int d() const { return raw.d(); }
  Eigen::Index n() const { return raw.n(); }
};

double observed_statistic(const PreparedData& data, Statistic statistic, const Partition* bipartition = nullptr);

/// Permutation test of P = P_b P_b' for one bipartition: a single shared
/// permutation per replicate is applied to every variable of the smaller block.
SubTestResult permutation_subtest(const PreparedData& data, const Partition& bipartition, const TestConfig& config,
                                  std::uint64_t stream_seed, double level);
SubTestResult permutation_subtest(const Dataset& data, const Partition& bipartition, const TestConfig& config,
                                  std::uint64_t stream_seed);

/// Joint-independence sub-test: every variable but the first is permuted independently.
SubTestResult joint_subtest(const PreparedData& data, const TestConfig& config, std::uint64_t stream_seed,
                            double level);

/// Baseline: HSIC between the block product kernels of b and b'.
SubTestResult modified_dhsic_subtest(const Dataset& data, const Partition& bipartition, const TestConfig& config,
                                     std::uint64_t stream_seed);

TestReport composite_test(const Dataset& data, const TestConfig& config);
TestReport composite_test(const PreparedData& data, const TestConfig& config);

/// Smaller block of a bipartition; ties go to the block holding the lowest index.
BlockMask smaller_block(const Partition& bipartition);

}  // namespace hoi
