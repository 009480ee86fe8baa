#include "hoi/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "hoi/error.hpp"
#include "hoi/parallel.hpp"
#include "hoi/rng.hpp"

namespace hoi {

const char* to_string(Statistic s) {
  switch (s) {
    case Statistic::Auto: return "auto";
    case Statistic::Streitberg: return "streitberg";
    case Statistic::Lancaster: return "lancaster";
    case Statistic::Dhsic: return "dhsic";
    case Statistic::BlockHsic: return "block-hsic";
  }
  return "?";
}

const char* to_string(Correction c) { return c == Correction::Bonferroni ? "bonferroni" : "none"; }

Statistic parse_statistic(const std::string& s) {
  if (s == "auto") return Statistic::Auto;
  if (s == "streitberg") return Statistic::Streitberg;
  if (s == "lancaster") return Statistic::Lancaster;
  if (s == "dhsic" || s == "joint") return Statistic::Dhsic;
  if (s == "block-hsic" || s == "modified-dhsic") return Statistic::BlockHsic;
  throw ParameterError("unknown statistic '" + s + "'");
}

void TestConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  if (permutations < 20) throw ParameterError("at least 20 permutations are required");
  if (workers < 1) throw ParameterError("workers must be positive");
}

Statistic TestConfig::resolved_statistic() const {
  if (statistic != Statistic::Auto) return statistic;
  switch (kind.tag) {
    case LatticeKind::Tag::Streitberg: return Statistic::Streitberg;
    case LatticeKind::Tag::Lancaster: return Statistic::Lancaster;
    case LatticeKind::Tag::JointIndependence: return Statistic::Dhsic;
    case LatticeKind::Tag::Interval: break;
  }
  throw UnsupportedError("composite tests over interval lattices are not supported");
}

PreparedData PreparedData::from(const Dataset& data) {
  PreparedData p;
  p.raw = build_grams(data, false);
  p.centred = centred_copy(p.raw);
  return p;
}

BlockMask smaller_block(const Partition& bipartition) {
  if (bipartition.size() != 2) {
    throw ParameterError("sub-hypothesis " + bipartition.to_string() + " must have exactly 2 blocks");
  }
  // Canonical order puts the block holding the lowest index first.
  return popcount(bipartition.block(0)) <= popcount(bipartition.block(1)) ? bipartition.block(0)
                                                                          : bipartition.block(1);
}

namespace {

std::vector<int> indices_of(BlockMask m) {
  std::vector<int> out;
  for (; m != 0; m &= static_cast<BlockMask>(m - 1)) out.push_back(lowest_index(m) + 1);
  return out;
}

// Evaluates one statistic on the original data and on permuted copies of it.
class PermutationEngine {
 public:
  PermutationEngine(const PreparedData& data, Statistic stat, const Partition* bipartition)
      : data_(data), stat_(stat) {
    if (stat_ == Statistic::Streitberg) streitberg_.emplace(data.d());
    if (stat_ == Statistic::BlockHsic) {
      if (bipartition == nullptr) throw ParameterError("block HSIC needs a bipartition");
      blocks_.raw.matrices = {block_kernel(data.raw, bipartition->block(0)),
                              block_kernel(data.raw, bipartition->block(1))};
      blocks_.raw.bandwidths = {1.0, 1.0};
      first_block_ = bipartition->block(0);
    }
    observed_ = evaluate(data_.raw, data_.centred);
  }

  double observed() const { return observed_; }
  Statistic statistic() const { return stat_; }

  /// perms[i] is the permutation of variable i, or nullptr to keep it.
  double permuted(const std::vector<const std::vector<int>*>& perms) const {
    if (stat_ == Statistic::BlockHsic) {
      GramSet g = blocks_.raw;
      for (int blk = 0; blk < 2; ++blk) {
        const BlockMask members = blk == 0 ? first_block_ : static_cast<BlockMask>(full_mask(data_.d()) ^ first_block_);
        const auto* p = perms[static_cast<std::size_t>(lowest_index(members))];
        if (p) g.matrices[static_cast<std::size_t>(blk)] = permute_gram(g.matrices[static_cast<std::size_t>(blk)], *p);
      }
      return joint_independence_stat(g);
    }
    const bool needs_raw = stat_ == Statistic::Dhsic;
    GramSet g = needs_raw ? data_.raw : data_.centred;
    for (int i = 0; i < data_.d(); ++i) {
      const auto* p = perms[static_cast<std::size_t>(i)];
      if (p) g.matrices[static_cast<std::size_t>(i)] = permute_gram(g.matrices[static_cast<std::size_t>(i)], *p);
    }
    if (stat_ == Statistic::Streitberg) return (*streitberg_)(g, nullptr);
    return evaluate(g, g);
  }

 private:
  double evaluate(const GramSet& raw, const GramSet& centred) const {
    switch (stat_) {
      case Statistic::Streitberg: {
        InnerProductCache cache;
        return (*streitberg_)(centred, &cache);
      }
      case Statistic::Lancaster: return lancaster_stat(centred);
      case Statistic::Dhsic: return joint_independence_stat(raw);
      case Statistic::BlockHsic: return joint_independence_stat(blocks_.raw);
      case Statistic::Auto: break;
    }
    throw ParameterError("statistic must be resolved before evaluation");
  }

  const PreparedData& data_;
  Statistic stat_;
  std::optional<StreitbergEvaluator> streitberg_;
  PreparedData blocks_;
  BlockMask first_block_ = 0;
  double observed_ = 0.0;
};

void check_statistic_defined(Statistic s, int d) {
  if (d < 2) throw ParameterError("tests need at least 2 variables");
  if (s == Statistic::Auto) throw ParameterError("statistic must be resolved");
}

int count_exceedances(const std::vector<double>& replicates, double observed) {
  const double slack = 1e-12 * std::max(1.0, std::abs(observed));
  return static_cast<int>(
      std::count_if(replicates.begin(), replicates.end(), [&](double t) { return t >= observed - slack; }));
}

SubTestResult finish(const Partition& partition, std::vector<int> block, const std::vector<double>& replicates,
                     double observed, double level) {
  SubTestResult r;
  r.partition = partition;
  r.statistic = observed;
  r.level = level;
  r.permuted_block = std::move(block);
  r.exceedances = count_exceedances(replicates, observed);
  r.p_value = (r.exceedances + 1.0) / (static_cast<double>(replicates.size()) + 1.0);
  r.rejected = r.p_value <= level;
  return r;
}

SubTestResult run_bipartition(const PermutationEngine& engine, const PreparedData& data, const Partition& bipartition,
                              const TestConfig& config, std::uint64_t stream_seed, double level) {
  const BlockMask permuted = smaller_block(bipartition);
  const auto n = static_cast<int>(data.n());
  std::vector<double> replicates(static_cast<std::size_t>(config.permutations));
  std::optional<BlockPermutationStreitberg> streitberg;
  if (engine.statistic() == Statistic::Streitberg) streitberg.emplace(data.centred, permuted);
  parallel_for(replicates.size(), config.workers, [&](std::size_t p) {
    CounterRng rng(derive_seed(stream_seed, p));
    const std::vector<int> perm = rng.permutation(n);
    if (streitberg) {
      replicates[p] = (*streitberg)(perm);
      return;
    }
    std::vector<const std::vector<int>*> perms(static_cast<std::size_t>(data.d()), nullptr);
    for (BlockMask m = permuted; m != 0; m &= static_cast<BlockMask>(m - 1)) {
      perms[static_cast<std::size_t>(lowest_index(m))] = &perm;
    }
    replicates[p] = engine.permuted(perms);
  });
  return finish(bipartition, indices_of(permuted), replicates, engine.observed(), level);
}

SubTestResult run_joint(const PermutationEngine& engine, const PreparedData& data, const TestConfig& config,
                        std::uint64_t stream_seed, double level) {
  const int d = data.d();
  const auto n = static_cast<int>(data.n());
  std::vector<double> replicates(static_cast<std::size_t>(config.permutations));
  parallel_for(replicates.size(), config.workers, [&](std::size_t p) {
    CounterRng rng(derive_seed(stream_seed, p));
    std::vector<std::vector<int>> owned;
    owned.reserve(static_cast<std::size_t>(d));
    std::vector<const std::vector<int>*> perms(static_cast<std::size_t>(d), nullptr);
    for (int i = 1; i < d; ++i) {
      owned.push_back(rng.permutation(n));
      perms[static_cast<std::size_t>(i)] = &owned.back();
    }
    replicates[p] = engine.permuted(perms);
  });
  std::vector<int> block;
  for (int i = 2; i <= d; ++i) block.push_back(i);
  return finish(Partition::finest(d), std::move(block), replicates, engine.observed(), level);
}

double per_test_level(const TestConfig& config, std::size_t sub_hypotheses) {
  if (config.correction == Correction::None) return config.alpha;
  return config.alpha / static_cast<double>(sub_hypotheses);
}

}  // namespace

double observed_statistic(const PreparedData& data, Statistic statistic, const Partition* bipartition) {
  check_statistic_defined(statistic, data.d());
  return PermutationEngine(data, statistic, bipartition).observed();
}

SubTestResult permutation_subtest(const PreparedData& data, const Partition& bipartition, const TestConfig& config,
                                  std::uint64_t stream_seed, double level) {
  config.validate();
  if (bipartition.d() != data.d()) throw DimensionError("bipartition does not match the dataset's d");
  smaller_block(bipartition);  // validates block count
  const Statistic stat = config.resolved_statistic();
  check_statistic_defined(stat, data.d());
  PermutationEngine engine(data, stat, &bipartition);
  return run_bipartition(engine, data, bipartition, config, stream_seed, level);
}

SubTestResult permutation_subtest(const Dataset& data, const Partition& bipartition, const TestConfig& config,
                                  std::uint64_t stream_seed) {
  const auto prepared = PreparedData::from(data);
  return permutation_subtest(prepared, bipartition, config, stream_seed, config.alpha);
}

SubTestResult joint_subtest(const PreparedData& data, const TestConfig& config, std::uint64_t stream_seed,
                            double level) {
  config.validate();
  const Statistic stat = config.resolved_statistic();
  if (stat == Statistic::BlockHsic) throw UnsupportedError("block HSIC is defined for bipartitions only");
  check_statistic_defined(stat, data.d());
  PermutationEngine engine(data, stat, nullptr);
  return run_joint(engine, data, config, stream_seed, level);
}

SubTestResult modified_dhsic_subtest(const Dataset& data, const Partition& bipartition, const TestConfig& config,
                                     std::uint64_t stream_seed) {
  TestConfig c = config;
  c.statistic = Statistic::BlockHsic;
  return permutation_subtest(data, bipartition, c, stream_seed);
}

TestReport composite_test(const Dataset& data, const TestConfig& config) {
  return composite_test(PreparedData::from(data), config);
}

TestReport composite_test(const PreparedData& data, const TestConfig& config) {
  config.validate();
  const int d = data.d();
  const Statistic stat = config.resolved_statistic();
  check_statistic_defined(stat, d);
  const auto subs = second_level(config.kind, d);
  const double level = per_test_level(config, subs.size());

  TestReport report;
  report.config = config;
  report.n = static_cast<int>(data.n());
  report.d = d;
  report.sub_hypotheses = static_cast<int>(subs.size());

  const bool joint = config.kind.tag == LatticeKind::Tag::JointIndependence;
  if (joint && stat == Statistic::BlockHsic) throw UnsupportedError("block HSIC needs bipartition sub-hypotheses");

  // The observed statistic is shared by every sub-test except block HSIC,
  // whose statistic depends on the bipartition.
  std::optional<PermutationEngine> shared;
  if (stat != Statistic::BlockHsic) {
    shared.emplace(data, stat, nullptr);
    report.observed_statistic = shared->observed();
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    const std::uint64_t stream = derive_seed(config.seed, i);
    SubTestResult r;
    if (joint) {
      r = run_joint(*shared, data, config, stream, level);
    } else if (shared) {
      r = run_bipartition(*shared, data, subs[i], config, stream, level);
    } else {
      PermutationEngine engine(data, stat, &subs[i]);
      r = run_bipartition(engine, data, subs[i], config, stream, level);
    }
    report.sub_results.push_back(std::move(r));
    if (config.early_exit && !report.sub_results.back().rejected) break;
  }

  report.completed = report.sub_results.size() == subs.size();
  report.composite_rejected =
      report.completed && std::all_of(report.sub_results.begin(), report.sub_results.end(),
                                      [](const SubTestResult& r) { return r.rejected; });
  if (report.completed) {
    std::vector<Partition> rejected;
    for (const auto& r : report.sub_results) {
      if (r.rejected) rejected.push_back(r.partition);
    }
    report.surviving_partitions = prune_candidates(rejected, d);
  }
  return report;
}

}  // namespace hoi
