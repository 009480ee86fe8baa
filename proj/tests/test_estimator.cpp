#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "hoi/error.hpp"
#include "hoi/estimator.hpp"
#include "hoi/kernel.hpp"
#include "hoi/lattice.hpp"
#include "oracles.hpp"

using hoi::GramSet;
using hoi::LatticeKind;
using hoi::Partition;

namespace {

Partition P(const char* s) { return Partition::parse(s); }

struct Grams {
  GramSet raw;
  GramSet cen;
};

Grams grams_for(const hoi::Dataset& data) { return {hoi::build_grams(data, false), hoi::build_grams(data, true)}; }

GramSet permuted(const GramSet& g, const std::vector<int>& perm, hoi::BlockMask block) {
  GramSet out = g;
  for (int i = 0; i < g.d(); ++i) {
    if (block & (1u << i)) out.matrices[static_cast<std::size_t>(i)] = hoi::permute_gram(g[i], perm);
  }
  return out;
}

}  // namespace

TEST(Estimator, OracleEquivalenceSmall) {
  // Library oracle (generic_norm) against an independent brute force, and
  // the fast paths against both.
  for (int d = 2; d <= 4; ++d) {
    for (int n = 4; n <= 5; ++n) {
      for (unsigned seed = 0; seed < 3; ++seed) {
        const auto g = grams_for(oracle::coupled_dataset(d, n, 100 * d + 10 * n + seed));
        const auto S = hoi::expansion_for(LatticeKind::streitberg(), d, false);
        const auto L = hoi::expansion_for(LatticeKind::lancaster(), d, false);
        const auto J = hoi::expansion_for(LatticeKind::joint_independence(), d, false);
        const double s_brute = oracle::brute_norm(S, g.raw);
        const double l_brute = oracle::brute_norm(L, g.raw);
        const double j_brute = oracle::brute_norm(J, g.raw);
        EXPECT_LE(oracle::rel_err(hoi::generic_norm(S, g.raw), s_brute), 1e-9);
        EXPECT_LE(oracle::rel_err(hoi::generic_norm(L, g.raw), l_brute), 1e-9);
        EXPECT_LE(oracle::rel_err(hoi::generic_norm(J, g.raw), j_brute), 1e-9);
        EXPECT_LE(oracle::rel_err(hoi::streitberg_stat(g.cen), s_brute), 1e-9) << d << " " << n;
        EXPECT_LE(oracle::rel_err(hoi::lancaster_stat(g.cen), l_brute), 1e-9) << d << " " << n;
        EXPECT_LE(oracle::rel_err(hoi::joint_independence_stat(g.raw), j_brute), 1e-9) << d << " " << n;
        // Centring equivalence on the centred side as well.
        EXPECT_LE(oracle::rel_err(oracle::brute_norm(hoi::expansion_for(LatticeKind::streitberg(), d, true), g.cen),
                                  s_brute),
                  1e-9);
      }
    }
  }
}

TEST(Estimator, FastPathsMatchGenericNorm) {
  for (int d = 2; d <= 4; ++d) {
    for (int n = 4; n <= 8; ++n) {
      const auto g = grams_for(oracle::random_dataset(d, n, 7 * d + n));
      EXPECT_LE(oracle::rel_err(hoi::streitberg_stat(g.cen),
                                hoi::generic_norm(hoi::expansion_for(LatticeKind::streitberg(), d, false), g.raw)),
                1e-9);
      EXPECT_LE(oracle::rel_err(hoi::lancaster_stat(g.cen),
                                hoi::generic_norm(hoi::expansion_for(LatticeKind::lancaster(), d, false), g.raw)),
                1e-9);
      EXPECT_LE(oracle::rel_err(hoi::streitberg_stat_naive(g.cen), hoi::streitberg_stat(g.cen)), 1e-12);
    }
  }
}

TEST(Estimator, LowOrderIdentity) {
  for (unsigned seed = 0; seed < 20; ++seed) {
    for (int d = 2; d <= 3; ++d) {
      const auto g = grams_for(oracle::coupled_dataset(d, 30, seed));
      const double s = hoi::streitberg_stat(g.cen);
      const double l = hoi::lancaster_stat(g.cen);
      EXPECT_LE(std::abs(s - l), 1e-12 * std::max(1.0, std::abs(l)));
    }
  }
}

TEST(Estimator, TwoVariableIsHsic) {
  const auto g = grams_for(oracle::coupled_dataset(2, 40, 3));
  const double hsic = g.cen[0].cwiseProduct(g.cen[1]).sum() / (40.0 * 40.0);
  EXPECT_NEAR(hoi::lancaster_stat(g.cen), hsic, 1e-14);
  EXPECT_NEAR(hoi::joint_independence_stat(g.raw), hsic, 1e-12);
}

TEST(Estimator, ConstantVariablesGiveZero) {
  std::vector<hoi::VariableSamples> vars;
  for (int i = 0; i < 4; ++i) vars.push_back({Eigen::MatrixXd::Constant(10, 1, 2.0), "c" + std::to_string(i)});
  const auto g = grams_for(hoi::Dataset(vars));
  EXPECT_EQ(hoi::lancaster_stat(g.cen), 0.0);
  EXPECT_EQ(hoi::streitberg_stat(g.cen), 0.0);
  EXPECT_NEAR(hoi::joint_independence_stat(g.raw), 0.0, 1e-15);
}

TEST(Estimator, DuplicatedVariablesRegression) {
  Eigen::MatrixXd x(60, 1);
  std::mt19937_64 eng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (Eigen::Index a = 0; a < 60; ++a) x(a, 0) = U(eng);
  const hoi::Dataset data({{x, "a"}, {x, "b"}, {x, "c"}});
  const double v = hoi::joint_independence_stat(hoi::build_grams(data, false));
  EXPECT_GT(v, 0.05);
  EXPECT_NEAR(v, 0.1510577888737249, 1e-10);
}

TEST(Estimator, ContractChecks) {
  const auto g = grams_for(oracle::random_dataset(3, 6, 1));
  EXPECT_THROW(hoi::lancaster_stat(g.raw), hoi::ContractViolation);
  EXPECT_THROW(hoi::streitberg_stat(g.raw), hoi::ContractViolation);
  EXPECT_THROW(hoi::joint_independence_stat(g.cen), hoi::ContractViolation);
  const auto big = grams_for(oracle::random_dataset(4, 40, 1));
  EXPECT_THROW(hoi::generic_norm(hoi::expansion_for(LatticeKind::streitberg(), 4, false), big.raw),
               hoi::ResourceError);
  EXPECT_THROW(hoi::streitberg_stat(grams_for(oracle::random_dataset(10, 4, 1)).cen), hoi::ResourceError);
  EXPECT_THROW(hoi::plan_contraction(P("1|234"), P("1234")), hoi::ContractViolation);
  EXPECT_THROW(hoi::plan_contraction(P("123"), P("1234")), hoi::DimensionError);
}

TEST(Estimator, PlanExponents) {
  EXPECT_EQ(hoi::plan_contraction(P("1234"), P("1234")).cost_exponent, 2);
  // min(1, 2) + 1: one outer index, two independent inner sums.
  EXPECT_EQ(hoi::plan_contraction(P("1234"), P("12|34")).cost_exponent, 2);
  EXPECT_EQ(hoi::plan_contraction(P("12|34"), P("13|24")).cost_exponent, 3);
  EXPECT_EQ(hoi::plan_contraction(P("12|34|56"), P("123|456")).cost_exponent, 3);
  EXPECT_EQ(hoi::plan_contraction(P("12|34|56"), P("13|25|46")).cost_exponent, 4);

  const auto plan = hoi::plan_contraction(P("12|34"), P("1234"));
  ASSERT_EQ(plan.outer.size(), 1u);  // smaller partition outermost
  for (const char* l : {"1234", "12|34", "13|24", "12|34|56", "123|456", "12|3456"}) {
    for (const char* r : {"1234", "12|34", "14|23", "12|34|56", "135|246", "16|2345"}) {
      const Partition a = P(l), b = P(r);
      if (a.d() != b.d()) continue;
      const auto p = hoi::plan_contraction(a, b);
      hoi::BlockMask seen = 0;
      for (const auto& step : p.steps) {
        for (const auto& [outer, vars] : step.factors) {
          EXPECT_EQ(seen & vars, 0);
          seen |= vars;
        }
      }
      EXPECT_EQ(seen, hoi::full_mask(a.d()));
      EXPECT_EQ(p.cost_exponent, std::min(a.size(), b.size()) + 1);
    }
  }
}

TEST(Estimator, PlanEvaluationMatchesBruteInner) {
  const auto g = grams_for(oracle::coupled_dataset(4, 5, 77));
  for (const char* l : {"1234", "12|34", "13|24", "14|23"}) {
    for (const char* r : {"1234", "12|34", "13|24", "14|23"}) {
      const double brute = oracle::brute_inner(P(l), P(r), g.cen);
      EXPECT_LE(oracle::rel_err(hoi::evaluate_plan(hoi::plan_contraction(P(l), P(r)), g.cen), brute), 1e-12);
      // Both orientations agree.
      EXPECT_LE(oracle::rel_err(hoi::evaluate_plan(hoi::plan_contraction(P(r), P(l)), g.cen), brute), 1e-12);
    }
  }
  const auto g6 = grams_for(oracle::coupled_dataset(6, 4, 5));
  for (const auto& [l, r] : std::vector<std::pair<const char*, const char*>>{
           {"12|34|56", "135|246"}, {"12|34|56", "13|25|46"}, {"123|456", "14|25|36"}, {"12|3456", "1234|56"}}) {
    EXPECT_LE(oracle::rel_err(hoi::evaluate_plan(hoi::plan_contraction(P(l), P(r)), g6.cen),
                              oracle::brute_inner(P(l), P(r), g6.cen)),
              1e-12)
        << l << " x " << r;
  }
}

TEST(Estimator, CachedInnerProduct) {
  const auto g = grams_for(oracle::coupled_dataset(6, 10, 8));
  hoi::InnerProductCache cache;
  const Partition l = P("12|34|56"), r = P("12|3456");
  const double direct = hoi::evaluate_plan(hoi::plan_contraction(l, r), g.cen);
  const double cached = hoi::cached_inner_product(l, r, g.cen, cache);
  EXPECT_LE(oracle::rel_err(direct, cached), 1e-10);
  EXPECT_GE(cache.size(), 2u);
  // The (12,12) factor is shared with the pair inner product of 12|34.
  const double pair12 = hoi::evaluate_plan(hoi::plan_contraction(hoi::SubPartition{0b11}, hoi::SubPartition{0b11}), g.cen);
  const auto hit = cache.find(hoi::InnerProductCache::make_key(0b11, {0b11}, {0b11}));
  ASSERT_TRUE(hit.has_value());
  EXPECT_LE(oracle::rel_err(*hit, pair12), 1e-12);
  // Second call is a pure lookup with the same value.
  EXPECT_EQ(hoi::cached_inner_product(l, r, g.cen, cache), cached);

  const auto g4 = grams_for(oracle::coupled_dataset(4, 9, 2));
  hoi::InnerProductCache c4;
  const double same = hoi::cached_inner_product(P("12|34"), P("12|34"), g4.cen, c4);
  const double a = hoi::evaluate_plan(hoi::plan_contraction(hoi::SubPartition{0b0011}, hoi::SubPartition{0b0011}), g4.cen);
  const double b = hoi::evaluate_plan(hoi::plan_contraction(hoi::SubPartition{0b1100}, hoi::SubPartition{0b1100}), g4.cen);
  EXPECT_LE(oracle::rel_err(same, a * b), 1e-12);
}

TEST(Estimator, CachingTransparent) {
  for (int d = 4; d <= 6; ++d) {
    const auto g = grams_for(oracle::coupled_dataset(d, 25, 31 + d));
    hoi::InnerProductCache cache;
    const double plain = hoi::streitberg_stat(g.cen);
    const double cold = hoi::streitberg_stat(g.cen, cache);
    const double warm = hoi::streitberg_stat(g.cen, cache);
    EXPECT_LE(std::abs(plain - cold), 1e-12 * std::max(1.0, std::abs(plain)));
    EXPECT_EQ(cold, warm);
    const hoi::StreitbergEvaluator eval(d);
    EXPECT_LE(std::abs(eval(g.cen, nullptr) - plain), 1e-12);
  }
}

TEST(Estimator, CacheInvariantUnder) {
  const auto g = grams_for(oracle::coupled_dataset(5, 12, 4));
  hoi::InnerProductCache cache;
  hoi::streitberg_stat(g.cen, cache);
  const hoi::BlockMask block = 0b00011;
  const auto kept = cache.invariant_under(block);
  EXPECT_LT(kept.size(), cache.size());
  std::vector<int> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(5));
  const auto gp = permuted(g.cen, perm, block);
  auto reuse = kept;
  const double with_reuse = hoi::streitberg_stat(gp, reuse);
  EXPECT_LE(std::abs(with_reuse - hoi::streitberg_stat(gp)), 1e-12);
}

TEST(Estimator, BlockPermutationMatchesExplicitPermutation) {
  for (int d = 3; d <= 6; ++d) {
    const int n = 14;
    const auto g = grams_for(oracle::coupled_dataset(d, n, 50 + d));
    std::mt19937 eng(d);
    for (hoi::BlockMask block = 1; block < hoi::full_mask(d); block = static_cast<hoi::BlockMask>(block * 2 + 1 - (block & 1))) {
      const hoi::BlockPermutationStreitberg fast(g.cen, block);
      for (int rep = 0; rep < 3; ++rep) {
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), eng);
        const double expect = hoi::streitberg_stat(permuted(g.cen, perm, block));
        EXPECT_LE(std::abs(fast(perm) - expect), 1e-12 * std::max(1.0, std::abs(expect)))
            << "d=" << d << " block=" << block;
      }
      std::vector<int> id(n);
      std::iota(id.begin(), id.end(), 0);
      EXPECT_LE(std::abs(fast(id) - hoi::streitberg_stat(g.cen)), 1e-12);
    }
    // Every bipartition of d = 5.
    if (d == 5) {
      for (hoi::BlockMask block = 1; block < hoi::full_mask(d); ++block) {
        const hoi::BlockPermutationStreitberg fast(g.cen, block);
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), eng);
        EXPECT_LE(std::abs(fast(perm) - hoi::streitberg_stat(permuted(g.cen, perm, block))), 1e-12) << block;
      }
    }
  }
  const auto g = grams_for(oracle::random_dataset(3, 6, 1));
  const hoi::BlockPermutationStreitberg fast(g.cen, 0b1);
  EXPECT_THROW(fast({0, 1}), hoi::DimensionError);
  EXPECT_THROW(hoi::BlockPermutationStreitberg(g.cen, 0), hoi::ParameterError);
}

TEST(Estimator, InvariantToSampleOrderAndRelabeling) {
  const auto data = oracle::coupled_dataset(5, 20, 6);
  const auto g = grams_for(data);
  std::vector<int> perm(20);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(1));
  const auto all = hoi::full_mask(5);
  const auto gp = grams_for(data);
  const auto pc = permuted(gp.cen, perm, all), pr = permuted(gp.raw, perm, all);
  EXPECT_LE(std::abs(hoi::streitberg_stat(g.cen) - hoi::streitberg_stat(pc)), 1e-12);
  EXPECT_LE(std::abs(hoi::lancaster_stat(g.cen) - hoi::lancaster_stat(pc)), 1e-12);
  EXPECT_LE(std::abs(hoi::joint_independence_stat(g.raw) - hoi::joint_independence_stat(pr)), 1e-12);

  const auto relabeled = grams_for(data.select({3, 0, 4, 2, 1}));
  EXPECT_LE(oracle::rel_err(hoi::streitberg_stat(g.cen), hoi::streitberg_stat(relabeled.cen)), 1e-11);
  EXPECT_LE(oracle::rel_err(hoi::lancaster_stat(g.cen), hoi::lancaster_stat(relabeled.cen)), 1e-11);
  EXPECT_LE(oracle::rel_err(hoi::joint_independence_stat(g.raw), hoi::joint_independence_stat(relabeled.raw)), 1e-11);
}

TEST(Estimator, NonNegative) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto g = grams_for(oracle::random_dataset(4, 15, seed));
    EXPECT_GE(hoi::streitberg_stat(g.cen), -1e-10);
    EXPECT_GE(hoi::lancaster_stat(g.cen), -1e-10);
    EXPECT_GE(hoi::joint_independence_stat(g.raw), -1e-12);
  }
}

TEST(Estimator, GeneralizedStat) {
  const auto g = grams_for(oracle::coupled_dataset(4, 6, 12));
  EXPECT_LE(oracle::rel_err(hoi::generalized_stat(g.cen, P("1234")), hoi::streitberg_stat(g.cen)), 1e-12);
  const double gen = hoi::generalized_stat(g.cen, P("12|34"));
  EXPECT_LE(oracle::rel_err(gen, oracle::brute_norm(hoi::generalized_expansion(P("12|34")), g.raw)), 1e-9);
  EXPECT_LE(oracle::rel_err(gen, hoi::generic_norm(hoi::generalized_expansion(P("12|34"), true), g.cen)), 1e-9);
}

TEST(Estimator, PairwiseSum) {
  std::vector<double> v(1001, 0.1);
  EXPECT_NEAR(hoi::pairwise_sum(v), 100.1, 1e-12);
  EXPECT_EQ(hoi::pairwise_sum(std::vector<double>{}), 0.0);
}
