#include "hoi/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>
#include <set>

#include "hoi/error.hpp"

namespace hoi {

namespace {

SubPartition to_sub(const Partition& p) { return {p.blocks().begin(), p.blocks().end()}; }

SubPartition restrict_to(const SubPartition& p, BlockMask subset) {
  SubPartition out;
  for (BlockMask b : p) {
    const auto r = static_cast<BlockMask>(b & subset);
    if (r != 0) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](BlockMask a, BlockMask b) { return lowest_index(a) < lowest_index(b); });
  return out;
}

BlockMask support(const SubPartition& p) {
  BlockMask s = 0;
  for (BlockMask b : p) s |= b;
  return s;
}

// Connected components of the union of the two co-membership relations.
std::vector<BlockMask> join_components(const SubPartition& left, const SubPartition& right) {
  std::vector<BlockMask> merged(left.begin(), left.end());
  for (BlockMask p : right) {
    BlockMask acc = 0;
    std::vector<BlockMask> rest;
    for (BlockMask m : merged) {
      if ((m & p) != 0) {
        acc |= m;
      } else {
        rest.push_back(m);
      }
    }
    rest.push_back(acc);
    merged = std::move(rest);
  }
  return merged;
}

Eigen::MatrixXd hadamard(const GramSet& grams, BlockMask vars) {
  Eigen::MatrixXd out = grams[lowest_index(vars)];
  for (BlockMask m = static_cast<BlockMask>(vars & (vars - 1)); m != 0; m &= static_cast<BlockMask>(m - 1)) {
    out.array() *= grams[lowest_index(m)].array();
  }
  return out;
}

// Hadamard product over the variables of `vars`; single variables are
// referenced rather than copied.
class Factor {
 public:
  Factor(const GramSet& grams, BlockMask vars) {
    if ((vars & (vars - 1)) == 0) {
      ref_ = &grams[lowest_index(vars)];
    } else {
      owned_ = hadamard(grams, vars);
      ref_ = &owned_;
    }
  }
  const Eigen::MatrixXd& get() const { return *ref_; }

 private:
  Eigen::MatrixXd owned_;
  const Eigen::MatrixXd* ref_ = nullptr;
};

// Partial sum of one inner block as a dense tensor over the outer indices it
// touches. A two-axis tensor is either kept as its factor pair (product
// pair[0] * pair[1]^T, formed only if the reduction needs it) or held as a
// matrix, owned or borrowed from precomputed storage.
struct StepTensor {
  std::vector<int> axes;       // outer block indices, ascending
  std::vector<double> values;  // row-major over axes, 3+ axes
  Eigen::VectorXd vec;         // 1 axis
  std::vector<Factor> pair;
  Eigen::MatrixXd owned;
  const Eigen::MatrixXd* shared = nullptr;

  bool lazy() const { return !pair.empty(); }
  const Eigen::MatrixXd& matrix() const { return shared ? *shared : owned; }
};

StepTensor contract_step(const std::vector<std::pair<int, BlockMask>>& step_factors, const GramSet& grams) {
  const Eigen::Index n = grams.n();
  StepTensor t;
  std::vector<Factor> factors;
  factors.reserve(step_factors.size());
  for (const auto& [j, vars] : step_factors) {
    t.axes.push_back(j);
    factors.emplace_back(grams, vars);
  }
  if (factors.size() == 1) {
    t.vec = factors[0].get().rowwise().sum();
  } else if (factors.size() == 2) {
    t.pair = std::move(factors);
  } else {
    const std::size_t m = factors.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < m; ++i) total *= static_cast<std::size_t>(n);
    t.values.assign(total, 0.0);
    std::vector<Eigen::Index> idx(m, 0);
    Eigen::VectorXd prod(n);
    for (std::size_t flat = 0; flat < total; ++flat) {
      prod = factors[0].get().row(idx[0]).transpose();
      for (std::size_t f = 1; f < m; ++f) prod.array() *= factors[f].get().row(idx[f]).transpose().array();
      t.values[flat] = prod.sum();
      for (std::size_t f = m; f-- > 0;) {
        if (++idx[f] < n) break;
        idx[f] = 0;
      }
    }
  }
  return t;
}

Eigen::MatrixXd materialize(const StepTensor& t) {
  if (!t.lazy()) return t.matrix();
  Eigen::MatrixXd m;
  m.noalias() = t.pair[0].get() * t.pair[1].get().transpose();
  return m;
}

// Sum over every outer index tuple of the product of the step tensors,
// divided by n^(k + inner).
double reduce_steps(const std::vector<StepTensor>& tensors, std::size_t k, std::size_t inner, Eigen::Index n) {
  const double norm = std::pow(static_cast<double>(n), static_cast<double>(k + inner));
  double total = 0.0;
  if (k == 1) {
    Eigen::VectorXd u = Eigen::VectorXd::Ones(n);
    for (const auto& t : tensors) u.array() *= t.vec.array();
    total = pairwise_sum({u.data(), static_cast<std::size_t>(n)});
  } else if (k == 2 && std::all_of(tensors.begin(), tensors.end(), [](const StepTensor& t) { return t.axes.size() <= 2; })) {
    Eigen::VectorXd u0 = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd u1 = Eigen::VectorXd::Ones(n);
    std::vector<const StepTensor*> mats;
    for (const auto& t : tensors) {
      if (t.axes.size() == 1) {
        (t.axes[0] == 0 ? u0 : u1).array() *= t.vec.array();
      } else {
        mats.push_back(&t);
      }
    }
    // Held matrices first so at most the last factor pair is contracted lazily.
    std::stable_partition(mats.begin(), mats.end(), [](const StepTensor* t) { return !t->lazy(); });
    Eigen::VectorXd terms;
    if (mats.empty()) {
      total = u0.sum() * u1.sum();
    } else if (mats.size() == 1 && mats[0]->lazy()) {
      // u0^T F G^T u1 without forming F G^T.
      const Eigen::VectorXd left = mats[0]->pair[0].get().transpose() * u0;
      const Eigen::VectorXd right = mats[0]->pair[1].get().transpose() * u1;
      terms = left.cwiseProduct(right);
    } else if (!mats.back()->lazy()) {
      Eigen::MatrixXd w = mats[0]->matrix();
      for (std::size_t i = 1; i < mats.size(); ++i) w.array() *= mats[i]->matrix().array();
      terms = u0.cwiseProduct(w * u1);
    } else {
      Eigen::MatrixXd w = materialize(*mats[0]);
      for (std::size_t i = 1; i + 1 < mats.size(); ++i) w.array() *= materialize(*mats[i]).array();
      // sum_ab u0_a u1_b W_ab (F G^T)_ab = sum_ac F_ac ((u0 u1^T o W) G)_ac
      w = u0.asDiagonal() * w * u1.asDiagonal();
      const Eigen::MatrixXd wg = w * mats.back()->pair[1].get();
      terms = wg.cwiseProduct(mats.back()->pair[0].get()).colwise().sum();
    }
    if (!mats.empty()) total = pairwise_sum({terms.data(), static_cast<std::size_t>(terms.size())});
  } else {
    // General case: loop over every tuple of outer indices.
    std::vector<Eigen::Index> idx(k, 0);
    std::size_t count = 1;
    for (std::size_t i = 0; i < k; ++i) count *= static_cast<std::size_t>(n);
    std::vector<Eigen::MatrixXd> mats;
    for (const auto& t : tensors) {
      if (t.axes.size() == 2) mats.push_back(materialize(t));
    }
    double acc = 0.0;
    std::vector<double> chunks;
    for (std::size_t flat = 0; flat < count; ++flat) {
      double prod = 1.0;
      std::size_t mat_index = 0;
      for (const auto& t : tensors) {
        if (t.axes.size() == 1) {
          prod *= t.vec(idx[static_cast<std::size_t>(t.axes[0])]);
        } else if (t.axes.size() == 2) {
          prod *= mats[mat_index++](idx[static_cast<std::size_t>(t.axes[0])], idx[static_cast<std::size_t>(t.axes[1])]);
        } else {
          std::size_t off = 0;
          for (int a : t.axes) off = off * static_cast<std::size_t>(n) + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
          prod *= t.values[off];
        }
      }
      acc += prod;
      for (std::size_t f = k; f-- > 0;) {
        if (++idx[f] < n) break;
        idx[f] = 0;
      }
      if (idx[k - 1] == 0) {  // flush one innermost row
        chunks.push_back(acc);
        acc = 0.0;
      }
    }
    total = pairwise_sum(chunks);
  }
  return total / norm;
}

ContractionPlan make_plan(const SubPartition& outer, const SubPartition& inner) {
  ContractionPlan plan;
  plan.outer = outer;
  plan.inner = inner;
  for (BlockMask c : plan.inner) {
    ContractionStep step{c, {}};
    for (std::size_t j = 0; j < plan.outer.size(); ++j) {
      const auto overlap = static_cast<BlockMask>(plan.outer[j] & c);
      if (overlap != 0) step.factors.emplace_back(static_cast<int>(j), overlap);
    }
    plan.steps.push_back(std::move(step));
  }
  plan.cost_exponent = static_cast<int>(plan.outer.size()) + 1;
  return plan;
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 64) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

ContractionPlan plan_contraction(const SubPartition& left, const SubPartition& right) {
  if (support(left) != support(right)) throw DimensionError("contraction over different variable sets");
  return right.size() < left.size() ? make_plan(right, left) : make_plan(left, right);
}

ContractionPlan plan_contraction(const Partition& left, const Partition& right) {
  if (left.d() != right.d()) throw DimensionError("plan_contraction: partitions over different d");
  if (left.has_singleton() || right.has_singleton()) {
    throw ContractViolation("centred contraction plans need singleton-free partitions");
  }
  return plan_contraction(to_sub(left), to_sub(right));
}

double evaluate_plan(const ContractionPlan& plan, const GramSet& grams) {
  std::vector<StepTensor> tensors;
  tensors.reserve(plan.steps.size());
  for (const auto& step : plan.steps) tensors.push_back(contract_step(step.factors, grams));
  return reduce_steps(tensors, plan.outer.size(), plan.inner.size(), grams.n());
}

InnerProductCache::InnerProductCache(const InnerProductCache& other) {
  std::shared_lock lock(other.mutex_);
  entries_ = other.entries_;
}

InnerProductCache& InnerProductCache::operator=(const InnerProductCache& other) {
  if (this != &other) {
    std::map<Key, double> copy;
    {
      std::shared_lock lock(other.mutex_);
      copy = other.entries_;
    }
    std::unique_lock lock(mutex_);
    entries_ = std::move(copy);
  }
  return *this;
}

std::optional<double> InnerProductCache::find(const Key& key) const {
  std::shared_lock lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void InnerProductCache::insert(const Key& key, double value) {
  std::unique_lock lock(mutex_);
  entries_.emplace(key, value);
}

std::size_t InnerProductCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void InnerProductCache::clear() {
  std::unique_lock lock(mutex_);
  entries_.clear();
}

InnerProductCache InnerProductCache::invariant_under(BlockMask permuted) const {
  InnerProductCache out;
  std::shared_lock lock(mutex_);
  for (const auto& [key, value] : entries_) {
    const BlockMask subset = std::get<0>(key);
    if ((subset & permuted) == subset || (subset & permuted) == 0) out.entries_.emplace(key, value);
  }
  return out;
}

InnerProductCache::Key InnerProductCache::make_key(BlockMask subset, SubPartition left, SubPartition right) {
  if (right < left) std::swap(left, right);
  return {subset, std::move(left), std::move(right)};
}

namespace {

double inner_product_sub(const SubPartition& left, const SubPartition& right, const GramSet& grams,
                         InnerProductCache& cache) {
  const auto components = join_components(left, right);
  if (components.size() == 1) {
    const auto key = InnerProductCache::make_key(components[0], left, right);
    if (auto hit = cache.find(key)) return *hit;
    const double v = evaluate_plan(plan_contraction(left, right), grams);
    cache.insert(key, v);
    return v;
  }
  double prod = 1.0;
  for (BlockMask j : components) prod *= inner_product_sub(restrict_to(left, j), restrict_to(right, j), grams, cache);
  return prod;
}

void require_centred(const GramSet& grams, const char* what) {
  if (!grams.centred) throw ContractViolation(std::string(what) + " requires centred Gram matrices");
  if (grams.d() < 2) throw ContractViolation(std::string(what) + " requires d >= 2");
}

}  // namespace

double cached_inner_product(const Partition& left, const Partition& right, const GramSet& grams,
                            InnerProductCache& cache) {
  if (left.d() != right.d() || left.d() != grams.d()) throw DimensionError("cached_inner_product: d mismatch");
  if (left.has_singleton() || right.has_singleton()) {
    throw ContractViolation("cached inner products are defined for singleton-free partitions");
  }
  return inner_product_sub(to_sub(left), to_sub(right), grams, cache);
}

namespace {

// Pair terms grow like F_d^2 / 2; past this the term table alone needs gigabytes.
constexpr double kMaxProductTerms = 1e7;

std::vector<ProductTerm> guarded_product_terms(const SignedExpansion& e) {
  const auto m = static_cast<double>(e.terms.size());
  if (m * (m + 1.0) / 2.0 > kMaxProductTerms) {
    throw ResourceError("Streitberg statistic at d = " + std::to_string(e.d) + " needs " +
                        std::to_string(static_cast<long long>(m * (m + 1.0) / 2.0)) + " inner products");
  }
  return product_terms(e);
}

}  // namespace

StreitbergEvaluator::StreitbergEvaluator(int d)
    : d_(d), terms_(guarded_product_terms(expansion_for(LatticeKind::streitberg(), d, true))) {}

double StreitbergEvaluator::operator()(const GramSet& grams, InnerProductCache* cache) const {
  require_centred(grams, "streitberg_stat");
  if (grams.d() != d_) throw DimensionError("StreitbergEvaluator built for a different d");
  std::vector<double> contributions;
  contributions.reserve(terms_.size());
  for (const auto& t : terms_) {
    const double ip = cache ? inner_product_sub(to_sub(t.left), to_sub(t.right), grams, *cache)
                            : evaluate_plan(plan_contraction(t.left, t.right), grams);
    contributions.push_back(static_cast<double>(t.coefficient) * ip);
  }
  return pairwise_sum(contributions);
}

namespace {

enum class StepKind { Fixed, Gather, Recompute };

StepKind classify(const ContractionStep& step, BlockMask block) {
  BlockMask vars = 0;
  for (const auto& f : step.factors) vars |= f.second;
  if ((vars & block) == 0) return StepKind::Fixed;
  if ((vars & block) == vars && step.factors.size() <= 2) return StepKind::Gather;
  return StepKind::Recompute;
}

int recompute_cost(const ContractionPlan& plan, BlockMask block) {
  int cost = 0;
  for (const auto& step : plan.steps) {
    if (classify(step, block) == StepKind::Recompute) cost += step.factors.size() >= 2 ? 2 : 1;
  }
  return cost;
}

}  // namespace

struct BlockPermutationStreitberg::Impl {
  using Factors = std::vector<std::pair<int, BlockMask>>;

  struct Step {
    Factors factors;
    StepKind kind = StepKind::Fixed;
    std::size_t slot = 0;  // into `stored` unless recomputed
  };
  struct Component {
    bool constant = false;
    double value = 0.0;
    std::size_t k = 0;
    std::size_t inner = 0;
    std::vector<Step> steps;
  };
  struct Term {
    double coefficient = 0.0;
    std::vector<Component> components;
  };

  GramSet base;
  BlockMask block = 0;
  std::vector<Term> terms;
  std::vector<StepTensor> stored;  // evaluated on the unpermuted grams
  std::map<Factors, std::size_t> slots;
  std::size_t recomputed = 0;

  std::size_t store(const Factors& factors) {
    const auto it = slots.find(factors);
    if (it != slots.end()) return it->second;
    StepTensor t = contract_step(factors, base);
    if (t.lazy()) {
      t.owned = materialize(t);
      t.pair.clear();
    }
    stored.push_back(std::move(t));
    slots.emplace(factors, stored.size() - 1);
    return stored.size() - 1;
  }
};

BlockPermutationStreitberg::BlockPermutationStreitberg(const GramSet& centred, BlockMask block) {
  require_centred(centred, "BlockPermutationStreitberg");
  if (block == 0 || (block & ~full_mask(centred.d())) != 0) throw ParameterError("permuted block outside the variable set");
  auto impl = std::make_shared<Impl>();
  impl->base = centred;
  impl->block = block;
  std::set<Impl::Factors> recomputed;
  for (const auto& t : guarded_product_terms(expansion_for(LatticeKind::streitberg(), centred.d(), true))) {
    Impl::Term term;
    term.coefficient = static_cast<double>(t.coefficient);
    const SubPartition left = to_sub(t.left);
    const SubPartition right = to_sub(t.right);
    for (BlockMask subset : join_components(left, right)) {
      const SubPartition l = restrict_to(left, subset);
      const SubPartition r = restrict_to(right, subset);
      Impl::Component comp;
      if ((subset & block) == 0 || (subset & block) == subset) {
        // Permuting all or none of the variables leaves the factor unchanged.
        comp.constant = true;
        comp.value = evaluate_plan(plan_contraction(l, r), impl->base);
        term.components.push_back(std::move(comp));
        continue;
      }
      ContractionPlan plan = plan_contraction(l, r);
      if (l.size() == r.size()) {
        ContractionPlan flipped = make_plan(r, l);
        if (recompute_cost(flipped, block) < recompute_cost(plan, block)) plan = std::move(flipped);
      }
      comp.k = plan.outer.size();
      comp.inner = plan.inner.size();
      for (const auto& step : plan.steps) {
        Impl::Step st{step.factors, classify(step, block), 0};
        if (st.kind == StepKind::Recompute) {
          recomputed.insert(st.factors);
        } else {
          st.slot = impl->store(st.factors);
        }
        comp.steps.push_back(std::move(st));
      }
      term.components.push_back(std::move(comp));
    }
    impl->terms.push_back(std::move(term));
  }
  impl->recomputed = recomputed.size();
  impl_ = std::move(impl);
}

double BlockPermutationStreitberg::operator()(const std::vector<int>& perm) const {
  const Impl& im = *impl_;
  const Eigen::Index n = im.base.n();
  if (static_cast<Eigen::Index>(perm.size()) != n) throw DimensionError("permutation length differs from n");
  GramSet g = im.base;
  for (BlockMask m = im.block; m != 0; m &= static_cast<BlockMask>(m - 1)) {
    const auto i = static_cast<std::size_t>(lowest_index(m));
    g.matrices[i] = permute_gram(im.base.matrices[i], perm);
  }

  std::vector<std::optional<StepTensor>> gathered(im.stored.size());
  auto gather = [&](std::size_t slot) -> const StepTensor& {
    auto& cell = gathered[slot];
    if (!cell) {
      const StepTensor& src = im.stored[slot];
      StepTensor t;
      t.axes = src.axes;
      if (src.axes.size() == 1) {
        t.vec.resize(n);
        for (Eigen::Index a = 0; a < n; ++a) t.vec(a) = src.vec(perm[static_cast<std::size_t>(a)]);
      } else {
        t.owned = permute_gram(src.matrix(), perm);
      }
      cell = std::move(t);
    }
    return *cell;
  };

  std::vector<double> contributions;
  contributions.reserve(im.terms.size());
  for (const auto& term : im.terms) {
    double value = term.coefficient;
    for (const auto& comp : term.components) {
      if (comp.constant) {
        value *= comp.value;
        continue;
      }
      std::vector<StepTensor> tensors;
      tensors.reserve(comp.steps.size());
      for (const auto& st : comp.steps) {
        if (st.kind == StepKind::Recompute) {
          tensors.push_back(contract_step(st.factors, g));
          continue;
        }
        const StepTensor& src = st.kind == StepKind::Fixed ? im.stored[st.slot] : gather(st.slot);
        StepTensor t;
        t.axes = src.axes;
        if (src.axes.size() == 1) {
          t.vec = src.vec;
        } else {
          t.shared = &src.matrix();
        }
        tensors.push_back(std::move(t));
      }
      value *= reduce_steps(tensors, comp.k, comp.inner, n);
    }
    contributions.push_back(value);
  }
  return pairwise_sum(contributions);
}

std::size_t BlockPermutationStreitberg::recomputed_steps() const { return impl_->recomputed; }

double lancaster_stat(const GramSet& grams) {
  require_centred(grams, "lancaster_stat");
  Eigen::MatrixXd prod = grams[0];
  for (int i = 1; i < grams.d(); ++i) prod.array() *= grams[i].array();
  const auto n = static_cast<double>(grams.n());
  return pairwise_sum({prod.data(), static_cast<std::size_t>(prod.size())}) / (n * n);
}

double streitberg_stat(const GramSet& grams) {
  InnerProductCache cache;
  return streitberg_stat(grams, cache);
}

double streitberg_stat(const GramSet& grams, InnerProductCache& cache) {
  require_centred(grams, "streitberg_stat");
  return StreitbergEvaluator(grams.d())(grams, &cache);
}

double streitberg_stat_naive(const GramSet& grams) {
  require_centred(grams, "streitberg_stat_naive");
  return generic_norm(expansion_for(LatticeKind::streitberg(), grams.d(), true), grams);
}

double joint_independence_stat(const GramSet& grams) {
  if (grams.centred) throw ContractViolation("joint_independence_stat requires uncentred Gram matrices");
  const Eigen::Index n = grams.n();
  const auto nd = static_cast<double>(n);
  Eigen::MatrixXd prod = grams[0];
  Eigen::VectorXd row_prod = grams[0].rowwise().mean();
  double marginal_prod = grams[0].mean();
  for (int i = 1; i < grams.d(); ++i) {
    prod.array() *= grams[i].array();
    row_prod.array() *= grams[i].rowwise().mean().array();
    marginal_prod *= grams[i].mean();
  }
  const double joint = pairwise_sum({prod.data(), static_cast<std::size_t>(prod.size())}) / (nd * nd);
  const double cross = 2.0 * pairwise_sum({row_prod.data(), static_cast<std::size_t>(n)}) / nd;
  return joint + marginal_prod - cross;
}

double generalized_stat(const GramSet& grams, const Partition& pi_s) {
  require_centred(grams, "generalized_stat");
  if (pi_s.d() != grams.d()) throw DimensionError("generalized_stat: d mismatch");
  InnerProductCache cache;
  std::vector<double> contributions;
  for (const auto& t : guarded_product_terms(generalized_expansion(pi_s, true))) {
    contributions.push_back(static_cast<double>(t.coefficient) *
                            inner_product_sub(to_sub(t.left), to_sub(t.right), grams, cache));
  }
  return pairwise_sum(contributions);
}

double generic_norm(const SignedExpansion& expansion, const GramSet& grams) {
  if (expansion.d != grams.d()) throw DimensionError("generic_norm: expansion and grams disagree on d");
  const Eigen::Index n = grams.n();
  int max_blocks = 0;
  for (const auto& t : expansion.terms) max_blocks = std::max(max_blocks, t.partition.size());
  if (std::pow(static_cast<double>(n), 2.0 * max_blocks) > 1e8) {
    throw ResourceError("generic_norm: n^(2*" + std::to_string(max_blocks) + ") exceeds the 1e8 guard");
  }
  const int d = grams.d();

  auto brute = [&](const Partition& a, const Partition& b) {
    const int la = a.size();
    const int width = la + b.size();
    std::vector<int> row_slot(static_cast<std::size_t>(d));
    std::vector<int> col_slot(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      row_slot[static_cast<std::size_t>(i)] = a.block_of(i);
      col_slot[static_cast<std::size_t>(i)] = la + b.block_of(i);
    }
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(width), 0);
    std::vector<double> rows;
    double acc = 0.0;
    while (true) {
      double prod = 1.0;
      for (int i = 0; i < d; ++i) {
        prod *= grams[i](idx[static_cast<std::size_t>(row_slot[static_cast<std::size_t>(i)])],
                         idx[static_cast<std::size_t>(col_slot[static_cast<std::size_t>(i)])]);
      }
      acc += prod;
      int f = width - 1;
      for (; f >= 0; --f) {
        if (++idx[static_cast<std::size_t>(f)] < n) break;
        idx[static_cast<std::size_t>(f)] = 0;
      }
      if (f < width - 1) {
        rows.push_back(acc);
        acc = 0.0;
      }
      if (f < 0) break;
    }
    return pairwise_sum(rows) / std::pow(static_cast<double>(n), static_cast<double>(width));
  };

  std::vector<double> contributions;
  const auto& terms = expansion.terms;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    for (std::size_t j = i; j < terms.size(); ++j) {
      const double mult = (i == j) ? 1.0 : 2.0;
      contributions.push_back(mult * static_cast<double>(terms[i].coefficient * terms[j].coefficient) *
                              brute(terms[i].partition, terms[j].partition));
    }
  }
  return pairwise_sum(contributions);
}

}  // namespace hoi
