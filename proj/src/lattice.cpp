#include "hoi/lattice.hpp"

#include <algorithm>
#include <unordered_set>

#include "hoi/error.hpp"

namespace hoi {

namespace {

void check_range(int d, int lo, int hi, const char* what) {
  if (d < lo || d > hi) {
    throw BoundsError(std::string(what) + ": d must be in [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "], got " + std::to_string(d));
  }
}

// Restricted growth strings; labels[i] is the block of variable i.
void enumerate_rgs(int d, int pos, int blocks, std::array<BlockMask, kMaxVariables>& masks,
                   std::vector<Partition>& out) {
  if (pos == d) {
    out.push_back(Partition::from_masks(d, std::span<const BlockMask>(masks.data(), static_cast<std::size_t>(blocks))));
    return;
  }
  const auto bit = static_cast<BlockMask>(1u << pos);
  for (int b = 0; b <= blocks; ++b) {
    masks[static_cast<std::size_t>(b)] |= bit;
    enumerate_rgs(d, pos + 1, std::max(blocks, b + 1), masks, out);
    masks[static_cast<std::size_t>(b)] &= static_cast<BlockMask>(~bit);
  }
}

// Places a partition of {0..m-1} onto the variables of `block`.
BlockMask spread(BlockMask local, BlockMask block) {
  BlockMask out = 0;
  int k = 0;
  for (BlockMask m = block; m != 0; m &= static_cast<BlockMask>(m - 1), ++k) {
    if ((local >> k) & 1u) out |= static_cast<BlockMask>(1u << lowest_index(m));
  }
  return out;
}

std::int64_t lancaster_coefficient(const Partition& p) {
  const int d = p.d();
  const auto sign = [](int e) { return (e % 2 == 0) ? std::int64_t{1} : std::int64_t{-1}; };
  if (p.is_finest()) return sign(d - 1) * (d - 1);
  for (BlockMask m : p.blocks()) {
    if (popcount(m) > 1) return sign(d - popcount(m));
  }
  return 0;
}

void sort_terms(SignedExpansion& e) {
  std::sort(e.terms.begin(), e.terms.end(),
            [](const SignedTerm& a, const SignedTerm& b) { return enumeration_less(a.partition, b.partition); });
}

}  // namespace

LatticeKind LatticeKind::interval(const Partition& lower, const Partition& upper) {
  if (!refines(lower, upper)) {
    throw InputError("interval lower bound " + lower.to_string() + " does not refine " + upper.to_string());
  }
  return {Tag::Interval, lower, upper};
}

const char* to_string(LatticeKind::Tag tag) {
  switch (tag) {
    case LatticeKind::Tag::Streitberg: return "streitberg";
    case LatticeKind::Tag::Lancaster: return "lancaster";
    case LatticeKind::Tag::JointIndependence: return "joint";
    case LatticeKind::Tag::Interval: return "interval";
  }
  return "?";
}

std::int64_t SignedExpansion::coefficient_sum() const {
  std::int64_t s = 0;
  for (const auto& t : terms) s += t.coefficient;
  return s;
}

std::int64_t SignedExpansion::coefficient_of(const Partition& p) const {
  for (const auto& t : terms) {
    if (t.partition == p) return t.coefficient;
  }
  return 0;
}

std::uint64_t factorial(int k) {
  std::uint64_t f = 1;
  for (int i = 2; i <= k; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

std::uint64_t bell_number(int d) {
  // Bell triangle.
  std::vector<std::uint64_t> row{1};
  for (int i = 1; i <= d; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (std::uint64_t v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

std::int64_t streitberg_coefficient(int blocks) {
  const auto magnitude = static_cast<std::int64_t>(factorial(blocks - 1));
  return (blocks - 1) % 2 == 0 ? magnitude : -magnitude;
}

std::vector<Partition> enumerate_partitions(int d) {
  check_range(d, 1, kMaxVariables, "enumerate_partitions");
  std::vector<Partition> out;
  out.reserve(static_cast<std::size_t>(bell_number(d)));
  std::array<BlockMask, kMaxVariables> masks{};
  enumerate_rgs(d, 0, 0, masks, out);
  std::sort(out.begin(), out.end(), EnumerationLess{});
  return out;
}

std::vector<Partition> enumerate_no_singleton(int d) {
  check_range(d, 2, kMaxVariables, "enumerate_no_singleton");
  auto all = enumerate_partitions(d);
  std::erase_if(all, [](const Partition& p) { return p.has_singleton(); });
  return all;
}

std::vector<Partition> lattice_elements(const LatticeKind& kind, int d) {
  switch (kind.tag) {
    case LatticeKind::Tag::Streitberg:
      return enumerate_partitions(d);
    case LatticeKind::Tag::Lancaster: {
      auto all = enumerate_partitions(d);
      std::erase_if(all, [](const Partition& p) { return p.non_singleton_blocks() > 1; });
      return all;
    }
    case LatticeKind::Tag::JointIndependence:
      check_range(d, 1, kMaxVariables, "lattice_elements");
      if (d == 1) return {Partition::finest(1)};
      return {Partition::finest(d), Partition::coarsest(d)};
    case LatticeKind::Tag::Interval: {
      if (kind.upper.d() != d) throw DimensionError("interval bounds do not match d");
      auto all = enumerate_partitions(d);
      std::erase_if(all, [&](const Partition& p) { return !refines(kind.lower, p) || !refines(p, kind.upper); });
      return all;
    }
  }
  return {};
}

IntMatrix zeta_matrix(const std::vector<Partition>& elements) {
  std::unordered_set<Partition> seen;
  for (const auto& e : elements) {
    if (!seen.insert(e).second) throw InputError("duplicate lattice element " + e.to_string());
  }
  const auto n = static_cast<Eigen::Index>(elements.size());
  IntMatrix z = IntMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      z(i, j) = refines(elements[static_cast<std::size_t>(i)], elements[static_cast<std::size_t>(j)]) ? 1 : 0;
    }
  }
  return z;
}

IntMatrix mobius_matrix(const std::vector<Partition>& elements) {
  const IntMatrix z = zeta_matrix(elements);
  const auto n = z.rows();
  // Visit columns finer-first so every rho < pi is finished before pi.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return elements[static_cast<std::size_t>(a)].size() > elements[static_cast<std::size_t>(b)].size();
  });

  IntMatrix mu = IntMatrix::Zero(n, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    for (std::size_t pj = 0; pj < order.size(); ++pj) {
      const Eigen::Index p = order[pj];
      if (z(s, p) == 0) continue;
      if (p == s) {
        mu(s, p) = 1;
        continue;
      }
      std::int64_t acc = 0;
      for (std::size_t rj = 0; rj < pj; ++rj) {
        const Eigen::Index r = order[rj];
        if (r != p && z(s, r) != 0 && z(r, p) != 0) acc += mu(s, r);
      }
      mu(s, p) = -acc;
    }
  }
  return mu;
}

std::vector<std::int64_t> mobius_to_top(const std::vector<Partition>& elements, const Partition& top) {
  const std::size_t n = elements.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  // Coarser first: every rho above x is settled before x.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return elements[a].size() < elements[b].size(); });
  std::vector<std::int64_t> mu(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t x = order[k];
    if (!refines(elements[x], top)) continue;
    if (elements[x] == top) {
      mu[x] = 1;
      continue;
    }
    std::int64_t acc = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t r = order[j];
      if (mu[r] != 0 && elements[r] != elements[x] && refines(elements[x], elements[r])) acc += mu[r];
    }
    mu[x] = -acc;
  }
  return mu;
}

SignedExpansion expansion_for(const LatticeKind& kind, int d, bool centred) {
  check_range(d, 2, kMaxVariables, "expansion_for");
  SignedExpansion e{d, {}};
  switch (kind.tag) {
    case LatticeKind::Tag::Streitberg: {
      const auto parts = centred ? enumerate_no_singleton(d) : enumerate_partitions(d);
      for (const auto& p : parts) e.terms.push_back({streitberg_coefficient(p.size()), p});
      return e;
    }
    case LatticeKind::Tag::Lancaster:
      if (centred) {
        e.terms.push_back({1, Partition::coarsest(d)});
        return e;
      }
      for (const auto& p : lattice_elements(kind, d)) e.terms.push_back({lancaster_coefficient(p), p});
      return e;
    case LatticeKind::Tag::JointIndependence:
      if (centred) {
        throw UnsupportedError("joint independence has no reduced expansion for centred kernels");
      }
      e.terms.push_back({-1, Partition::finest(d)});
      e.terms.push_back({1, Partition::coarsest(d)});
      return e;
    case LatticeKind::Tag::Interval: {
      if (kind.upper.d() != d) throw DimensionError("interval bounds do not match d");
      if (centred) {
        if (!kind.lower.is_finest() || kind.upper.has_singleton()) {
          throw UnsupportedError("centred expansion needs an interval [0̂, π] with singleton-free π");
        }
        return generalized_expansion(kind.upper, true);
      }
      const auto elems = lattice_elements(kind, d);
      const auto mu = mobius_to_top(elems, kind.upper);
      for (std::size_t i = 0; i < elems.size(); ++i) {
        if (mu[i] != 0) e.terms.push_back({mu[i], elems[i]});
      }
      return e;
    }
  }
  return e;
}

std::vector<Partition> second_level(const LatticeKind& kind, int d) {
  check_range(d, 2, kMaxVariables, "second_level");
  std::vector<Partition> out;
  const BlockMask all = full_mask(d);
  switch (kind.tag) {
    case LatticeKind::Tag::Streitberg:
      for (unsigned m = 1; m < all; m += 2) {  // masks holding variable 1
        const std::array<BlockMask, 2> masks{static_cast<BlockMask>(m), static_cast<BlockMask>(all ^ m)};
        out.push_back(Partition::from_masks(d, masks));
      }
      std::sort(out.begin(), out.end(), EnumerationLess{});
      return out;
    case LatticeKind::Tag::Lancaster:
      for (int i = 0; i < d; ++i) {
        const auto single = static_cast<BlockMask>(1u << i);
        const std::array<BlockMask, 2> masks{single, static_cast<BlockMask>(all ^ single)};
        out.push_back(Partition::from_masks(d, masks));
      }
      return out;
    case LatticeKind::Tag::JointIndependence:
      out.push_back(Partition::finest(d));
      return out;
    case LatticeKind::Tag::Interval:
      for (const auto& p : lattice_elements(kind, d)) {
        if (p.size() == kind.upper.size() + 1) out.push_back(p);
      }
      return out;
  }
  return out;
}

std::vector<ProductTerm> product_terms(const SignedExpansion& expansion) {
  std::vector<ProductTerm> out;
  const auto& t = expansion.terms;
  for (std::size_t i = 0; i < t.size(); ++i) {
    out.push_back({t[i].coefficient * t[i].coefficient, t[i].partition, t[i].partition});
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      out.push_back({2 * t[i].coefficient * t[j].coefficient, t[i].partition, t[j].partition});
    }
  }
  return out;
}

std::vector<Partition> prune_candidates(const std::vector<Partition>& rejected, int d) {
  for (const auto& r : rejected) {
    if (r.d() != d) throw DimensionError("rejected partition " + r.to_string() + " is not over d variables");
  }
  auto all = enumerate_partitions(d);
  std::erase_if(all, [&](const Partition& p) {
    return std::any_of(rejected.begin(), rejected.end(), [&](const Partition& r) { return refines(p, r); });
  });
  return all;
}

SignedExpansion generalized_expansion(const Partition& pi_s, bool centred) {
  if (pi_s.has_singleton()) {
    throw InputError("generalised interaction needs blocks of size >= 2, got " + pi_s.to_string());
  }
  const int d = pi_s.d();
  // Start from the single empty factor and multiply in one block at a time.
  struct Partial {
    std::int64_t coefficient;
    std::vector<BlockMask> masks;
  };
  std::vector<Partial> acc{{1, {}}};
  for (BlockMask block : pi_s.blocks()) {
    const int m = popcount(block);
    const auto local = centred ? enumerate_no_singleton(m) : enumerate_partitions(m);
    std::vector<Partial> next;
    for (const auto& a : acc) {
      for (const auto& q : local) {
        Partial p = a;
        p.coefficient *= streitberg_coefficient(q.size());
        for (BlockMask lb : q.blocks()) p.masks.push_back(spread(lb, block));
        next.push_back(std::move(p));
      }
    }
    acc = std::move(next);
  }
  SignedExpansion e{d, {}};
  for (const auto& a : acc) e.terms.push_back({a.coefficient, Partition::from_masks(d, a.masks)});
  sort_terms(e);
  return e;
}

}  // namespace hoi
