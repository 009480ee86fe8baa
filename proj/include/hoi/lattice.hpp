#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include <Eigen/Core>

#include "hoi/partition.hpp"

namespace hoi {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Which lattice of factorisations an interaction measure is inverted over.
struct LatticeKind {
  enum class Tag { Streitberg, Lancaster, JointIndependence, Interval };

  Tag tag = Tag::Streitberg;
  Partition lower;  // Interval only
  Partition upper;  // Interval only

  static LatticeKind streitberg() { return {Tag::Streitberg, {}, {}}; }
  static LatticeKind lancaster() { return {Tag::Lancaster, {}, {}}; }
  static LatticeKind joint_independence() { return {Tag::JointIndependence, {}, {}}; }
  /// Throws InputError unless lower ⪯ upper.
  static LatticeKind interval(const Partition& lower, const Partition& upper);

  bool operator==(const LatticeKind&) const = default;
};

const char* to_string(LatticeKind::Tag tag);

struct SignedTerm {
  std::int64_t coefficient = 0;
  Partition partition;

  bool operator==(const SignedTerm&) const = default;
};

/// A signed combination of factorisations, sum of c_π P_π.
struct SignedExpansion {
  int d = 0;
  std::vector<SignedTerm> terms;

  std::int64_t coefficient_sum() const;
  /// 0 when the partition does not appear.
  std::int64_t coefficient_of(const Partition& p) const;
};

struct ProductTerm {
  std::int64_t coefficient = 0;
  Partition left;
  Partition right;
};

std::uint64_t bell_number(int d);
std::uint64_t factorial(int k);

/// All B_d partitions of {1..d}, in enumeration order. 1 <= d <= 12.
std::vector<Partition> enumerate_partitions(int d);
/// The partitions with every block of size >= 2. d >= 2.
std::vector<Partition> enumerate_no_singleton(int d);

/// Elements of the lattice underlying `kind`, in enumeration order.
std::vector<Partition> lattice_elements(const LatticeKind& kind, int d);

IntMatrix zeta_matrix(const std::vector<Partition>& elements);
/// Möbius matrix via the recursion mu(s,p) = -sum_{s<=r<p} mu(s,r).
IntMatrix mobius_matrix(const std::vector<Partition>& elements);
/// mu(x, top) for every element x, where top is the unique maximum of `elements`.
std::vector<std::int64_t> mobius_to_top(const std::vector<Partition>& elements, const Partition& top);

/// (|π|-1)! (-1)^(|π|-1)
std::int64_t streitberg_coefficient(int blocks);

SignedExpansion expansion_for(const LatticeKind& kind, int d, bool centred);

/// Two-block partitions of the lattice; each is one sub-hypothesis.
std::vector<Partition> second_level(const LatticeKind& kind, int d);

std::vector<ProductTerm> product_terms(const SignedExpansion& expansion);

/// Candidate factorisations left after removing every refinement of a rejected partition.
std::vector<Partition> prune_candidates(const std::vector<Partition>& rejected, int d);

/// Möbius inversion over [0̂, pi_s]; equals the product of per-block Streitberg expansions.
/// With `centred`, keeps only the singleton-free terms.
SignedExpansion generalized_expansion(const Partition& pi_s, bool centred = false);

}  // namespace hoi
