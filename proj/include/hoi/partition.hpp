#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hoi {

// Bit i of a block mask stands for variable i+1.
using BlockMask = std::uint16_t;

inline constexpr int kMaxVariables = 12;

inline BlockMask full_mask(int d) { return static_cast<BlockMask>((1u << d) - 1u); }

int popcount(BlockMask m);
int lowest_index(BlockMask m);  // 0-based

/// A set partition of the variables {1..d}.
///
/// Always stored in canonical form: blocks are bit masks ordered by their
/// lowest member, so two partitions compare equal iff they are the same
/// set partition.
class Partition {
 public:
  Partition() = default;

  /// Builds from arbitrary-order masks; throws InputError unless the masks
  /// are nonempty, disjoint and cover {1..d}.
  static Partition from_masks(int d, std::span<const BlockMask> masks);
  /// 1-based index lists, e.g. {{1,2},{3,4}}.
  static Partition from_blocks(int d, const std::vector<std::vector<int>>& blocks);
  static Partition from_blocks(int d, std::initializer_list<std::initializer_list<int>> blocks);

  static Partition finest(int d);    // 0̂, all singletons
  static Partition coarsest(int d);  // 1̂, one block

  /// Accepts "12|34|5" (d <= 9) or "{1,2}|{10,11}". Block order is free.
  static Partition parse(std::string_view text);

  int d() const { return d_; }
  int size() const { return size_; }
  std::span<const BlockMask> blocks() const { return {blocks_.data(), static_cast<std::size_t>(size_)}; }
  BlockMask block(int i) const { return blocks_[static_cast<std::size_t>(i)]; }
  std::vector<int> block_indices(int i) const;  // 1-based, ascending

  /// Index of the block holding variable `var` (0-based).
  int block_of(int var) const;
  bool has_singleton() const;
  int non_singleton_blocks() const;
  bool is_finest() const { return size_ == d_; }
  bool is_coarsest() const { return size_ == 1; }

  std::string to_string() const;

  bool operator==(const Partition& other) const = default;

 private:
  std::uint8_t d_ = 0;
  std::uint8_t size_ = 0;
  std::array<BlockMask, kMaxVariables> blocks_{};
};

/// Deterministic enumeration order: more blocks first, then lexicographic
/// over the blocks viewed as ascending index lists.
bool enumeration_less(const Partition& a, const Partition& b);

struct EnumerationLess {
  bool operator()(const Partition& a, const Partition& b) const { return enumeration_less(a, b); }
};

/// sigma ⪯ pi: every block of sigma lies inside a block of pi.
bool refines(const Partition& sigma, const Partition& pi);
Partition meet(const Partition& sigma, const Partition& pi);
Partition join(const Partition& sigma, const Partition& pi);

std::size_t hash_value(const Partition& p);

}  // namespace hoi

template <>
struct std::hash<hoi::Partition> {
  std::size_t operator()(const hoi::Partition& p) const noexcept { return hoi::hash_value(p); }
};
