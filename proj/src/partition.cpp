#include "hoi/partition.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <numeric>

#include "hoi/error.hpp"

namespace hoi {

int popcount(BlockMask m) { return std::popcount(static_cast<unsigned>(m)); }

int lowest_index(BlockMask m) { return std::countr_zero(static_cast<unsigned>(m)); }

namespace {

void check_d(int d) {
  if (d < 1 || d > kMaxVariables) {
    throw BoundsError("number of variables must be in [1, " + std::to_string(kMaxVariables) +
                      "], got " + std::to_string(d));
  }
}

void check_same_d(const Partition& a, const Partition& b) {
  if (a.d() != b.d()) {
    throw DimensionError("partitions over different variable counts (" + std::to_string(a.d()) +
                         " vs " + std::to_string(b.d()) + ")");
  }
}

// Lexicographic comparison of two blocks read as ascending index lists.
int compare_blocks(BlockMask a, BlockMask b) {
  while (a != 0 && b != 0) {
    const int ia = lowest_index(a);
    const int ib = lowest_index(b);
    if (ia != ib) return ia < ib ? -1 : 1;
    a &= static_cast<BlockMask>(a - 1);
    b &= static_cast<BlockMask>(b - 1);
  }
  if (a == b) return 0;
  return a == 0 ? -1 : 1;
}

}  // namespace

Partition Partition::from_masks(int d, std::span<const BlockMask> masks) {
  check_d(d);
  if (masks.empty() || masks.size() > static_cast<std::size_t>(d)) {
    throw InputError("a partition of " + std::to_string(d) + " variables needs 1.." +
                     std::to_string(d) + " blocks");
  }
  BlockMask seen = 0;
  for (BlockMask m : masks) {
    if (m == 0) throw InputError("empty block in partition");
    if ((m & ~full_mask(d)) != 0) throw InputError("block index exceeds number of variables");
    if ((seen & m) != 0) throw InputError("blocks of a partition must be disjoint");
    seen |= m;
  }
  if (seen != full_mask(d)) throw InputError("blocks do not cover every variable");

  Partition p;
  p.d_ = static_cast<std::uint8_t>(d);
  p.size_ = static_cast<std::uint8_t>(masks.size());
  std::copy(masks.begin(), masks.end(), p.blocks_.begin());
  std::sort(p.blocks_.begin(), p.blocks_.begin() + p.size_,
            [](BlockMask a, BlockMask b) { return lowest_index(a) < lowest_index(b); });
  return p;
}

Partition Partition::from_blocks(int d, const std::vector<std::vector<int>>& blocks) {
  std::vector<BlockMask> masks;
  masks.reserve(blocks.size());
  for (const auto& block : blocks) {
    BlockMask m = 0;
    for (int idx : block) {
      if (idx < 1 || idx > d) throw InputError("variable index " + std::to_string(idx) + " out of range");
      const auto bit = static_cast<BlockMask>(1u << (idx - 1));
      if ((m & bit) != 0) throw InputError("duplicate index within block");
      m |= bit;
    }
    masks.push_back(m);
  }
  return from_masks(d, masks);
}

Partition Partition::from_blocks(int d, std::initializer_list<std::initializer_list<int>> blocks) {
  std::vector<std::vector<int>> v;
  for (const auto& b : blocks) v.emplace_back(b);
  return from_blocks(d, v);
}

Partition Partition::finest(int d) {
  check_d(d);
  std::vector<BlockMask> masks;
  for (int i = 0; i < d; ++i) masks.push_back(static_cast<BlockMask>(1u << i));
  return from_masks(d, masks);
}

Partition Partition::coarsest(int d) {
  check_d(d);
  const BlockMask all = full_mask(d);
  return from_masks(d, std::span<const BlockMask>(&all, 1));
}

Partition Partition::parse(std::string_view text) {
  std::vector<std::vector<int>> blocks;
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) {
    throw InputError("cannot parse partition '" + std::string(text) + "': " + why);
  };
  while (pos <= text.size()) {
    std::vector<int> block;
    if (pos < text.size() && text[pos] == '{') {
      ++pos;
      while (true) {
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (start == pos) fail("expected index");
        block.push_back(std::stoi(std::string(text.substr(start, pos - start))));
        if (pos >= text.size()) fail("unterminated brace");
        if (text[pos] == ',') {
          ++pos;
          continue;
        }
        if (text[pos] == '}') {
          ++pos;
          break;
        }
        fail("unexpected character");
      }
    } else {
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        block.push_back(text[pos] - '0');
        ++pos;
      }
      if (block.empty()) fail("empty block");
    }
    blocks.push_back(std::move(block));
    if (pos == text.size()) break;
    if (text[pos] != '|') fail("expected '|'");
    ++pos;
  }
  int d = 0;
  for (const auto& b : blocks) d += static_cast<int>(b.size());
  check_d(d);
  return from_blocks(d, blocks);
}

std::vector<int> Partition::block_indices(int i) const {
  std::vector<int> out;
  for (BlockMask m = block(i); m != 0; m &= static_cast<BlockMask>(m - 1)) out.push_back(lowest_index(m) + 1);
  return out;
}

int Partition::block_of(int var) const {
  const auto bit = static_cast<BlockMask>(1u << var);
  for (int i = 0; i < size_; ++i) {
    if ((blocks_[static_cast<std::size_t>(i)] & bit) != 0) return i;
  }
  throw BoundsError("variable " + std::to_string(var + 1) + " not in partition");
}

bool Partition::has_singleton() const {
  return std::any_of(blocks().begin(), blocks().end(), [](BlockMask m) { return popcount(m) == 1; });
}

int Partition::non_singleton_blocks() const {
  return static_cast<int>(std::count_if(blocks().begin(), blocks().end(),
                                        [](BlockMask m) { return popcount(m) > 1; }));
}

std::string Partition::to_string() const {
  std::string out;
  for (int i = 0; i < size_; ++i) {
    if (i > 0) out += '|';
    const auto idx = block_indices(i);
    if (d_ <= 9) {
      for (int v : idx) out += static_cast<char>('0' + v);
    } else {
      out += '{';
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (k > 0) out += ',';
        out += std::to_string(idx[k]);
      }
      out += '}';
    }
  }
  return out;
}

bool enumeration_less(const Partition& a, const Partition& b) {
  if (a.d() != b.d()) return a.d() < b.d();
  if (a.size() != b.size()) return a.size() > b.size();
  for (int i = 0; i < a.size(); ++i) {
    const int c = compare_blocks(a.block(i), b.block(i));
    if (c != 0) return c < 0;
  }
  return false;
}

bool refines(const Partition& sigma, const Partition& pi) {
  check_same_d(sigma, pi);
  for (BlockMask s : sigma.blocks()) {
    const bool inside = std::any_of(pi.blocks().begin(), pi.blocks().end(),
                                    [s](BlockMask p) { return (s & p) == s; });
    if (!inside) return false;
  }
  return true;
}

Partition meet(const Partition& sigma, const Partition& pi) {
  check_same_d(sigma, pi);
  std::vector<BlockMask> masks;
  for (BlockMask s : sigma.blocks()) {
    for (BlockMask p : pi.blocks()) {
      if ((s & p) != 0) masks.push_back(static_cast<BlockMask>(s & p));
    }
  }
  return Partition::from_masks(sigma.d(), masks);
}

Partition join(const Partition& sigma, const Partition& pi) {
  check_same_d(sigma, pi);
  // Connected components of the union of the two co-membership relations.
  std::vector<BlockMask> merged(sigma.blocks().begin(), sigma.blocks().end());
  for (BlockMask p : pi.blocks()) {
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
  return Partition::from_masks(sigma.d(), merged);
}

std::size_t hash_value(const Partition& p) {
  std::size_t h = static_cast<std::size_t>(p.d()) * 0x9e3779b97f4a7c15ULL;
  for (BlockMask m : p.blocks()) h = (h ^ m) * 0x100000001b3ULL;
  return h;
}

}  // namespace hoi
