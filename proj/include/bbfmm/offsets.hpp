#pragma once

#include <array>
#include <span>

namespace bbfmm {

using Offset = std::array<int, 3>;

/// Number of distinct far-field translation vectors between same-level cells:
/// all (i, j, k) with max(|i|, |j|, |k|) in {2, 3}, i.e. 7^3 - 3^3.
inline constexpr int kNumOffsets = 316;

/// The offsets in lexicographic (i, j, k) order over [-3, 3]^3. Because the
/// enumeration is point-symmetric, offset `n` and offset `kNumOffsets-1-n` are
/// negatives of each other.
std::span<const Offset> offset_set();

/// Position of (i, j, k) in offset_set(), or -1 if it is not a far-field offset.
int offset_index(int i, int j, int k);

constexpr int negated_offset(int index) { return kNumOffsets - 1 - index; }

}  // namespace bbfmm
