#include "bbfmm/octree.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bbfmm/errors.hpp"
#include "bbfmm/offsets.hpp"

namespace bbfmm {

namespace {

std::vector<Offset> make_offsets() {
  std::vector<Offset> out;
  out.reserve(kNumOffsets);
  for (int i = -3; i <= 3; ++i)
    for (int j = -3; j <= 3; ++j)
      for (int k = -3; k <= 3; ++k)
        if (std::max({std::abs(i), std::abs(j), std::abs(k)}) >= 2) out.push_back({i, j, k});
  return out;
}

std::array<int, 343> make_offset_lookup(const std::vector<Offset>& offsets) {
  std::array<int, 343> lookup{};
  lookup.fill(-1);
  for (std::size_t n = 0; n < offsets.size(); ++n) {
    const auto& o = offsets[n];
    lookup[static_cast<std::size_t>((o[0] + 3) * 49 + (o[1] + 3) * 7 + (o[2] + 3))] =
        static_cast<int>(n);
  }
  return lookup;
}

const std::vector<Offset>& offsets_storage() {
  static const std::vector<Offset> offsets = make_offsets();
  return offsets;
}

const std::array<int, 343>& offset_lookup() {
  static const std::array<int, 343> lookup = make_offset_lookup(offsets_storage());
  return lookup;
}

// Spread the low 10 bits of v so that bit b lands at 3b.
std::uint32_t spread_bits(std::uint32_t v) {
  v &= 0x3ffu;
  v = (v | (v << 16)) & 0x030000ffu;
  v = (v | (v << 8)) & 0x0300f00fu;
  v = (v | (v << 4)) & 0x030c30c3u;
  v = (v | (v << 2)) & 0x09249249u;
  return v;
}

std::uint32_t compact_bits(std::uint32_t v) {
  v &= 0x09249249u;
  v = (v | (v >> 2)) & 0x030c30c3u;
  v = (v | (v >> 4)) & 0x0300f00fu;
  v = (v | (v >> 8)) & 0x030000ffu;
  v = (v | (v >> 16)) & 0x3ffu;
  return v;
}

}  // namespace

std::span<const Offset> offset_set() { return offsets_storage(); }

int offset_index(int i, int j, int k) {
  if (std::abs(i) > 3 || std::abs(j) > 3 || std::abs(k) > 3) return -1;
  return offset_lookup()[static_cast<std::size_t>((i + 3) * 49 + (j + 3) * 7 + (k + 3))];
}

std::uint32_t morton_encode(int x, int y, int z) {
  return (spread_bits(static_cast<std::uint32_t>(x)) << 2) |
         (spread_bits(static_cast<std::uint32_t>(y)) << 1) |
         spread_bits(static_cast<std::uint32_t>(z));
}

std::array<int, 3> morton_decode(std::uint32_t code) {
  return {static_cast<int>(compact_bits(code >> 2)), static_cast<int>(compact_bits(code >> 1)),
          static_cast<int>(compact_bits(code))};
}

Octree::Octree(const Point3& center, double length, int levels)
    : center_(center), length_(length), levels_(levels) {
  if (levels < 2) {
    throw ConfigError("tree levels must be >= 2 (interaction lists are empty above level 2), got " +
                      std::to_string(levels));
  }
  if (levels > 10) throw ConfigError("tree levels must be <= 10");
  if (!(length > 0.0) || !std::isfinite(length)) throw ConfigError("domain length must be > 0");
  if (!center.finite()) throw ConfigError("domain center must be finite");

  cells_.resize(static_cast<std::size_t>(levels) + 1);
  const Point3 low = center - Point3{0.5 * length, 0.5 * length, 0.5 * length};
  for (int l = 0; l <= levels; ++l) {
    const int side = 1 << l;
    const double width = cell_width(l);
    auto& cells = cells_[static_cast<std::size_t>(l)];
    cells.resize(static_cast<std::size_t>(side) * side * side);
    for (std::uint32_t m = 0; m < cells.size(); ++m) {
      Cell& c = cells[m];
      c.level = l;
      c.index = m;
      c.coords = morton_decode(m);
      c.half_width = 0.5 * width;
      c.center = {low.x + (c.coords[0] + 0.5) * width, low.y + (c.coords[1] + 0.5) * width,
                  low.z + (c.coords[2] + 0.5) * width};
      c.parent = l == 0 ? -1 : static_cast<std::int64_t>(m / 8u);
    }
  }
  build_lists();
}

double Octree::cell_width(int level) const { return std::ldexp(length_, -level); }

std::size_t Octree::cell_count() const {
  std::size_t n = 0;
  for (const auto& lvl : cells_) n += lvl.size();
  return n;
}

void Octree::build_lists() {
  for (int l = 1; l <= levels_; ++l) {
    const int side = 1 << l;
    auto& cells = cells_[static_cast<std::size_t>(l)];
    for (Cell& c : cells) {
      for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
          for (int k = -1; k <= 1; ++k) {
            if (i == 0 && j == 0 && k == 0) continue;
            const int x = c.coords[0] + i, y = c.coords[1] + j, z = c.coords[2] + k;
            if (x < 0 || y < 0 || z < 0 || x >= side || y >= side || z >= side) continue;
            c.neighbors.push_back(morton_encode(x, y, z));
          }
      std::sort(c.neighbors.begin(), c.neighbors.end());
    }
  }

  for (int l = 2; l <= levels_; ++l) {
    auto& cells = cells_[static_cast<std::size_t>(l)];
    const auto& parents = cells_[static_cast<std::size_t>(l - 1)];
    for (Cell& c : cells) {
      const Cell& parent = parents[static_cast<std::size_t>(c.parent)];
      std::vector<std::pair<int, std::uint32_t>> found;
      auto visit = [&](std::uint32_t p) {
        for (std::uint32_t child = p * 8u; child < p * 8u + 8u; ++child) {
          const Cell& s = cells[child];
          const int off = relative_offset(c, s);
          if (off >= 0) found.emplace_back(off, child);
        }
      };
      visit(parent.index);
      for (std::uint32_t p : parent.neighbors) visit(p);
      std::sort(found.begin(), found.end());
      c.interactions.reserve(found.size());
      for (const auto& f : found) c.interactions.push_back(f.second);
    }
  }
}

int Octree::relative_offset(const Cell& target, const Cell& source) {
  return offset_index(source.coords[0] - target.coords[0], source.coords[1] - target.coords[1],
                      source.coords[2] - target.coords[2]);
}

std::array<int, 3> Octree::leaf_coords(const Point3& p) const {
  const int side = 1 << levels_;
  const double width = cell_width(levels_);
  std::array<int, 3> out{};
  for (int a = 0; a < 3; ++a) {
    const double low = center_[a] - 0.5 * length_;
    const int idx = static_cast<int>(std::floor((p[a] - low) / width));
    out[static_cast<std::size_t>(a)] = std::clamp(idx, 0, side - 1);
  }
  return out;
}

namespace {

void check_inside(const Octree& tree, std::span<const Point3> pts, const char* what) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point3& p = pts[i];
    bool inside = p.finite();
    for (int a = 0; a < 3 && inside; ++a) {
      const double low = tree.center()[a] - 0.5 * tree.length();
      const double high = tree.center()[a] + 0.5 * tree.length();
      inside = p[a] >= low && p[a] <= high;
    }
    if (!inside) {
      std::ostringstream msg;
      msg.precision(17);
      msg << what << " point " << i << " at " << p << " lies outside the domain (center "
          << tree.center() << ", length " << tree.length() << ")";
      throw DomainError(msg.str());
    }
  }
}

// Counting sort of points by leaf Morton code; returns sorted position -> original index and
// writes per-leaf [begin, end) ranges through `set_range`.
template <typename SetRange>
std::vector<std::size_t> sort_into_leaves(const Octree& tree, std::span<const Point3> pts,
                                          std::size_t n_leaves, SetRange set_range) {
  std::vector<std::uint32_t> code(pts.size());
  std::vector<std::size_t> count(n_leaves + 1, 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto c = tree.leaf_coords(pts[i]);
    code[i] = morton_encode(c[0], c[1], c[2]);
    ++count[code[i] + 1];
  }
  for (std::size_t m = 0; m < n_leaves; ++m) count[m + 1] += count[m];
  for (std::size_t m = 0; m < n_leaves; ++m) set_range(m, count[m], count[m + 1]);
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) order[count[code[i]]++] = i;
  return order;
}

}  // namespace

void Octree::distribute_points(std::span<const Point3> sources, std::span<const Point3> targets) {
  check_inside(*this, sources, "source");
  check_inside(*this, targets, "target");

  auto& leaf_cells = cells_[static_cast<std::size_t>(levels_)];
  source_order_ = sort_into_leaves(*this, sources, leaf_cells.size(),
                                   [&](std::size_t m, std::size_t b, std::size_t e) {
                                     leaf_cells[m].source_begin = b;
                                     leaf_cells[m].source_end = e;
                                   });
  target_order_ = sort_into_leaves(*this, targets, leaf_cells.size(),
                                   [&](std::size_t m, std::size_t b, std::size_t e) {
                                     leaf_cells[m].target_begin = b;
                                     leaf_cells[m].target_end = e;
                                   });

  for (int l = levels_ - 1; l >= 0; --l) {
    auto& cells = cells_[static_cast<std::size_t>(l)];
    const auto& children = cells_[static_cast<std::size_t>(l + 1)];
    for (Cell& c : cells) {
      const Cell& first = children[c.first_child()];
      const Cell& last = children[c.first_child() + 7];
      c.source_begin = first.source_begin;
      c.source_end = last.source_end;
      c.target_begin = first.target_begin;
      c.target_end = last.target_end;
    }
  }
  for (auto& lvl : cells_)
    for (Cell& c : lvl) {
      c.multipole.resize(0, 0);
      c.local.resize(0, 0);
    }
}

std::span<const std::size_t> Octree::source_indices(const Cell& cell) const {
  return std::span<const std::size_t>(source_order_).subspan(cell.source_begin, cell.source_count());
}

std::span<const std::size_t> Octree::target_indices(const Cell& cell) const {
  return std::span<const std::size_t>(target_order_).subspan(cell.target_begin, cell.target_count());
}

Octree build_tree(const Point3& domain_center, double domain_length, int levels) {
  return Octree(domain_center, domain_length, levels);
}

}  // namespace bbfmm
