#include "itnumm/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "itnumm/error.hpp"

namespace itnumm {

CellList::CellList(std::span<const double> points, int D, double cell_size)
    : points_(points), D_(D), cell_(cell_size) {
  if (D < 1) throw ConfigError("CellList: dimension must be >= 1");
  if (!(cell_size > 0) || !std::isfinite(cell_size))
    throw ConfigError("CellList: cell size must be finite and > 0");
  const std::size_t n = points.size() / D;
  origin_.assign(D, std::numeric_limits<double>::infinity());
  std::vector<double> upper(D, -std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < n; ++j)
    for (int l = 0; l < D; ++l) {
      origin_[l] = std::min(origin_[l], points[j * D + l]);
      upper[l] = std::max(upper[l], points[j * D + l]);
    }
  extent_.resize(D);
  stride_.resize(D);
  std::int64_t stride = 1;
  for (int l = 0; l < D; ++l) {
    if (n == 0) origin_[l] = upper[l] = 0.0;
    extent_[l] = static_cast<std::int64_t>(std::floor((upper[l] - origin_[l]) / cell_)) + 1;
    stride_[l] = stride;
    if (stride > std::numeric_limits<std::int64_t>::max() / (extent_[l] + 1))
      throw ConfigError("CellList: cell grid too fine for 64-bit keys");
    stride *= extent_[l];
  }
  std::vector<std::int64_t> keys(n);
  std::vector<std::int64_t> cell(D);
  for (std::size_t j = 0; j < n; ++j) {
    for (int l = 0; l < D; ++l)
      cell[l] = static_cast<std::int64_t>(std::floor((points[j * D + l] - origin_[l]) / cell_));
    keys[j] = cell_key(cell);
  }
  sorted_index_.resize(n);
  std::iota(sorted_index_.begin(), sorted_index_.end(), 0u);
  std::stable_sort(sorted_index_.begin(), sorted_index_.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return keys[a] < keys[b]; });
  sorted_keys_.resize(n);
  for (std::size_t i = 0; i < n; ++i) sorted_keys_[i] = keys[sorted_index_[i]];
}

std::int64_t CellList::cell_key(const std::vector<std::int64_t>& cell) const {
  std::int64_t key = 0;
  for (int l = 0; l < D_; ++l) key += cell[l] * stride_[l];
  return key;
}

void CellList::collect(std::span<const double> q, double radius,
                       std::vector<std::uint32_t>& out) const {
  out.clear();
  if (radius > cell_ * (1 + 1e-12))
    throw ConfigError("CellList: query radius exceeds cell size");
  const double r2 = radius * radius;
  std::vector<std::int64_t> center(D_), cell(D_);
  for (int l = 0; l < D_; ++l)
    center[l] = static_cast<std::int64_t>(std::floor((q[l] - origin_[l]) / cell_));

  // Odometer over the 3^D neighbouring cells.
  std::vector<int> offset(D_, -1);
  while (true) {
    bool inside = true;
    for (int l = 0; l < D_; ++l) {
      cell[l] = center[l] + offset[l];
      inside = inside && cell[l] >= 0 && cell[l] < extent_[l];
    }
    if (inside) {
      const std::int64_t key = cell_key(cell);
      auto [lo, hi] = std::equal_range(sorted_keys_.begin(), sorted_keys_.end(), key);
      for (auto it = lo; it != hi; ++it) {
        const std::uint32_t k = sorted_index_[static_cast<std::size_t>(it - sorted_keys_.begin())];
        if (sq_distance(q, k) <= r2) out.push_back(k);
      }
    }
    int l = 0;
    while (l < D_ && offset[l] == 1) offset[l++] = -1;
    if (l == D_) break;
    ++offset[l];
  }
  std::sort(out.begin(), out.end());
}

}  // namespace itnumm
