#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace itnumm {

// Uniform cell list over D-dimensional points for fixed-radius queries with
// radius <= cell size. Points are referenced, not copied.
class CellList {
 public:
  CellList(std::span<const double> points, int D, double cell_size);

  // Calls fn(index, squared_distance) for every point within `radius` of q,
  // in increasing index order.
  template <typename Fn>
  void for_each_within(std::span<const double> q, double radius, Fn&& fn) const {
    std::vector<std::uint32_t> found;
    collect(q, radius, found);
    for (std::uint32_t k : found) fn(k, sq_distance(q, k));
  }

  // Indices within radius of q, sorted ascending.
  void collect(std::span<const double> q, double radius,
               std::vector<std::uint32_t>& out) const;

  double sq_distance(std::span<const double> q, std::uint32_t k) const {
    double s = 0.0;
    const double* p = points_.data() + static_cast<std::size_t>(k) * D_;
    for (int l = 0; l < D_; ++l) {
      const double d = q[l] - p[l];
      s += d * d;
    }
    return s;
  }

  int dimension() const { return D_; }
  std::size_t size() const { return points_.size() / D_; }

 private:
  std::int64_t cell_key(const std::vector<std::int64_t>& cell) const;

  std::span<const double> points_;
  int D_;
  double cell_;
  std::vector<double> origin_;
  std::vector<std::int64_t> extent_;
  std::vector<std::int64_t> stride_;
  std::vector<std::int64_t> sorted_keys_;
  std::vector<std::uint32_t> sorted_index_;
};

}  // namespace itnumm
