#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "zonn/error.hpp"
#include "zonn/random.hpp"
#include "zonn/types.hpp"

namespace zonn {

/// The scan zone B_inf(center, radius) intersected with [0,1]^d, stored as
/// per-component bounds lower_i = max(X_i - r, 0), upper_i = min(X_i + r, 1).
struct BallRegion {
  InputPoint center;
  double radius = 0;
  Vector lower;
  Vector upper;

  Eigen::Index dim() const { return center.size(); }
};

inline BallRegion make_region(const InputPoint& x, double radius) {
  require(radius >= 0 && !std::isnan(radius), ErrorKind::parameter, "radius must be non-negative");
  require(x.size() > 0, ErrorKind::shape, "empty input point");
  require(in_unit_cube(x), ErrorKind::domain, "region center outside [0, 1]^d");
  BallRegion region{x, radius, (x.array() - radius).cwiseMax(0.0).matrix(),
                    (x.array() + radius).cwiseMin(1.0).matrix()};
  if (radius >= 1) {
    region.lower.setZero();
    region.upper.setOnes();
  }
  return region;
}

/// Writes sample `index` of the region into `out`. Component j of sample i
/// consumes counter i*d + j of the stream, so the result depends only on
/// (stream, index) and never on how the index range is partitioned.
template <class Derived>
void sample_into(const BallRegion& region, const SeededStream& stream, std::uint64_t index,
                 Eigen::MatrixBase<Derived> const& out_) {
  auto& out = const_cast<Eigen::MatrixBase<Derived>&>(out_);
  const auto d = static_cast<std::uint64_t>(region.dim());
  for (Eigen::Index j = 0; j < region.dim(); ++j) {
    const double lo = region.lower(j);
    const double width = region.upper(j) - lo;
    // lo + width*u can round past the upper bound; clamp keeps containment exact.
    out(j) = width == 0 ? lo : std::min(lo + width * stream.uniform(index * d + static_cast<std::uint64_t>(j)),
                                        region.upper(j));
  }
}

/// Samples with indices [first, first + count) as the columns of a d x count matrix.
inline Matrix sample(const BallRegion& region, std::uint64_t count, const SeededStream& stream,
                     std::uint64_t first = 0) {
  require(count >= 1, ErrorKind::parameter, "sample count must be at least 1");
  Matrix out(region.dim(), static_cast<Eigen::Index>(count));
  for (std::uint64_t i = 0; i < count; ++i) sample_into(region, stream, first + i, out.col(static_cast<Eigen::Index>(i)));
  return out;
}

}  // namespace zonn
