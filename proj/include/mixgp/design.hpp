#pragma once

// Space-filling designs on [0, 1)^q for mixed inputs.
//
// A clustered sliced Latin hypercube design (CSLHD) with n points per slice
// and s slices has N = n * s points such that
//   (a) the whole design is an LHD on N fine bins per dimension,
//   (b) every slice is an LHD on n coarse bins (fine bin b -> coarse bin b / s),
//   (c) the s points of a cluster, one per slice, share their coarse bin in
//       every dimension.
//
// Construction, per dimension d:
//   - a random permutation assigns coarse bins to clusters,
//   - a random permutation orders the slices inside a coarse bin; the order
//     is reversed in odd coarse bins,
//   - one uniform jitter per (cluster, dimension) is shared by the cluster.
// With the alternating order and the shared jitter every other-cluster point
// is strictly farther from a point than its cluster-mate in every dimension,
// so the nearest point of another slice is always the cluster-mate.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mixgp/gpcore.hpp"

namespace mixgp {

struct Design {
  std::vector<MixedPoint> points;  // slice-major: index = (level - 1) * n + cluster - 1
  int n_per_slice = 0;
  int s = 1;
  int q = 0;
  std::uint64_t seed = 0;
};

struct ClusterMap {
  std::vector<int> assignment;  // point index -> cluster in 1..n
};

struct SlicedDesign {
  Design design;
  ClusterMap clusters;
};

/// Single-slice LHD; every point carries level 1.
/// `centered` places points at fine-bin midpoints instead of jittering.
Design lhd(int n, int q, std::uint64_t seed, bool centered = false);

SlicedDesign cslhd(int n, int s, int q, std::uint64_t seed, bool centered = false);

/// Affine map of [0, 1) coordinates onto the bounds.
std::vector<MixedPoint> scale_to_bounds(const Design& design, const std::vector<Interval>& bounds);
/// Inverse of scale_to_bounds.
std::vector<MixedPoint> unscale_from_bounds(const std::vector<MixedPoint>& points,
                                            const std::vector<Interval>& bounds);

/// Name of the first violated design property, or nothing if the design is valid.
std::optional<std::string> check_design(const Design& design);

/// CSV with header `slice,x1..xq` and, when bounds are given, `p1..pq`
/// problem-coordinate columns.
std::string design_to_csv(const Design& design,
                          const std::optional<std::vector<Interval>>& bounds = std::nullopt);

/// Parses design_to_csv output (problem columns ignored) and validates it.
/// Throws FormatError naming the first violated property.
Design design_from_csv(std::string_view text);

}  // namespace mixgp
