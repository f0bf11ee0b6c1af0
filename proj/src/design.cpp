#include "mixgp/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "csv_util.hpp"
#include "mixgp/errors.hpp"

namespace mixgp {

namespace {

// Position (f + jitter) / total, nudged so that floor(x * total) == f.
double place_in_bin(int f, double jitter, int total) {
  const double t = static_cast<double>(total);
  double x = (static_cast<double>(f) + jitter) / t;
  while (x > 0.0 && std::floor(x * t) > f) x = std::nextafter(x, 0.0);
  while (std::floor(x * t) < f) x = std::nextafter(x, 1.0);
  if (x >= 1.0) x = std::nextafter(1.0, 0.0);
  return x;
}

std::vector<int> permutation(int n, std::mt19937_64& rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

bool is_permutation_of_range(std::vector<int> bins, int n) {
  if (static_cast<int>(bins.size()) != n) return false;
  std::sort(bins.begin(), bins.end());
  for (int i = 0; i < n; ++i) {
    if (bins[static_cast<std::size_t>(i)] != i) return false;
  }
  return true;
}

}  // namespace

Design lhd(int n, int q, std::uint64_t seed, bool centered) {
  if (n < 1 || q < 1) throw DomainError("lhd needs n >= 1 and q >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Design d;
  d.n_per_slice = n;
  d.s = 1;
  d.q = q;
  d.seed = seed;
  d.points.assign(static_cast<std::size_t>(n), MixedPoint{std::vector<double>(static_cast<std::size_t>(q)), 1});
  for (int dim = 0; dim < q; ++dim) {
    const auto perm = permutation(n, rng);
    for (int i = 0; i < n; ++i) {
      const double jitter = centered ? 0.5 : unit(rng);
      d.points[static_cast<std::size_t>(i)].x[static_cast<std::size_t>(dim)] =
          place_in_bin(perm[static_cast<std::size_t>(i)], jitter, n);
    }
  }
  return d;
}

SlicedDesign cslhd(int n, int s, int q, std::uint64_t seed, bool centered) {
  if (n < 1 || q < 1) throw DomainError("cslhd needs n >= 1 and q >= 1");
  if (s < 2) throw DomainError("cslhd needs s >= 2 slices");
  const int total = n * s;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SlicedDesign out;
  Design& d = out.design;
  d.n_per_slice = n;
  d.s = s;
  d.q = q;
  d.seed = seed;
  d.points.resize(static_cast<std::size_t>(total));
  out.clusters.assignment.resize(static_cast<std::size_t>(total));
  for (int level = 1; level <= s; ++level) {
    for (int c = 0; c < n; ++c) {
      const auto idx = static_cast<std::size_t>((level - 1) * n + c);
      d.points[idx] = MixedPoint{std::vector<double>(static_cast<std::size_t>(q)), level};
      out.clusters.assignment[idx] = c + 1;
    }
  }

  for (int dim = 0; dim < q; ++dim) {
    const auto coarse = permutation(n, rng);      // cluster -> coarse bin
    const auto slot = permutation(s, rng);        // slice -> position in an even bin
    for (int c = 0; c < n; ++c) {
      const int bin = coarse[static_cast<std::size_t>(c)];
      const double jitter = centered ? 0.5 : unit(rng);
      for (int level = 1; level <= s; ++level) {
        const int forward = slot[static_cast<std::size_t>(level - 1)];
        const int pos = bin % 2 == 0 ? forward : s - 1 - forward;
        const auto idx = static_cast<std::size_t>((level - 1) * n + c);
        d.points[idx].x[static_cast<std::size_t>(dim)] = place_in_bin(bin * s + pos, jitter, total);
      }
    }
  }
  return out;
}

std::vector<MixedPoint> scale_to_bounds(const Design& design, const std::vector<Interval>& bounds) {
  if (static_cast<int>(bounds.size()) != design.q) throw ArityError("bounds do not match design dimension");
  for (const auto& b : bounds) {
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || !(b.lower < b.upper)) {
      throw DomainError("bounds must be finite with lower < upper");
    }
  }
  std::vector<MixedPoint> out = design.points;
  for (auto& p : out) {
    for (std::size_t i = 0; i < p.x.size(); ++i) {
      p.x[i] = bounds[i].lower + p.x[i] * (bounds[i].upper - bounds[i].lower);
    }
  }
  return out;
}

std::vector<MixedPoint> unscale_from_bounds(const std::vector<MixedPoint>& points,
                                            const std::vector<Interval>& bounds) {
  std::vector<MixedPoint> out = points;
  for (auto& p : out) {
    if (p.x.size() != bounds.size()) throw ArityError("bounds do not match point dimension");
    for (std::size_t i = 0; i < p.x.size(); ++i) {
      if (!(bounds[i].lower < bounds[i].upper)) throw DomainError("degenerate bounds");
      p.x[i] = (p.x[i] - bounds[i].lower) / (bounds[i].upper - bounds[i].lower);
    }
  }
  return out;
}

std::optional<std::string> check_design(const Design& design) {
  const int n = design.n_per_slice;
  const int s = design.s;
  const int q = design.q;
  if (n < 1 || s < 1 || q < 1) return "positive sizes";
  if (static_cast<int>(design.points.size()) != n * s) return "point count equals n * s";

  std::vector<int> per_level(static_cast<std::size_t>(s), 0);
  for (const auto& p : design.points) {
    if (p.level < 1 || p.level > s) return "slice index in 1..s";
    if (static_cast<int>(p.x.size()) != q) return "coordinate count equals q";
    ++per_level[static_cast<std::size_t>(p.level - 1)];
  }
  for (int c : per_level) {
    if (c != n) return "equal slice sizes";
  }
  for (const auto& p : design.points) {
    for (double v : p.x) {
      if (!(v >= 0.0 && v < 1.0)) return "coordinates in [0, 1)";
    }
  }

  const int total = n * s;
  for (int dim = 0; dim < q; ++dim) {
    std::vector<int> fine;
    for (const auto& p : design.points) {
      fine.push_back(static_cast<int>(std::floor(p.x[static_cast<std::size_t>(dim)] * total)));
    }
    if (!is_permutation_of_range(fine, total)) return "full-design Latin hypercube";
  }
  for (int level = 1; level <= s; ++level) {
    for (int dim = 0; dim < q; ++dim) {
      std::vector<int> coarse;
      for (const auto& p : design.points) {
        if (p.level != level) continue;
        const int fine = static_cast<int>(std::floor(p.x[static_cast<std::size_t>(dim)] * total));
        coarse.push_back(fine / s);
      }
      if (!is_permutation_of_range(coarse, n)) return "slice Latin hypercube";
    }
  }
  return std::nullopt;
}

std::string design_to_csv(const Design& design, const std::optional<std::vector<Interval>>& bounds) {
  std::ostringstream os;
  os << "slice";
  for (int i = 1; i <= design.q; ++i) os << ",x" << i;
  std::vector<MixedPoint> scaled;
  if (bounds) {
    for (int i = 1; i <= design.q; ++i) os << ",p" << i;
    scaled = scale_to_bounds(design, *bounds);
  }
  os << '\n';
  for (std::size_t k = 0; k < design.points.size(); ++k) {
    const auto& p = design.points[k];
    os << p.level;
    for (double v : p.x) os << ',' << csv::num(v);
    if (bounds) {
      for (double v : scaled[k].x) os << ',' << csv::num(v);
    }
    os << '\n';
  }
  return os.str();
}

Design design_from_csv(std::string_view text) {
  const auto rows = csv::lines(text);
  if (rows.empty()) throw FormatError("design CSV is empty");
  const auto header = csv::split(rows.front());
  if (header.empty() || header.front() != "slice") throw FormatError("design CSV must start with a 'slice' column");
  int q = 0;
  while (q + 1 < static_cast<int>(header.size()) &&
         header[static_cast<std::size_t>(q + 1)] == "x" + std::to_string(q + 1)) {
    ++q;
  }
  if (q == 0) throw FormatError("design CSV has no x1 column");

  Design d;
  d.q = q;
  int max_level = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto cells = csv::split(rows[r]);
    if (cells.size() != header.size()) throw FormatError("row " + std::to_string(r) + " has the wrong column count");
    MixedPoint p;
    p.level = csv::to_int(cells[0]);
    for (int i = 1; i <= q; ++i) p.x.push_back(csv::to_double(cells[static_cast<std::size_t>(i)]));
    max_level = std::max(max_level, p.level);
    d.points.push_back(std::move(p));
  }
  d.s = std::max(max_level, 1);
  d.n_per_slice = static_cast<int>(d.points.size()) / d.s;
  if (auto bad = check_design(d)) throw FormatError("design violates property: " + *bad);
  return d;
}

}  // namespace mixgp
