#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

namespace keytrace {

// Unix epoch seconds; also used for durations.
using Sec = std::int64_t;

constexpr Sec kSecPerDay = 86400;

constexpr Sec days(Sec n) { return n * kSecPerDay; }

// Closed interval of instants [lo, hi]. Its width is the number of unit
// cells [t, t+1) it spans, i.e. hi - lo; a single instant has width 0.
// Widths of empty intersections clamp to 0.
struct Interval {
  Sec lo = 0;
  Sec hi = 0;

  auto operator<=>(Interval const&) const = default;
  bool contains(Sec t) const { return lo <= t && t <= hi; }
  bool valid() const { return lo <= hi; }
};

inline Sec width(Interval iv) { return iv.hi - iv.lo; }

inline std::optional<Interval> intersect(Interval a, Interval b) {
  Interval r{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
  if (!r.valid()) return std::nullopt;
  return r;
}

// Width of the intersection, 0 when disjoint. Touching intervals share one
// instant and therefore overlap with width 0.
inline Sec overlap_width(Interval a, Interval b) {
  Sec w = std::min(a.hi, b.hi) - std::max(a.lo, b.lo);
  return w > 0 ? w : 0;
}

inline bool overlaps(Interval a, Interval b) {
  return std::max(a.lo, b.lo) <= std::min(a.hi, b.hi);
}

// Removes single instants from a closed interval, splitting it into the
// maximal closed pieces that avoid them. Cuts outside the interval are
// ignored; adjacent cuts can shrink a piece to nothing.
inline std::vector<Interval> subtract_instants(Interval iv, std::vector<Sec> cuts) {
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<Interval> out;
  Sec lo = iv.lo;
  for (Sec c : cuts) {
    if (c < iv.lo || c > iv.hi) continue;
    if (c > lo) out.push_back({lo, c - 1});
    lo = c + 1;
  }
  if (lo <= iv.hi) out.push_back({lo, iv.hi});
  return out;
}

// Merges intervals whose instant sets touch or overlap ([0,10] and [11,20]
// jointly cover every instant 0..20, so they merge).
inline std::vector<Interval> merge_instants(std::vector<Interval> ivs) {
  std::sort(ivs.begin(), ivs.end(),
            [](Interval a, Interval b) { return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi); });
  std::vector<Interval> out;
  for (Interval iv : ivs) {
    if (!out.empty() && iv.lo <= out.back().hi + 1)
      out.back().hi = std::max(out.back().hi, iv.hi);
    else
      out.push_back(iv);
  }
  return out;
}

// Proleptic-Gregorian civil year for a unix timestamp (UTC), via the usual
// days-from-epoch decomposition. Handles pre-1970 instants.
inline int year_utc(Sec ts) {
  Sec z = ts / kSecPerDay;
  if (ts % kSecPerDay < 0) --z;
  z += 719468;
  Sec const era = (z >= 0 ? z : z - 146096) / 146097;
  Sec const doe = z - era * 146097;
  Sec const yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  Sec const y = yoe + era * 400;
  Sec const doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  Sec const mp = (5 * doy + 2) / 153;
  return static_cast<int>(y + (mp >= 10 ? 1 : 0));
}

}  // namespace keytrace
