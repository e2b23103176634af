#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "keytrace/classify.hpp"

namespace keytrace {

// ---------------------------------------------------------------------------
// Per-year aggregation. Rows are class names in a fixed canonical order per
// scheme, columns are the calendar years that actually saw classifications.
// Pairs are bucketed by the year their transition window opens; lifecycle
// entries by the year the lifetime starts.
// ---------------------------------------------------------------------------

struct ReportEntry {
  std::string scheme;
  std::string class_name;
  int year = 0;
};

struct YearlyTable {
  std::string scheme;
  std::vector<std::string> rows;
  std::vector<int> years;
  std::map<std::pair<std::string, int>, long> counts;

  long count(std::string const& cls, int year) const {
    auto it = counts.find({cls, year});
    return it == counts.end() ? 0 : it->second;
  }
  long year_total(int year) const {
    long t = 0;
    for (auto const& r : rows) t += count(r, year);
    return t;
  }
  double share(std::string const& cls, int year) const {
    long t = year_total(year);
    return t == 0 ? 0.0 : static_cast<double>(count(cls, year)) / static_cast<double>(t);
  }
};

inline std::vector<std::string> canonical_row_order(std::string const& scheme) {
  if (scheme == "rfc")
    return {"ZSK Pre-Pub",     "ZSK Double-Sig",  "KSK Double-DS", "KSK Double-KSK",
            "KSK Double-RRset", "KSK Update-TA",  "noncompliant"};
  if (scheme == "emergency")
    return {"KSK Emergency 2", "KSK Emergency 3", "ZSK Emergency 2", "ZSK Emergency 3"};
  if (scheme == "behavior")
    return {"Multi-Signature", "Co-Present", "Cutover", "Likely-Cutover", "Candidate-Cutover",
            "Unknown"};
  if (scheme == "lifecycle")
    return {"Valid",
            "NeverSigned",
            "InvertedSignature",
            "ServedBeforeInception",
            "ServedAfterExpiration",
            "PublishedNeverSeen",
            "CoverageGap"};
  return {};
}

inline YearlyTable aggregate_by_year(std::string const& scheme,
                                     std::vector<ReportEntry> const& entries) {
  YearlyTable t;
  t.scheme = scheme;
  std::set<std::string> seen_rows;
  std::set<int> seen_years;
  for (auto const& e : entries) {
    if (e.scheme != scheme) continue;
    ++t.counts[{e.class_name, e.year}];
    seen_rows.insert(e.class_name);
    seen_years.insert(e.year);
  }
  for (auto const& r : canonical_row_order(scheme))
    if (seen_rows.erase(r)) t.rows.push_back(r);
  for (auto const& r : seen_rows) t.rows.push_back(r);  // unexpected names, sorted
  t.years.assign(seen_years.begin(), seen_years.end());
  return t;
}

// ---------------------------------------------------------------------------
// CSV emission: counts by default, shares as a separate two-decimal view.
// ---------------------------------------------------------------------------

inline std::string emit_counts_csv(YearlyTable const& t) {
  std::string out = "class";
  for (int y : t.years) out += ',' + std::to_string(y);
  out += '\n';
  for (auto const& r : t.rows) {
    out += r;
    for (int y : t.years) out += ',' + std::to_string(t.count(r, y));
    out += '\n';
  }
  return out;
}

inline std::string emit_shares_csv(YearlyTable const& t) {
  std::string out = "class";
  for (int y : t.years) out += ',' + std::to_string(y);
  out += '\n';
  char buf[32];
  for (auto const& r : t.rows) {
    out += r;
    for (int y : t.years) {
      std::snprintf(buf, sizeof buf, "%.2f", t.share(r, y));
      out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

// (departing count, remaining count) histogram.
inline std::string emit_cardinality_csv(std::map<std::pair<int, int>, long> const& hist) {
  std::string out = "n,m,count\n";
  for (auto const& [nm, c] : hist)
    out += std::to_string(nm.first) + ',' + std::to_string(nm.second) + ',' + std::to_string(c) +
           '\n';
  return out;
}

}  // namespace keytrace
