#pragma once

#include <array>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "keytrace/anatomy.hpp"

namespace keytrace {

// ---------------------------------------------------------------------------
// Transition templates. Each named class constrains the ten features; a
// mandatory cell decides membership, a soft cell only raises a warning when
// violated, a wildcard is ignored. Two cells are duration rules evaluated on
// the raw TotalDuration rather than its sign: the trust-anchor-update rule
// (>= 30 d plus the departing key's average signature validity) and the
// "extended duration" rule for emergency classes (> configurable threshold).
// ---------------------------------------------------------------------------

enum class CellKind { wildcard, mandatory, soft };
enum class CellSign { none, lt0, eq0, gt0, ne0, ge0, min_duration, extended };

struct TemplateCell {
  CellKind kind = CellKind::wildcard;
  CellSign sign = CellSign::none;
  bool operator==(TemplateCell const&) const = default;
};

struct TemplateRow {
  std::string scheme;  // "rfc" or "emergency"
  Role role = Role::zsk;
  std::string name;
  std::array<TemplateCell, kFeatureCount> cells{};
  bool operator==(TemplateRow const&) const = default;
};

namespace detail {

inline TemplateCell cell(CellKind k, CellSign s) { return {k, s}; }

inline TemplateRow make_row(std::string scheme, Role role, std::string name,
                            std::initializer_list<std::pair<Feature, TemplateCell>> cells) {
  TemplateRow r;
  r.scheme = std::move(scheme);
  r.role = role;
  r.name = std::move(name);
  for (auto const& [f, c] : cells) r.cells[int(f)] = c;
  return r;
}

}  // namespace detail

// The table, in evaluation precedence order within each scheme and role.
inline std::vector<TemplateRow> const& builtin_templates() {
  using detail::cell;
  using detail::make_row;
  using enum CellKind;
  using enum CellSign;
  static std::vector<TemplateRow> const rows = {
      make_row("rfc", Role::zsk, "ZSK Pre-Pub",
               {{Feature::double_sig, cell(soft, eq0)},
                {Feature::pre_stage, cell(mandatory, gt0)},
                {Feature::dep_sig_only, cell(soft, gt0)},
                {Feature::retire, cell(soft, gt0)},
                {Feature::rem_sig_only, cell(soft, gt0)}}),
      make_row("rfc", Role::zsk, "ZSK Double-Sig",
               {{Feature::double_sig, cell(mandatory, gt0)},
                {Feature::pre_stage, cell(mandatory, eq0)},
                {Feature::dep_sig_only, cell(soft, eq0)},
                {Feature::retire, cell(soft, eq0)},
                {Feature::rem_sig_only, cell(soft, eq0)}}),
      make_row("rfc", Role::ksk, "KSK Double-DS",
               {{Feature::pre_ds, cell(soft, lt0)},
                {Feature::double_sig, cell(soft, eq0)},
                {Feature::pre_stage, cell(soft, eq0)},
                {Feature::dep_sig_only, cell(soft, eq0)},
                {Feature::retire, cell(soft, eq0)},
                {Feature::ds_overlap, cell(mandatory, gt0)},
                {Feature::rem_sig_only, cell(soft, gt0)},
                {Feature::ds_pre_rem, cell(mandatory, lt0)},
                {Feature::rem_pre_ds, cell(mandatory, lt0)}}),
      make_row("rfc", Role::ksk, "KSK Double-KSK",
               {{Feature::pre_ds, cell(soft, gt0)},
                {Feature::double_sig, cell(soft, gt0)},
                {Feature::pre_stage, cell(soft, eq0)},
                {Feature::dep_sig_only, cell(soft, eq0)},
                {Feature::retire, cell(soft, gt0)},
                {Feature::ds_overlap, cell(soft, eq0)},
                {Feature::rem_sig_only, cell(soft, gt0)},
                {Feature::ds_pre_rem, cell(mandatory, gt0)},
                {Feature::rem_pre_ds, cell(mandatory, gt0)}}),
      make_row("rfc", Role::ksk, "KSK Double-RRset",
               {{Feature::pre_ds, cell(soft, gt0)},
                {Feature::double_sig, cell(soft, gt0)},
                {Feature::pre_stage, cell(soft, eq0)},
                {Feature::dep_sig_only, cell(soft, eq0)},
                {Feature::retire, cell(soft, gt0)},
                {Feature::ds_overlap, cell(soft, eq0)},
                {Feature::rem_sig_only, cell(soft, gt0)},
                {Feature::ds_pre_rem, cell(mandatory, ne0)}}),
      make_row("rfc", Role::ksk, "KSK Update-TA",
               {{Feature::total_duration, cell(mandatory, min_duration)}}),
      make_row("emergency", Role::ksk, "KSK Emergency 2",
               {{Feature::double_sig, cell(mandatory, eq0)},
                {Feature::pre_stage, cell(mandatory, eq0)},
                {Feature::dep_sig_only, cell(soft, eq0)},
                {Feature::retire, cell(mandatory, eq0)},
                {Feature::ds_overlap, cell(mandatory, eq0)},
                {Feature::rem_sig_only, cell(soft, gt0)},
                {Feature::rem_pre_ds, cell(mandatory, ge0)}}),
      make_row("emergency", Role::ksk, "KSK Emergency 3",
               {{Feature::double_sig, cell(soft, eq0)},
                {Feature::pre_stage, cell(mandatory, gt0)},
                {Feature::retire, cell(soft, gt0)},
                {Feature::ds_pre_rem, cell(soft, gt0)},
                {Feature::rem_pre_ds, cell(mandatory, gt0)},
                {Feature::total_duration, cell(mandatory, extended)}}),
      make_row("emergency", Role::zsk, "ZSK Emergency 2",
               {{Feature::double_sig, cell(mandatory, eq0)},
                {Feature::pre_stage, cell(mandatory, eq0)},
                {Feature::dep_sig_only, cell(mandatory, eq0)},
                {Feature::retire, cell(mandatory, eq0)},
                {Feature::rem_sig_only, cell(soft, gt0)}}),
      make_row("emergency", Role::zsk, "ZSK Emergency 3",
               {{Feature::pre_stage, cell(mandatory, gt0)},
                {Feature::total_duration, cell(mandatory, extended)}}),
  };
  return rows;
}

// ---------------------------------------------------------------------------
// Cell evaluation.
// ---------------------------------------------------------------------------

struct EvalContext {
  double dep_avg_sig_validity = 0;       // seconds, departing key
  Sec extended_threshold = 30 * kSecPerDay;
};

inline bool cell_holds(TemplateCell const& c, Sign s, Sec total_duration, EvalContext const& ctx) {
  switch (c.sign) {
    case CellSign::none: return true;
    case CellSign::lt0: return s == Sign::neg;
    case CellSign::eq0: return s == Sign::zero;
    case CellSign::gt0: return s == Sign::pos;
    case CellSign::ne0: return s == Sign::neg || s == Sign::pos;
    case CellSign::ge0: return s == Sign::zero || s == Sign::pos;
    case CellSign::min_duration:
      return static_cast<double>(total_duration) >= 30.0 * kSecPerDay + ctx.dep_avg_sig_validity;
    case CellSign::extended: return total_duration > ctx.extended_threshold;
  }
  return false;
}

// Mandatory cells decide membership (an unavailable feature cannot satisfy
// one); violated or unavailable soft cells accumulate as warnings.
inline std::optional<std::vector<Feature>> match_template(TemplateRow const& row,
                                                          DiscretePair const& d,
                                                          EvalContext const& ctx) {
  std::vector<Feature> violated;
  for (int i = 0; i < kFeatureCount; ++i) {
    TemplateCell const& c = row.cells[i];
    if (c.kind == CellKind::wildcard) continue;
    bool duration_rule = c.sign == CellSign::min_duration || c.sign == CellSign::extended;
    bool na = !duration_rule && d.signs[i] == Sign::na;
    bool ok = !na && cell_holds(c, d.signs[i], d.total_duration, ctx);
    if (ok) continue;
    if (c.kind == CellKind::mandatory) return std::nullopt;
    violated.push_back(Feature(i));
  }
  return violated;
}

// ---------------------------------------------------------------------------
// Machine-readable form. One line per non-trivial feature cell of each class,
// emitted in the documentation order of the feature columns so the file reads
// like the published table.
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr std::array<Feature, kFeatureCount> kDocFeatureOrder = {
    Feature::pre_ds,      Feature::double_sig, Feature::pre_stage,
    Feature::dep_sig_only, Feature::retire,     Feature::ds_overlap,
    Feature::rem_sig_only, Feature::ds_pre_rem, Feature::rem_pre_ds,
    Feature::total_duration,
};

inline char const* sign_token(CellSign s) {
  switch (s) {
    case CellSign::none: return "-";
    case CellSign::lt0: return "<0";
    case CellSign::eq0: return "=0";
    case CellSign::gt0: return ">0";
    case CellSign::ne0: return "!=0";
    case CellSign::ge0: return ">=0";
    case CellSign::min_duration: return ">=30d+AvgSig";
    case CellSign::extended: return "extended";
  }
  return "?";
}

inline CellSign parse_sign_token(std::string const& t) {
  if (t == "-") return CellSign::none;
  if (t == "<0") return CellSign::lt0;
  if (t == "=0") return CellSign::eq0;
  if (t == ">0") return CellSign::gt0;
  if (t == "!=0") return CellSign::ne0;
  if (t == ">=0") return CellSign::ge0;
  if (t == ">=30d+AvgSig") return CellSign::min_duration;
  if (t == "extended") return CellSign::extended;
  throw std::runtime_error("templates: bad sign token '" + t + "'");
}

inline char const* kind_token(CellKind k) {
  switch (k) {
    case CellKind::wildcard: return "wildcard";
    case CellKind::mandatory: return "mandatory";
    case CellKind::soft: return "soft";
  }
  return "?";
}

inline CellKind parse_kind_token(std::string const& t) {
  if (t == "wildcard") return CellKind::wildcard;
  if (t == "mandatory") return CellKind::mandatory;
  if (t == "soft") return CellKind::soft;
  throw std::runtime_error("templates: bad kind token '" + t + "'");
}

inline Feature parse_feature_name(std::string const& t) {
  for (int i = 0; i < kFeatureCount; ++i)
    if (t == feature_name(Feature(i))) return Feature(i);
  throw std::runtime_error("templates: unknown feature '" + t + "'");
}

}  // namespace detail

inline std::string templates_csv() {
  std::ostringstream os;
  os << "class,role,feature,kind,sign\n";
  for (auto const& row : builtin_templates()) {
    for (Feature f : detail::kDocFeatureOrder) {
      TemplateCell const& c = row.cells[int(f)];
      if (c.kind == CellKind::wildcard) continue;
      os << row.name << ',' << role_name(row.role) << ',' << feature_name(f) << ','
         << detail::kind_token(c.kind) << ',' << detail::sign_token(c.sign) << '\n';
    }
  }
  return os.str();
}

// Parses the CSV back into rows. Class order follows first appearance; the
// scheme is recovered from the class name.
inline std::vector<TemplateRow> load_templates(std::string const& csv) {
  std::vector<TemplateRow> rows;
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line) || line != "class,role,feature,kind,sign")
    throw std::runtime_error("templates: bad header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::array<std::string, 5> f;
    std::size_t pos = 0;
    for (int i = 0; i < 5; ++i) {
      std::size_t c = i < 4 ? line.find(',', pos) : line.size();
      if (c == std::string::npos) throw std::runtime_error("templates: short row: " + line);
      f[i] = line.substr(pos, c - pos);
      pos = c + 1;
    }
    TemplateRow* row = nullptr;
    for (auto& r : rows)
      if (r.name == f[0]) row = &r;
    if (!row) {
      rows.emplace_back();
      row = &rows.back();
      row->name = f[0];
      row->scheme = f[0].find("Emergency") != std::string::npos ? "emergency" : "rfc";
      if (f[1] == "KSK")
        row->role = Role::ksk;
      else if (f[1] == "ZSK")
        row->role = Role::zsk;
      else
        throw std::runtime_error("templates: bad role '" + f[1] + "'");
    }
    Feature feat = detail::parse_feature_name(f[2]);
    row->cells[int(feat)] = {detail::parse_kind_token(f[3]), detail::parse_sign_token(f[4])};
  }
  return rows;
}

}  // namespace keytrace
