#pragma once

// Persistence model for the stage files. Every stage emits JSON Lines with a
// fixed field order (ordered_json) so identical inputs produce byte-identical
// outputs; absent optional fields are omitted rather than written as null,
// except inside the per-pair raw feature map, where null marks a feature
// whose inputs were missing.

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "keytrace/anatomy.hpp"
#include "keytrace/classify.hpp"
#include "keytrace/lifecycle.hpp"
#include "keytrace/observables.hpp"
#include "keytrace/report.hpp"
#include "keytrace/synth.hpp"

namespace keytrace {

using ojson = nlohmann::ordered_json;

struct BadStageFile : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Small building blocks.
// ---------------------------------------------------------------------------

inline ojson interval_json(Interval iv) { return {{"lo", iv.lo}, {"hi", iv.hi}}; }

inline Interval parse_interval(ojson const& j) {
  return {j.at("lo").get<Sec>(), j.at("hi").get<Sec>()};
}

namespace detail {

inline void put_opt(ojson& j, char const* field, std::optional<Sec> const& v) {
  if (v) j[field] = *v;
}

inline void put_opt(ojson& j, char const* field, std::optional<Interval> const& v) {
  if (v) j[field] = interval_json(*v);
}

inline std::optional<Sec> opt_sec(ojson const& j, char const* field) {
  if (!j.contains(field)) return std::nullopt;
  return j[field].get<Sec>();
}

inline std::optional<Interval> opt_interval(ojson const& j, char const* field) {
  if (!j.contains(field)) return std::nullopt;
  return parse_interval(j[field]);
}

inline char const* ghost_token(Observable::Ghost g) {
  switch (g) {
    case Observable::Ghost::none: return "none";
    case Observable::Ghost::continuity: return "continuity";
    case Observable::Ghost::trailing: return "trailing";
    case Observable::Ghost::leading: return "leading";
  }
  return "?";
}

inline char const* age_token(PairAnatomy::RelativeAge a) {
  switch (a) {
    case PairAnatomy::RelativeAge::older: return "older";
    case PairAnatomy::RelativeAge::same: return "same";
    case PairAnatomy::RelativeAge::younger: return "younger";
  }
  return "?";
}

inline PairAnatomy::RelativeAge parse_age(std::string const& s) {
  if (s == "older") return PairAnatomy::RelativeAge::older;
  if (s == "same") return PairAnatomy::RelativeAge::same;
  if (s == "younger") return PairAnatomy::RelativeAge::younger;
  throw BadStageFile("bad relative_age '" + s + "'");
}

inline Sign parse_sign(std::string const& s) {
  if (s == "NA") return Sign::na;
  if (s == "NEG") return Sign::neg;
  if (s == "ZERO") return Sign::zero;
  if (s == "POS") return Sign::pos;
  throw BadStageFile("bad sign '" + s + "'");
}

inline Role parse_role(std::string const& s) {
  if (s == "KSK") return Role::ksk;
  if (s == "ZSK") return Role::zsk;
  throw BadStageFile("bad role '" + s + "'");
}

}  // namespace detail

inline ojson key_identity_json(KeyIdentity const& k) {
  return {{"zone", k.zone},
          {"algorithm", k.algorithm},
          {"flags", k.flags},
          {"public_key", k.public_key},
          {"key_tag", k.key_tag}};
}

inline KeyIdentity parse_key_identity(ojson const& j) {
  KeyIdentity k;
  k.zone = j.at("zone").get<std::string>();
  k.algorithm = j.at("algorithm").get<int>();
  k.flags = static_cast<std::uint16_t>(j.at("flags").get<int>());
  k.public_key = j.at("public_key").get<std::string>();
  k.key_tag = j.at("key_tag").get<int>();
  return k;
}

// ---------------------------------------------------------------------------
// observables.jsonl: one observable per line, as produced by build_evidence
// (pre-bridging, so the ghost field reads "none" there; bridged sets dump the
// same way in tests).
// ---------------------------------------------------------------------------

inline ojson observable_json(std::string const& zone, Observable const& ob) {
  ojson j;
  j["zone"] = zone;
  j["key"] = key_identity_json(ob.key);
  j["L"] = interval_json(ob.L);
  detail::put_opt(j, "ds", ob.ds);
  detail::put_opt(j, "fs", ob.fs);
  detail::put_opt(j, "ls", ob.ls);
  j["ghost"] = detail::ghost_token(ob.ghost);
  if (!ob.is_ghost()) {
    j["cov"] = {{"covered_type", ob.cov.covered_type},
                {"key_tag", ob.cov.key_tag},
                {"algorithm", ob.cov.algorithm},
                {"signer", ob.cov.signer},
                {"inception", ob.cov.inception},
                {"expiration", ob.cov.expiration}};
  } else {
    j["gap"] = interval_json(ob.gap);
  }
  return j;
}

inline void write_observables(std::ostream& os, EvidenceMap const& ev) {
  for (auto const& [zone, ze] : ev)
    for (auto const& ob : ze.observables) os << observable_json(zone, ob).dump() << '\n';
}

// ---------------------------------------------------------------------------
// lifetimes.jsonl: one KeyLifetime per line with a stable integer id (global
// emission order). Every field round-trips so later stages can run from the
// file alone.
// ---------------------------------------------------------------------------

inline ojson lifetime_json(int id, KeyLifetime const& lt) {
  ojson j;
  j["id"] = id;
  j["zone"] = lt.zone;
  j["key"] = key_identity_json(lt.key);
  j["L"] = interval_json(lt.L);
  detail::put_opt(j, "S_alpha", lt.S_alpha);
  detail::put_opt(j, "S_phi", lt.S_phi);
  detail::put_opt(j, "S_omega", lt.S_omega);
  detail::put_opt(j, "DS", lt.DS);
  detail::put_opt(j, "fs", lt.fs);
  detail::put_opt(j, "ls", lt.ls);
  j["role_ksk"] = lt.role_ksk;
  j["role_zsk"] = lt.role_zsk;
  if (!lt.revoked.empty()) {
    j["revoked"] = ojson::array();
    for (Interval iv : lt.revoked) j["revoked"].push_back(interval_json(iv));
  }
  j["avg_sig_validity"] = lt.avg_sig_validity;
  if (!lt.ghosts.empty()) {
    j["ghosts"] = ojson::array();
    for (Interval iv : lt.ghosts) j["ghosts"].push_back(interval_json(iv));
  }
  j["coverage"] = ojson::array();
  for (Interval iv : lt.coverage) j["coverage"].push_back(interval_json(iv));
  j["sigs"] = ojson::array();
  for (auto const& s : lt.sigs)
    j["sigs"].push_back(
        {{"covered_type", s.covered_type}, {"inception", s.inception}, {"expiration", s.expiration}});
  j["covering_count"] = lt.covering_count;
  j["inverted_covering"] = lt.inverted_covering;
  j["lifecycle"] = lifecycle_state_name(classify_lifecycle(lt));
  return j;
}

// Returns the lifetime; the id is written to *id_out. Ids are expected to be
// contiguous from 0 in file order, which read_lifetimes enforces.
inline KeyLifetime parse_lifetime_json(ojson const& j, int* id_out = nullptr) {
  KeyLifetime lt;
  if (id_out) *id_out = j.at("id").get<int>();
  lt.zone = j.at("zone").get<std::string>();
  lt.key = parse_key_identity(j.at("key"));
  lt.L = parse_interval(j.at("L"));
  lt.S_alpha = detail::opt_sec(j, "S_alpha");
  lt.S_phi = detail::opt_sec(j, "S_phi");
  lt.S_omega = detail::opt_sec(j, "S_omega");
  lt.DS = detail::opt_interval(j, "DS");
  lt.fs = detail::opt_sec(j, "fs");
  lt.ls = detail::opt_sec(j, "ls");
  lt.role_ksk = j.at("role_ksk").get<bool>();
  lt.role_zsk = j.at("role_zsk").get<bool>();
  if (j.contains("revoked"))
    for (auto const& e : j["revoked"]) lt.revoked.push_back(parse_interval(e));
  lt.avg_sig_validity = j.at("avg_sig_validity").get<double>();
  if (j.contains("ghosts"))
    for (auto const& e : j["ghosts"]) lt.ghosts.push_back(parse_interval(e));
  for (auto const& e : j.at("coverage")) lt.coverage.push_back(parse_interval(e));
  for (auto const& e : j.at("sigs"))
    lt.sigs.push_back({e.at("covered_type").get<std::string>(), e.at("inception").get<Sec>(),
                       e.at("expiration").get<Sec>()});
  lt.covering_count = j.at("covering_count").get<int>();
  lt.inverted_covering = j.at("inverted_covering").get<int>();
  return lt;
}

inline void write_lifetimes(std::ostream& os, std::vector<KeyLifetime> const& lts) {
  for (std::size_t i = 0; i < lts.size(); ++i)
    os << lifetime_json(static_cast<int>(i), lts[i]).dump() << '\n';
}

inline std::vector<KeyLifetime> read_lifetimes(std::istream& is) {
  std::vector<KeyLifetime> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (nlohmann::json::exception const& e) {
      throw BadStageFile(std::string("lifetimes: bad json: ") + e.what());
    }
    int id = -1;
    out.push_back(parse_lifetime_json(j, &id));
    if (id != static_cast<int>(out.size()) - 1)
      throw BadStageFile("lifetimes: ids must be contiguous file order");
  }
  return out;
}

// ---------------------------------------------------------------------------
// transitions.jsonl: one transition per line; each pair carries the raw
// feature values (null when not available) and the discretized signs.
// Lifetimes are referenced by id into lifetimes.jsonl.
// ---------------------------------------------------------------------------

struct PairRecord {
  int departing_id = -1, remaining_id = -1;
  PairAnatomy anatomy;   // zone/role/keys of the parsed form stay default
  DiscretePair discrete;
};

struct TransitionRecord {
  std::string zone;
  Role role = Role::zsk;
  Sec at = 0;
  int year = 0;          // year of the earliest pair's T_alpha
  Interval window{};     // hull of the pair windows
  std::vector<int> departing_ids, remaining_ids;
  std::vector<PairRecord> pairs;
};

namespace detail {

inline ojson raw_feature_json(PairAnatomy const& a) {
  ojson raw;
  auto opt = [&](Feature f, std::optional<Sec> v) {
    if (v)
      raw[feature_name(f)] = *v;
    else
      raw[feature_name(f)] = nullptr;
  };
  opt(Feature::pre_ds, a.pre_ds);
  raw[feature_name(Feature::pre_stage)] = a.pre_stage;
  opt(Feature::rem_pre_ds, a.rem_pre_ds);
  opt(Feature::ds_pre_rem, a.ds_pre_rem);
  raw[feature_name(Feature::double_sig)] = a.double_sig;
  raw[feature_name(Feature::dep_sig_only)] = a.dep_sig_only;
  raw[feature_name(Feature::rem_sig_only)] = a.rem_sig_only;
  raw[feature_name(Feature::retire)] = a.retire;
  opt(Feature::ds_overlap, a.ds_overlap);
  raw[feature_name(Feature::total_duration)] = a.total_duration;
  return raw;
}

inline void parse_raw_features(ojson const& raw, PairAnatomy& a) {
  auto opt = [&](Feature f) -> std::optional<Sec> {
    auto const& v = raw.at(feature_name(f));
    if (v.is_null()) return std::nullopt;
    return v.get<Sec>();
  };
  a.pre_ds = opt(Feature::pre_ds);
  a.pre_stage = raw.at(feature_name(Feature::pre_stage)).get<Sec>();
  a.rem_pre_ds = opt(Feature::rem_pre_ds);
  a.ds_pre_rem = opt(Feature::ds_pre_rem);
  a.double_sig = raw.at(feature_name(Feature::double_sig)).get<Sec>();
  a.dep_sig_only = raw.at(feature_name(Feature::dep_sig_only)).get<Sec>();
  a.rem_sig_only = raw.at(feature_name(Feature::rem_sig_only)).get<Sec>();
  a.retire = raw.at(feature_name(Feature::retire)).get<Sec>();
  a.ds_overlap = opt(Feature::ds_overlap);
  a.total_duration = raw.at(feature_name(Feature::total_duration)).get<Sec>();
}

}  // namespace detail

inline ojson transition_json(TransitionRecord const& tr) {
  ojson j;
  j["zone"] = tr.zone;
  j["role"] = role_name(tr.role);
  j["at"] = tr.at;
  j["year"] = tr.year;
  j["window"] = interval_json(tr.window);
  j["departing_ids"] = tr.departing_ids;
  j["remaining_ids"] = tr.remaining_ids;
  j["pairs"] = ojson::array();
  for (auto const& p : tr.pairs) {
    ojson pj;
    pj["departing_id"] = p.departing_id;
    pj["remaining_id"] = p.remaining_id;
    pj["T"] = interval_json(p.anatomy.T);
    pj["raw"] = detail::raw_feature_json(p.anatomy);
    ojson signs;
    for (int i = 0; i < kFeatureCount; ++i)
      signs[feature_name(Feature(i))] = sign_name(p.discrete.signs[i]);
    pj["signs"] = signs;
    pj["total_duration"] = p.discrete.total_duration;
    pj["relative_age"] = detail::age_token(p.discrete.relative_age);
    j["pairs"].push_back(std::move(pj));
  }
  return j;
}

inline TransitionRecord parse_transition_json(ojson const& j) {
  TransitionRecord tr;
  tr.zone = j.at("zone").get<std::string>();
  tr.role = detail::parse_role(j.at("role").get<std::string>());
  tr.at = j.at("at").get<Sec>();
  tr.year = j.at("year").get<int>();
  tr.window = parse_interval(j.at("window"));
  tr.departing_ids = j.at("departing_ids").get<std::vector<int>>();
  tr.remaining_ids = j.at("remaining_ids").get<std::vector<int>>();
  for (auto const& pj : j.at("pairs")) {
    PairRecord p;
    p.departing_id = pj.at("departing_id").get<int>();
    p.remaining_id = pj.at("remaining_id").get<int>();
    p.anatomy.T = parse_interval(pj.at("T"));
    detail::parse_raw_features(pj.at("raw"), p.anatomy);
    for (int i = 0; i < kFeatureCount; ++i)
      p.discrete.signs[i] = detail::parse_sign(pj.at("signs").at(feature_name(Feature(i))).get<std::string>());
    p.discrete.total_duration = pj.at("total_duration").get<Sec>();
    p.discrete.relative_age = detail::parse_age(pj.at("relative_age").get<std::string>());
    p.anatomy.relative_age = p.discrete.relative_age;
    p.anatomy.total_duration = p.discrete.total_duration;
    tr.pairs.push_back(std::move(p));
  }
  return tr;
}

inline void write_transitions(std::ostream& os, std::vector<TransitionRecord> const& trs) {
  for (auto const& tr : trs) os << transition_json(tr).dump() << '\n';
}

inline std::vector<TransitionRecord> read_transitions(std::istream& is) {
  std::vector<TransitionRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(parse_transition_json(ojson::parse(line)));
    } catch (nlohmann::json::exception const& e) {
      throw BadStageFile(std::string("transitions: bad json: ") + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// classifications.jsonl: one line per classification outcome. Pair-level
// schemes (rfc, emergency) reference one departing and one remaining
// lifetime; the behavior scheme covers a whole transition; the lifecycle
// scheme covers a single lifetime.
// ---------------------------------------------------------------------------

struct ClassificationRecord {
  std::string zone;
  std::string scheme;      // rfc | emergency | behavior | lifecycle
  std::string class_name;
  std::string severity;    // empty for lifecycle lines
  int year = 0;
  std::string role;        // empty for lifecycle lines
  Sec at = 0;              // transition instant (pair/behavior schemes)
  int departing_id = -1, remaining_id = -1;
  std::vector<int> departing_ids, remaining_ids;  // behavior scheme
  int lifetime_id = -1;                           // lifecycle scheme
  std::vector<std::string> violated_soft, violated_integrity;
  bool rollback = false;
};

inline ojson classification_json(ClassificationRecord const& c) {
  ojson j;
  j["zone"] = c.zone;
  j["scheme"] = c.scheme;
  j["class"] = c.class_name;
  if (!c.severity.empty()) j["severity"] = c.severity;
  j["year"] = c.year;
  if (!c.role.empty()) j["role"] = c.role;
  if (c.scheme == "rfc" || c.scheme == "emergency") {
    j["at"] = c.at;
    j["departing_id"] = c.departing_id;
    j["remaining_id"] = c.remaining_id;
    j["violated_soft"] = c.violated_soft;
    j["violated_integrity"] = c.violated_integrity;
    j["rollback"] = c.rollback;
  } else if (c.scheme == "behavior") {
    j["at"] = c.at;
    j["departing_ids"] = c.departing_ids;
    j["remaining_ids"] = c.remaining_ids;
  } else if (c.scheme == "lifecycle") {
    j["lifetime_id"] = c.lifetime_id;
  }
  return j;
}

inline ClassificationRecord parse_classification_json(ojson const& j) {
  ClassificationRecord c;
  c.zone = j.at("zone").get<std::string>();
  c.scheme = j.at("scheme").get<std::string>();
  c.class_name = j.at("class").get<std::string>();
  if (j.contains("severity")) c.severity = j["severity"].get<std::string>();
  c.year = j.at("year").get<int>();
  if (j.contains("role")) c.role = j["role"].get<std::string>();
  if (j.contains("at")) c.at = j["at"].get<Sec>();
  if (j.contains("departing_id")) c.departing_id = j["departing_id"].get<int>();
  if (j.contains("remaining_id")) c.remaining_id = j["remaining_id"].get<int>();
  if (j.contains("departing_ids")) c.departing_ids = j["departing_ids"].get<std::vector<int>>();
  if (j.contains("remaining_ids")) c.remaining_ids = j["remaining_ids"].get<std::vector<int>>();
  if (j.contains("lifetime_id")) c.lifetime_id = j["lifetime_id"].get<int>();
  if (j.contains("violated_soft")) c.violated_soft = j["violated_soft"].get<std::vector<std::string>>();
  if (j.contains("violated_integrity"))
    c.violated_integrity = j["violated_integrity"].get<std::vector<std::string>>();
  if (j.contains("rollback")) c.rollback = j["rollback"].get<bool>();
  return c;
}

inline void write_classifications(std::ostream& os, std::vector<ClassificationRecord> const& cs) {
  for (auto const& c : cs) os << classification_json(c).dump() << '\n';
}

inline std::vector<ClassificationRecord> read_classifications(std::istream& is) {
  std::vector<ClassificationRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(parse_classification_json(ojson::parse(line)));
    } catch (nlohmann::json::exception const& e) {
      throw BadStageFile(std::string("classifications: bad json: ") + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Nested report: every scheme's yearly counts and shares plus the cardinality
// histogram, in one JSON document.
// ---------------------------------------------------------------------------

inline ojson report_json(std::vector<ReportEntry> const& entries,
                         std::map<std::pair<int, int>, long> const& cardinality) {
  ojson j;
  j["schemes"] = ojson::object();
  for (char const* scheme : {"rfc", "emergency", "behavior", "lifecycle"}) {
    YearlyTable t = aggregate_by_year(scheme, entries);
    ojson sj;
    sj["years"] = t.years;
    sj["classes"] = ojson::object();
    for (auto const& row : t.rows) {
      ojson rj;
      rj["counts"] = ojson::array();
      rj["shares"] = ojson::array();
      for (int y : t.years) {
        rj["counts"].push_back(t.count(row, y));
        rj["shares"].push_back(t.share(row, y));
      }
      sj["classes"][row] = std::move(rj);
    }
    j["schemes"][scheme] = std::move(sj);
  }
  j["cardinality"] = ojson::array();
  for (auto const& [nm, count] : cardinality)
    j["cardinality"].push_back({{"n", nm.first}, {"m", nm.second}, {"count", count}});
  return j;
}

// ---------------------------------------------------------------------------
// Ground truth emitted next to synthetic corpora.
// ---------------------------------------------------------------------------

inline ojson truth_json(synth::GroundTruth const& t) {
  ojson j;
  j["zone"] = t.zone;
  j["process"] = t.process;
  j["perturbation"] = t.perturbation;
  j["t0"] = t.t0;
  j["horizon_abs"] = t.horizon_abs;
  j["n_departing"] = t.n_departing;
  j["n_remaining"] = t.n_remaining;
  j["cardinality_checked"] = t.cardinality_checked;
  j["integrity_clean"] = t.integrity_clean;
  j["keys"] = ojson::array();
  for (auto const& k : t.keys) {
    ojson kj;
    kj["label"] = k.label;
    kj["key"] = key_identity_json(k.key);
    kj["L"] = interval_json(k.L);
    detail::put_opt(kj, "s_alpha", k.s_alpha);
    detail::put_opt(kj, "s_phi", k.s_phi);
    detail::put_opt(kj, "s_omega", k.s_omega);
    detail::put_opt(kj, "ds", k.ds);
    detail::put_opt(kj, "fs", k.fs);
    detail::put_opt(kj, "ls", k.ls);
    kj["role_ksk"] = k.role_ksk;
    kj["role_zsk"] = k.role_zsk;
    kj["contiguous"] = k.contiguous;
    j["keys"].push_back(std::move(kj));
  }
  j["pairs"] = ojson::array();
  for (auto const& p : t.pairs) {
    ojson pj;
    pj["departing"] = p.departing;
    pj["remaining"] = p.remaining;
    if (!p.rfc_class.empty()) {
      pj["rfc_class"] = p.rfc_class;
      pj["rfc_warnings"] = p.rfc_warnings;
      if (!p.rfc_severity.empty()) pj["rfc_severity"] = p.rfc_severity;
    }
    if (p.emergency_checked) {
      pj["emergency_class"] = p.emergency_class;
      pj["emergency_warnings"] = p.emergency_warnings;
    }
    if (!p.behavior.empty()) pj["behavior"] = p.behavior;
    j["pairs"].push_back(std::move(pj));
  }
  return j;
}

}  // namespace keytrace
