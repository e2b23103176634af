#pragma once

#include <array>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "keytrace/lifecycle.hpp"

namespace keytrace {

// ---------------------------------------------------------------------------
// Transition detection. Within one zone and one role, every distinct lifetime
// end is a candidate hand-off instant: the keys ending there depart, the keys
// whose lifetimes contain the following instant remain. If nothing is alive
// right after the instant, the earliest keys to appear later stand in as the
// successors. No successors at all means the zone simply signed off, not a
// transition. Each instant yields one transition carrying every
// departing x remaining pair.
// ---------------------------------------------------------------------------

struct Transition {
  std::string zone;
  Role role = Role::zsk;
  Sec at = 0;  // shared end instant of the departing keys
  std::vector<KeyLifetime const*> departing;
  std::vector<KeyLifetime const*> remaining;
};

inline std::vector<Transition> detect_transitions(std::vector<KeyLifetime> const& lts,
                                                  std::string const& zone, Role role) {
  std::vector<KeyLifetime const*> pool;
  for (auto const& lt : lts)
    if (lt.zone == zone && lt.has_role(role)) pool.push_back(&lt);

  std::vector<Sec> ends;
  for (auto const* lt : pool) ends.push_back(lt->L.hi);
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());

  std::vector<Transition> out;
  for (Sec t : ends) {
    Transition tr;
    tr.zone = zone;
    tr.role = role;
    tr.at = t;
    for (auto const* lt : pool)
      if (lt->L.hi == t) tr.departing.push_back(lt);
    for (auto const* lt : pool)
      if (lt->L.lo <= t + 1 && t + 1 <= lt->L.hi) tr.remaining.push_back(lt);
    if (tr.remaining.empty()) {
      // Fall back to the next generation: keys appearing strictly later.
      Sec best = std::numeric_limits<Sec>::max();
      for (auto const* lt : pool)
        if (lt->L.lo > t) best = std::min(best, lt->L.lo);
      if (best != std::numeric_limits<Sec>::max())
        for (auto const* lt : pool)
          if (lt->L.lo == best) tr.remaining.push_back(lt);
    }
    if (tr.remaining.empty()) continue;
    out.push_back(std::move(tr));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-pair anatomy: ten timing features of one departing/remaining key pair.
// Durations are in seconds; a feature whose inputs are missing is N/A.
// ---------------------------------------------------------------------------

struct PairAnatomy {
  std::string zone;
  Role role = Role::zsk;
  KeyIdentity departing_key, remaining_key;
  Interval T{};  // the transition window

  std::optional<Sec> pre_ds;        // DS_alpha(d) - L_alpha(d)
  Sec pre_stage = 0;                // S_alpha(r) - L_alpha(r), 0 when r never signed
  std::optional<Sec> rem_pre_ds;    // DS_alpha(r) - L_alpha(r)
  std::optional<Sec> ds_pre_rem;    // L_omega(d) - DS_omega(d)
  Sec double_sig = 0;               // |A(d) ^ A(r)|
  Sec dep_sig_only = 0;             // |A(d) ^ T| - double_sig
  Sec rem_sig_only = 0;             // |A(r) ^ T| - double_sig
  Sec retire = 0;                   // |[S_phi(d), L_omega(d)] ^ T|, 0 when d never signed
  std::optional<Sec> ds_overlap;    // |DS(d) ^ DS(r)|
  Sec total_duration = 0;           // T_omega - T_alpha, may be negative

  enum class RelativeAge { older, same, younger };
  RelativeAge relative_age = RelativeAge::younger;  // of the remaining key
};

namespace detail {

// Signing activity hull: [S_alpha, S_phi], open-ended when the last-signing
// instant is unknown, absent when the key never signed in this lifetime.
inline std::optional<Interval> activity(KeyLifetime const& lt) {
  if (!lt.S_alpha) return std::nullopt;
  Sec hi = lt.S_phi ? *lt.S_phi : std::numeric_limits<Sec>::max();
  return Interval{*lt.S_alpha, hi};
}

}  // namespace detail

inline PairAnatomy compute_pair_anatomy(KeyLifetime const& d, KeyLifetime const& r, Role role) {
  PairAnatomy a;
  a.zone = d.zone;
  a.role = role;
  a.departing_key = d.key;
  a.remaining_key = r.key;

  // Transition window: for ZSKs the remaining key's start to the departing
  // key's end; for KSKs widened by the DS evidence on each side.
  Sec t_alpha = r.L.lo, t_omega = d.L.hi;
  if (role == Role::ksk) {
    if (r.DS) t_alpha = std::min(t_alpha, r.DS->lo);
    if (d.DS) t_omega = std::max(t_omega, d.DS->hi);
  }
  a.T = {t_alpha, t_omega};
  a.total_duration = t_omega - t_alpha;

  if (d.DS) a.pre_ds = d.DS->lo - d.L.lo;
  a.pre_stage = r.S_alpha ? *r.S_alpha - r.L.lo : 0;
  if (r.DS) a.rem_pre_ds = r.DS->lo - r.L.lo;
  if (d.DS) a.ds_pre_rem = d.L.hi - d.DS->hi;

  auto act_d = detail::activity(d), act_r = detail::activity(r);
  if (act_d && act_r) a.double_sig = overlap_width(*act_d, *act_r);
  if (a.T.valid()) {
    if (act_d) a.dep_sig_only = overlap_width(*act_d, a.T) - a.double_sig;
    if (act_r) a.rem_sig_only = overlap_width(*act_r, a.T) - a.double_sig;
    if (d.S_phi) a.retire = overlap_width(Interval{*d.S_phi, d.L.hi}, a.T);
  }
  if (d.DS && r.DS) a.ds_overlap = overlap_width(*d.DS, *r.DS);

  if (r.L.lo < d.L.lo)
    a.relative_age = PairAnatomy::RelativeAge::older;
  else if (r.L.lo == d.L.lo)
    a.relative_age = PairAnatomy::RelativeAge::same;
  else
    a.relative_age = PairAnatomy::RelativeAge::younger;
  return a;
}

// ---------------------------------------------------------------------------
// Discretization: each duration collapses to its sign under a tolerance tau
// (|x| <= tau reads as zero). TotalDuration stays numeric.
// ---------------------------------------------------------------------------

enum class Sign { na, neg, zero, pos };

inline char const* sign_name(Sign s) {
  switch (s) {
    case Sign::na: return "NA";
    case Sign::neg: return "NEG";
    case Sign::zero: return "ZERO";
    case Sign::pos: return "POS";
  }
  return "?";
}

inline Sign discretize_value(std::optional<Sec> v, Sec tau) {
  if (!v) return Sign::na;
  if (*v > tau) return Sign::pos;
  if (*v < -tau) return Sign::neg;
  return Sign::zero;
}

// Feature order is fixed; every consumer indexes this list by position.
enum class Feature {
  pre_ds,
  pre_stage,
  rem_pre_ds,
  ds_pre_rem,
  double_sig,
  dep_sig_only,
  rem_sig_only,
  retire,
  ds_overlap,
  total_duration,
};
inline constexpr int kFeatureCount = 10;

inline char const* feature_name(Feature f) {
  switch (f) {
    case Feature::pre_ds: return "PreDS";
    case Feature::pre_stage: return "PreStage";
    case Feature::rem_pre_ds: return "RemPreDS";
    case Feature::ds_pre_rem: return "DsPreRem";
    case Feature::double_sig: return "DoubleSig";
    case Feature::dep_sig_only: return "DepSigOnly";
    case Feature::rem_sig_only: return "RemSigOnly";
    case Feature::retire: return "Retire";
    case Feature::ds_overlap: return "DSOverlap";
    case Feature::total_duration: return "TotalDuration";
  }
  return "?";
}

struct DiscretePair {
  std::array<Sign, kFeatureCount> signs{};
  Sec total_duration = 0;
  PairAnatomy::RelativeAge relative_age = PairAnatomy::RelativeAge::younger;
};

inline DiscretePair discretize(PairAnatomy const& a, Sec tau = 0) {
  DiscretePair d;
  d.signs[int(Feature::pre_ds)] = discretize_value(a.pre_ds, tau);
  d.signs[int(Feature::pre_stage)] = discretize_value(a.pre_stage, tau);
  d.signs[int(Feature::rem_pre_ds)] = discretize_value(a.rem_pre_ds, tau);
  d.signs[int(Feature::ds_pre_rem)] = discretize_value(a.ds_pre_rem, tau);
  d.signs[int(Feature::double_sig)] = discretize_value(a.double_sig, tau);
  d.signs[int(Feature::dep_sig_only)] = discretize_value(a.dep_sig_only, tau);
  d.signs[int(Feature::rem_sig_only)] = discretize_value(a.rem_sig_only, tau);
  d.signs[int(Feature::retire)] = discretize_value(a.retire, tau);
  d.signs[int(Feature::ds_overlap)] = discretize_value(a.ds_overlap, tau);
  d.signs[int(Feature::total_duration)] = discretize_value(a.total_duration, tau);
  d.total_duration = a.total_duration;
  d.relative_age = a.relative_age;
  return d;
}

// n departing, m remaining.
inline std::pair<int, int> transition_cardinality(Transition const& tr) {
  return {static_cast<int>(tr.departing.size()), static_cast<int>(tr.remaining.size())};
}

}  // namespace keytrace
