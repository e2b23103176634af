#pragma once

#include <optional>
#include <string>
#include <vector>

#include "keytrace/keytag.hpp"
#include "keytrace/templates.hpp"

namespace keytrace {

enum class Severity { valid, warning, error, noncompliant };

inline char const* severity_name(Severity s) {
  switch (s) {
    case Severity::valid: return "valid";
    case Severity::warning: return "warning";
    case Severity::error: return "error";
    case Severity::noncompliant: return "noncompliant";
  }
  return "?";
}

struct ClassificationOutcome {
  std::string scheme;      // rfc | emergency | behavior | lifecycle
  std::string class_name;
  Severity severity = Severity::valid;
  std::vector<std::string> violated_soft;
  std::vector<std::string> violated_integrity;
  bool rollback = false;  // emergency scheme: transitioning back or aborting
};

// ---------------------------------------------------------------------------
// Trust-anchor-update extras: the departing key must have been seen with the
// revoke bit set while its own signature covered the key rrset. Anything
// less demotes the outcome to a warning.
// ---------------------------------------------------------------------------

struct UpdateTaInputs {
  bool revoked_seen = false;
  bool self_signed_while_revoked = false;
  bool satisfied() const { return revoked_seen && self_signed_while_revoked; }
};

inline UpdateTaInputs update_ta_inputs(KeyLifetime const& dep) {
  UpdateTaInputs u;
  u.revoked_seen = !dep.revoked.empty();
  for (auto const& riv : dep.revoked)
    for (auto const& s : dep.sigs)
      if (s.covered_type == "DNSKEY" && overlaps(Interval{s.inception, s.expiration}, riv))
        u.self_signed_while_revoked = true;
  return u;
}

// ---------------------------------------------------------------------------
// RFC-scheme classification: first template whose mandatory cells all hold.
// ---------------------------------------------------------------------------

inline ClassificationOutcome classify_rfc(DiscretePair const& d, Role role, EvalContext const& ctx,
                                          KeyLifetime const& departing) {
  ClassificationOutcome out;
  out.scheme = "rfc";
  for (auto const& row : builtin_templates()) {
    if (row.scheme != "rfc" || row.role != role) continue;
    auto violated = match_template(row, d, ctx);
    if (!violated) continue;
    out.class_name = row.name;
    for (Feature f : *violated) out.violated_soft.push_back(feature_name(f));
    if (row.name == "KSK Update-TA" && !update_ta_inputs(departing).satisfied())
      out.violated_soft.push_back("Unrevoked");
    out.severity = out.violated_soft.empty() ? Severity::valid : Severity::warning;
    return out;
  }
  out.class_name = "noncompliant";
  out.severity = Severity::noncompliant;
  return out;
}

// ---------------------------------------------------------------------------
// Emergency overlay: evaluated independently of the RFC scheme. The rows are
// mutually exclusive per role (the staging cell differs), so at most one
// matches. Transitions back to an older or equal-age key read as rollbacks.
// ---------------------------------------------------------------------------

inline std::optional<ClassificationOutcome> classify_emergency(DiscretePair const& d, Role role,
                                                               EvalContext const& ctx) {
  for (auto const& row : builtin_templates()) {
    if (row.scheme != "emergency" || row.role != role) continue;
    auto violated = match_template(row, d, ctx);
    if (!violated) continue;
    ClassificationOutcome out;
    out.scheme = "emergency";
    out.class_name = row.name;
    for (Feature f : *violated) out.violated_soft.push_back(feature_name(f));
    out.severity = out.violated_soft.empty() ? Severity::valid : Severity::warning;
    out.rollback = d.relative_age != PairAnatomy::RelativeAge::younger;
    return out;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Behavior classification of the whole transition, over every key of the
// zone-and-role partition active inside the window.
// ---------------------------------------------------------------------------

namespace detail {

// Largest spacing between consecutive polls inside the window; the default
// cutover tolerance, since nothing finer is observable.
inline Sec max_poll_gap(std::vector<PollRecord> const& polls, Interval w) {
  std::vector<Sec> ts;
  for (auto const& p : polls)
    if (w.contains(p.ts)) ts.push_back(p.ts);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  Sec best = 0;
  for (std::size_t i = 1; i < ts.size(); ++i) best = std::max(best, ts[i] - ts[i - 1]);
  return best;
}

}  // namespace detail

inline ClassificationOutcome classify_behavior(Transition const& tr,
                                               std::vector<KeyLifetime> const& lifetimes,
                                               std::vector<PollRecord> const& polls,
                                               Interval window,
                                               std::optional<Sec> epsilon_override = {}) {
  ClassificationOutcome out;
  out.scheme = "behavior";

  std::vector<KeyLifetime const*> partition;
  for (auto const& lt : lifetimes)
    if (lt.zone == tr.zone && lt.has_role(tr.role)) partition.push_back(&lt);

  // Multi-Signature: two keys of the partition actively signing concurrently
  // for a measurable duration, with that concurrency reaching into the
  // window. A handoff where one hull merely touches the other stays eligible
  // for the cutover tiers.
  std::vector<Interval> hulls;
  for (auto const* lt : partition) {
    auto act = detail::activity(*lt);
    if (act) hulls.push_back(*act);
  }
  for (std::size_t i = 0; i < hulls.size(); ++i)
    for (std::size_t j = i + 1; j < hulls.size(); ++j) {
      if (overlap_width(hulls[i], hulls[j]) <= 0) continue;
      auto shared = intersect(hulls[i], hulls[j]);
      if (shared && overlaps(*shared, window)) {
        out.class_name = "Multi-Signature";
        return out;
      }
    }

  // Co-Present: the pair's lifetimes overlap but none of the transition keys
  // was ever observed in use.
  bool any_usage = false;
  for (auto const* lt : tr.departing)
    if (lt->S_alpha) any_usage = true;
  for (auto const* lt : tr.remaining)
    if (lt->S_alpha) any_usage = true;
  if (!any_usage) {
    bool spans_overlap = false;
    for (auto const* d : tr.departing)
      for (auto const* r : tr.remaining)
        if (overlaps(d->L, r->L)) spans_overlap = true;
    out.class_name = spans_overlap ? "Co-Present" : "Unknown";
    return out;
  }

  // Cutover tiers need the one-in-one-out shape with usage on both sides.
  if (tr.departing.size() == 1 && tr.remaining.size() == 1) {
    KeyLifetime const& d = *tr.departing[0];
    KeyLifetime const& r = *tr.remaining[0];
    if (d.S_phi && r.S_alpha && d.S_omega) {
      Sec eps = epsilon_override ? *epsilon_override : detail::max_poll_gap(polls, window);
      Sec s_phi_d = *d.S_phi, s_a_r = *r.S_alpha, s_w_d = *d.S_omega;
      if (s_phi_d <= s_a_r && s_a_r <= s_phi_d + eps) {
        out.class_name = "Cutover";
        return out;
      }
      if (s_phi_d < s_a_r && s_a_r <= s_w_d) {
        out.class_name = "Likely-Cutover";
        return out;
      }
      if (s_w_d < s_a_r) {
        bool foreign = false;
        for (auto const* lt : partition) {
          if (lt == &d || lt == &r) continue;
          for (auto const& s : lt->sigs)
            if (s_w_d < s.inception && s.inception < s_a_r) foreign = true;
        }
        if (!foreign) {
          out.class_name = "Candidate-Cutover";
          return out;
        }
      }
    }
  }
  out.class_name = "Unknown";
  return out;
}

// ---------------------------------------------------------------------------
// Integrity conditions over every poll in the window:
//   dnskey-rrsig-coverage    an observed key rrset has a temporally valid
//                            covering signature,
//   ds-chain-of-trust        in a securely delegated zone, some key-signing
//                            key in use has delegation coverage,
//   data-rrsig-verifiability every signed in-zone data rrset has a valid
//                            signature attributable to a present key.
// ---------------------------------------------------------------------------

namespace detail {

inline bool tag_matches_key(std::string const& zone, DnskeyRdata const& kr, KeyIdentity const& id,
                            RrsigRecord const& sig) {
  if (sig.algorithm != kr.algorithm || detail::normalize_zone(sig.signer) != zone) return false;
  if (detail::canonical_identity(zone, kr) != id) return false;
  return compute_key_tag(kr) == sig.key_tag ||
         compute_key_tag(static_cast<std::uint16_t>(kr.flags & ~kFlagRevoke), kr.protocol,
                         kr.algorithm, kr.public_key) == sig.key_tag;
}

}  // namespace detail

inline std::vector<std::string> verify_integrity(std::string const& zone,
                                                 std::vector<PollRecord> const& polls,
                                                 Interval window, ZoneEvidence const& ev) {
  bool v1 = false, v2 = false, v3 = false;
  bool delegated = false;
  for (auto const& [id, ke] : ev.keys)
    if (!ke.ds_intervals.empty()) delegated = true;

  for (auto const& poll : polls) {
    if (!window.contains(poll.ts)) continue;
    auto const* keyset = poll.find_rrset("DNSKEY");

    if (keyset && !keyset->dnskeys.empty()) {
      bool covered = false;
      for (auto const& sig : keyset->rrsigs)
        if (sig.covered_type == "DNSKEY" && !sig.inverted() && sig.validity().contains(poll.ts))
          covered = true;
      if (!covered) v1 = true;

      if (delegated) {
        // Keys in use now: present keys whose own signature over the key
        // rrset is valid at this instant.
        bool in_use_any = false, in_use_covered = false;
        for (auto const& kr : keyset->dnskeys) {
          KeyIdentity id = detail::canonical_identity(zone, kr);
          bool in_use = false;
          for (auto const& sig : keyset->rrsigs)
            if (sig.covered_type == "DNSKEY" && !sig.inverted() &&
                sig.validity().contains(poll.ts) && detail::tag_matches_key(zone, kr, id, sig))
              in_use = true;
          if (!in_use) continue;
          in_use_any = true;
          auto it = ev.keys.find(id);
          if (it == ev.keys.end()) continue;
          for (Interval iv : it->second.ds_intervals)
            if (iv.contains(poll.ts)) in_use_covered = true;
        }
        if (in_use_any && !in_use_covered) v2 = true;
      }
    }

    for (auto const& rr : poll.rrsets) {
      if (rr.rtype == "DNSKEY" || rr.rrsigs.empty()) continue;
      bool in_zone = false;
      for (auto const& sig : rr.rrsigs)
        if (detail::normalize_zone(sig.signer) == zone) in_zone = true;
      if (!in_zone) continue;  // delegation-side records are judged by the parent
      bool ok = false;
      for (auto const& sig : rr.rrsigs) {
        if (sig.inverted() || !sig.validity().contains(poll.ts)) continue;
        if (detail::normalize_zone(sig.signer) != zone) continue;
        if (!keyset) continue;
        for (auto const& kr : keyset->dnskeys)
          if (detail::tag_matches_key(zone, kr, detail::canonical_identity(zone, kr), sig)) ok = true;
      }
      if (!ok) v3 = true;
    }
  }

  std::vector<std::string> out;
  if (v1) out.push_back("dnskey-rrsig-coverage");
  if (v2) out.push_back("ds-chain-of-trust");
  if (v3) out.push_back("data-rrsig-verifiability");
  return out;
}

// Integrity failures harden an assigned-class outcome to an error; they never
// soften anything.
inline void apply_integrity(ClassificationOutcome& out, std::vector<std::string> const& violations) {
  out.violated_integrity = violations;
  if (!violations.empty() && out.severity != Severity::noncompliant) out.severity = Severity::error;
}

}  // namespace keytrace
