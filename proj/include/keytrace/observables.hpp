#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "keytrace/corpus.hpp"
#include "keytrace/records.hpp"
#include "keytrace/time_types.hpp"

namespace keytrace {

// One continuously-verifiable piece of key evidence: a distinct
// <DNSKEY, covering RRSIG> tuple, its validity interval, the sighting span,
// and any secure-delegation evidence attached to it. Ghosts are evidence-free
// placeholders proposed by bridging; they carry no sighting and no rrsig.
struct Observable {
  enum class Ghost { none, continuity, trailing, leading };

  KeyIdentity key;
  Interval L{};                // covering rrsig validity; for ghosts, the proposed span
  std::optional<Interval> ds;  // delegation evidence overlapping L
  std::optional<Sec> fs, ls;   // first/last sighting
  Ghost ghost = Ghost::none;
  RrsigRecord cov;             // the covering rrsig (non-ghosts)
  Interval gap{};              // the evidence gap a ghost was proposed for

  bool is_ghost() const { return ghost != Ghost::none; }
  // Earliest/latest instant this observable vouches for.
  Sec min_t() const { return fs ? std::min(L.lo, *fs) : L.lo; }
  Sec max_t() const { return ls ? std::max(L.hi, *ls) : L.hi; }
};

struct KeyEvidence {
  std::vector<RrsigRecord> generated;                    // rrsigs this key produced
  std::vector<Interval> ds_intervals;                    // parent rrsig validity over matching DS
  std::vector<std::pair<Sec, std::uint16_t>> sightings;  // (poll ts, flags as seen)
  int valid_covering = 0;
  int inverted_covering = 0;
};

struct ZoneEvidence {
  std::string zone;
  std::vector<Observable> observables;
  std::map<KeyIdentity, KeyEvidence> keys;
};

using EvidenceMap = std::map<std::string, ZoneEvidence>;

namespace detail {

struct TupleAcc {
  Sec fs = 0, ls = 0;
};

inline TrackedKey const* find_tracked(ZoneData const& zd, int key_tag, int algorithm) {
  for (auto const& tk : zd.keys) {
    if (tk.id.algorithm != algorithm) continue;
    for (auto const& [flags, tag] : tk.variant_tags)
      if (tag == key_tag) return &tk;
  }
  return nullptr;
}

}  // namespace detail

// Builds per-zone observables and per-key evidence for the whole corpus in
// one pass. Attribution of generated rrsigs is global: a signature found in a
// child zone whose signer is the parent contributes to the parent key's
// evidence (that is how parent keys acquire their DS-signing activity).
inline EvidenceMap build_evidence(Corpus const& corpus, SigIndex const& index) {
  EvidenceMap out;
  for (auto const& [zone, zd] : corpus.zones) out[zone].zone = zone;

  // Distinct <key, covering rrsig> tuples and their sighting spans.
  std::map<std::string, std::map<std::pair<KeyIdentity, RrsigRecord>, detail::TupleAcc>> tuples;
  std::map<std::string, std::map<KeyIdentity, std::set<RrsigRecord>>> inverted_seen, valid_seen;
  std::map<KeyIdentity, std::set<RrsigRecord>> generated;
  std::map<KeyIdentity, std::set<Interval>> ds_seen;

  for (auto const& [zone, zd] : corpus.zones) {
    for (auto const& poll : zd.polls) {
      for (auto const& rr : poll.rrsets) {
        if (rr.rtype == "DNSKEY") {
          for (auto const& kr : rr.dnskeys) {
            KeyIdentity id = detail::canonical_identity(zone, kr);
            auto& ev = out[zone].keys[id];
            ev.sightings.emplace_back(poll.ts, kr.flags);
            for (auto const& sig : rr.rrsigs) {
              if (sig.covered_type != "DNSKEY") continue;
              if (sig.inverted()) {
                inverted_seen[zone][id].insert(sig);
                continue;
              }
              valid_seen[zone][id].insert(sig);
              auto& acc = tuples[zone][{id, sig}];
              if (acc.fs == 0 || poll.ts < acc.fs) acc.fs = poll.ts;
              if (poll.ts > acc.ls) acc.ls = poll.ts;
            }
          }
        } else if (rr.rtype == "DS") {
          for (auto const& sig : rr.rrsigs) {
            if (sig.covered_type != "DS" || sig.inverted()) continue;
            for (auto const& d : rr.ds) {
              auto const* tk = detail::find_tracked(zd, d.key_tag, d.algorithm);
              if (!tk) continue;
              ds_seen[tk->id].insert(sig.validity());
            }
          }
        }
        for (auto const& sig : rr.rrsigs) {
          auto const* cands = index.lookup(sig);
          if (!cands) continue;
          for (KeyIdentity const* k : *cands) generated[*k].insert(sig);
        }
      }
    }
  }

  for (auto& [zone, per_key] : tuples) {
    for (auto& [tup, acc] : per_key) {
      Observable ob;
      ob.key = tup.first;
      ob.cov = tup.second;
      ob.L = tup.second.validity();
      ob.fs = acc.fs;
      ob.ls = acc.ls;
      out[zone].observables.push_back(std::move(ob));
    }
  }
  for (auto& [zone, ze] : out) {
    for (auto& [id, ev] : ze.keys) {
      std::sort(ev.sightings.begin(), ev.sightings.end());
      ev.sightings.erase(std::unique(ev.sightings.begin(), ev.sightings.end()), ev.sightings.end());
      if (auto it = valid_seen[zone].find(id); it != valid_seen[zone].end())
        ev.valid_covering = static_cast<int>(it->second.size());
      if (auto it = inverted_seen[zone].find(id); it != inverted_seen[zone].end())
        ev.inverted_covering = static_cast<int>(it->second.size());
      if (auto it = ds_seen.find(id); it != ds_seen.end())
        ev.ds_intervals.assign(it->second.begin(), it->second.end());
      if (auto it = generated.find(id); it != generated.end())
        ev.generated.assign(it->second.begin(), it->second.end());
    }
    // Attach delegation evidence to each observable: the hull of DS intervals
    // overlapping its validity.
    for (auto& ob : ze.observables) {
      auto const& ev = ze.keys[ob.key];
      std::optional<Interval> hull;
      for (Interval iv : ev.ds_intervals) {
        if (!overlaps(iv, ob.L)) continue;
        if (!hull)
          hull = iv;
        else
          hull = Interval{std::min(hull->lo, iv.lo), std::max(hull->hi, iv.hi)};
      }
      ob.ds = hull;
    }
    std::sort(ze.observables.begin(), ze.observables.end(), [](Observable const& a, Observable const& b) {
      return std::tie(a.key, a.L.lo, a.L.hi, a.cov) < std::tie(b.key, b.L.lo, b.L.hi, b.cov);
    });
  }
  return out;
}

}  // namespace keytrace
