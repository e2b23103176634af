#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "keytrace/observables.hpp"

namespace keytrace {

// ---------------------------------------------------------------------------
// Bridging: propose ghosts over evidence gaps.
//
// A gap exists between two observables when the latest instant vouched for by
// one lies strictly before the earliest instant of the next. Same-key gaps
// (the key was re-signed but we missed the middle) get one continuity ghost
// spanning exactly the missing time. Zone-level gaps, where no key has any
// evidence at all and the keys on each side differ, get a trailing ghost for
// each key that held the old frontier and a leading ghost for each key that
// reappears first; the leading ghost starts one second after the frontier so
// the hand-off order stays expressible.
// ---------------------------------------------------------------------------

inline std::vector<Observable> bridge(std::vector<Observable> obs) {
  std::vector<Observable> ghosts;

  // Per-key continuity ghosts between consecutive observables of that key.
  std::map<KeyIdentity, std::vector<Observable const*>> per_key;
  for (auto const& ob : obs)
    if (!ob.is_ghost()) per_key[ob.key].push_back(&ob);
  for (auto& [key, list] : per_key) {
    std::sort(list.begin(), list.end(), [](Observable const* a, Observable const* b) {
      return std::tie(a->L.lo, a->L.hi) < std::tie(b->L.lo, b->L.hi);
    });
    Sec frontier = std::numeric_limits<Sec>::min();
    for (Observable const* ob : list) {
      if (frontier != std::numeric_limits<Sec>::min() && frontier < ob->min_t()) {
        Observable g;
        g.key = key;
        g.ghost = Observable::Ghost::continuity;
        g.L = {frontier, ob->min_t()};
        g.gap = g.L;
        ghosts.push_back(std::move(g));
      }
      frontier = std::max(frontier, ob->max_t());
    }
  }

  // Zone-level gaps via a coverage-frontier sweep over all real observables.
  std::vector<Observable const*> all;
  for (auto const& ob : obs)
    if (!ob.is_ghost()) all.push_back(&ob);
  std::sort(all.begin(), all.end(), [](Observable const* a, Observable const* b) {
    return std::tie(a->L.lo, a->L.hi) < std::tie(b->L.lo, b->L.hi);
  });
  std::size_t i = 0;
  Sec frontier = std::numeric_limits<Sec>::min();
  std::set<KeyIdentity> frontier_keys;
  while (i < all.size()) {
    Observable const* ob = all[i];
    if (frontier != std::numeric_limits<Sec>::min() && ob->min_t() > frontier) {
      Interval gap{frontier, ob->min_t()};
      std::set<KeyIdentity> newer;
      for (std::size_t j = i; j < all.size() && all[j]->min_t() == gap.hi; ++j)
        newer.insert(all[j]->key);
      for (KeyIdentity const& x : frontier_keys) {
        if (newer.count(x)) continue;  // same key on both sides: continuity ghost covers it
        Observable g;
        g.key = x;
        g.ghost = Observable::Ghost::trailing;
        g.L = gap;
        g.gap = gap;
        ghosts.push_back(std::move(g));
      }
      for (KeyIdentity const& y : newer) {
        if (frontier_keys.count(y)) continue;
        Observable g;
        g.key = y;
        g.ghost = Observable::Ghost::leading;
        g.L = {gap.lo + 1, gap.hi};
        g.gap = gap;
        if (g.L.valid()) ghosts.push_back(std::move(g));
      }
    }
    if (ob->max_t() > frontier) {
      frontier = ob->max_t();
      frontier_keys = {ob->key};
    } else if (ob->max_t() == frontier) {
      frontier_keys.insert(ob->key);
    }
    ++i;
  }

  for (auto& g : ghosts) obs.push_back(std::move(g));
  return obs;
}

// ---------------------------------------------------------------------------
// Outage thresholds: per zone, per calendar year of this zone's polling, the
// mean and population standard deviation of gaps between consecutive polls.
// A gap belongs to the year of the poll that closes it (a gap only becomes
// observable once a poll ends it). Years with fewer than two polls carry no
// statistics and inherit the nearest year's threshold on lookup.
// ---------------------------------------------------------------------------

struct OutageThreshold {
  int year = 0;
  double mean_gap = 0;
  double stddev_gap = 0;
  double threshold = 0;  // mean + sigma_factor * stddev
};

inline std::vector<OutageThreshold> detect_outages(std::vector<Sec> poll_ts, double sigma_factor = 4.0) {
  std::sort(poll_ts.begin(), poll_ts.end());
  poll_ts.erase(std::unique(poll_ts.begin(), poll_ts.end()), poll_ts.end());
  std::map<int, std::vector<Sec>> gaps_by_year;
  for (std::size_t i = 1; i < poll_ts.size(); ++i)
    gaps_by_year[year_utc(poll_ts[i])].push_back(poll_ts[i] - poll_ts[i - 1]);
  std::vector<OutageThreshold> out;
  for (auto const& [year, gaps] : gaps_by_year) {
    double n = static_cast<double>(gaps.size());
    double mean = 0;
    for (Sec g : gaps) mean += static_cast<double>(g);
    mean /= n;
    double var = 0;
    for (Sec g : gaps) var += (static_cast<double>(g) - mean) * (static_cast<double>(g) - mean);
    var /= n;
    out.push_back({year, mean, std::sqrt(var), mean + sigma_factor * std::sqrt(var)});
  }
  return out;
}

// Threshold applicable to a given year; years without their own statistics
// inherit the nearest year's (earlier year wins a tie). No statistics at all
// means nothing can be declared an outage.
inline double threshold_for_year(std::vector<OutageThreshold> const& ths, int year) {
  if (ths.empty()) return std::numeric_limits<double>::infinity();
  OutageThreshold const* best = nullptr;
  for (auto const& t : ths) {
    if (!best) {
      best = &t;
      continue;
    }
    int d_new = std::abs(t.year - year), d_old = std::abs(best->year - year);
    if (d_new < d_old || (d_new == d_old && t.year < best->year)) best = &t;
  }
  return best->threshold;
}

// ---------------------------------------------------------------------------
// Busting: confront ghosts with what the polls actually showed.
//
//  (1) cross-key ghost overlaps resolve against signing evidence inside the
//      gap: the newer key's earliest in-gap signature caps the trailing
//      ghost, the older key's latest in-gap signature pushes the leading
//      ghost forward; a ghost whose own key signed inside the gap is affirmed
//      and never loses to the partner's evidence,
//  (2) any poll that showed the zone's DNSKEY rrset without the ghost's key
//      cuts that instant out of the ghost,
//  (3) ghost pieces must stay anchored to the side(s) backed by a real
//      observable: trailing ghosts keep only the start-anchored piece,
//      leading ghosts the end-anchored piece, continuity ghosts both,
//  (4) pieces longer than the outage threshold of the year they start in are
//      dropped, unless the key was seen signing strictly inside the piece.
// ---------------------------------------------------------------------------

inline std::vector<Observable> bust(std::vector<Observable> obs, ZoneData const& zd,
                                    ZoneEvidence const& ev,
                                    std::vector<OutageThreshold> const& thresholds) {
  auto inceptions_in = [&](KeyIdentity const& key, Interval iv) {
    std::vector<Sec> r;
    auto it = ev.keys.find(key);
    if (it == ev.keys.end()) return r;
    for (auto const& sig : it->second.generated)
      if (iv.contains(sig.inception)) r.push_back(sig.inception);
    return r;
  };

  // Boundary keys per gap, for cross-ghost resolution.
  std::map<Interval, std::pair<std::set<KeyIdentity>, std::set<KeyIdentity>>> gap_sides;
  for (auto const& ob : obs) {
    if (ob.ghost == Observable::Ghost::trailing) gap_sides[ob.gap].first.insert(ob.key);
    if (ob.ghost == Observable::Ghost::leading) gap_sides[ob.gap].second.insert(ob.key);
  }

  std::vector<Observable> out;
  for (auto& ob : obs) {
    if (!ob.is_ghost()) {
      out.push_back(std::move(ob));
      continue;
    }
    Interval span = ob.L;

    if (ob.ghost == Observable::Ghost::trailing || ob.ghost == Observable::Ghost::leading) {
      auto sides = gap_sides[ob.gap];
      auto own = inceptions_in(ob.key, ob.gap);
      Sec own_last = own.empty() ? std::numeric_limits<Sec>::min() : *std::max_element(own.begin(), own.end());
      if (ob.ghost == Observable::Ghost::trailing) {
        Sec partner_first = std::numeric_limits<Sec>::max();
        for (auto const& y : sides.second)
          for (Sec t : inceptions_in(y, ob.gap)) partner_first = std::min(partner_first, t);
        if (partner_first != std::numeric_limits<Sec>::max() && own_last < partner_first)
          span.hi = std::min(span.hi, partner_first - 1);
      } else {
        Sec partner_last = std::numeric_limits<Sec>::min();
        for (auto const& x : sides.first)
          for (Sec t : inceptions_in(x, ob.gap)) partner_last = std::max(partner_last, t);
        auto own_first_v = inceptions_in(ob.key, ob.gap);
        Sec own_first = own_first_v.empty() ? std::numeric_limits<Sec>::max()
                                            : *std::min_element(own_first_v.begin(), own_first_v.end());
        if (partner_last != std::numeric_limits<Sec>::min() && own_first > partner_last)
          span.lo = std::max(span.lo, partner_last + 1);
      }
      if (!span.valid()) continue;
    }

    // Polls that showed the DNSKEY rrset without this key contradict the ghost
    // at that instant.
    std::vector<Sec> cuts;
    for (auto const& poll : zd.polls) {
      if (!span.contains(poll.ts)) continue;
      auto const* rr = poll.find_rrset("DNSKEY");
      if (!rr) continue;
      bool present = false;
      for (auto const& kr : rr->dnskeys)
        if (detail::canonical_identity(zd.zone, kr) == ob.key) {
          present = true;
          break;
        }
      if (!present) cuts.push_back(poll.ts);
    }
    std::vector<Interval> pieces = subtract_instants(span, std::move(cuts));

    for (Interval piece : pieces) {
      bool start_anchored = piece.lo == ob.L.lo || piece.lo == span.lo;
      bool end_anchored = piece.hi == ob.L.hi || piece.hi == span.hi;
      if (ob.ghost == Observable::Ghost::trailing && !(piece.lo == span.lo)) continue;
      if (ob.ghost == Observable::Ghost::leading && !(piece.hi == span.hi)) continue;
      if (ob.ghost == Observable::Ghost::continuity && !start_anchored && !end_anchored) continue;

      // Affirmation needs an inception strictly inside the piece: an
      // inception sitting on an endpoint is just the neighbouring
      // observable's own evidence and says nothing about the interior.
      bool affirmed = false;
      for (Sec t : inceptions_in(ob.key, piece))
        if (t > piece.lo && t < piece.hi) { affirmed = true; break; }
      double thr = threshold_for_year(thresholds, year_utc(piece.lo));
      if (!affirmed && static_cast<double>(width(piece)) > thr) continue;

      Observable g = ob;
      g.L = piece;
      out.push_back(std::move(g));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binding: contiguous runs of per-key observables become key lifetimes.
// ---------------------------------------------------------------------------

enum class Role { ksk, zsk };

inline char const* role_name(Role r) { return r == Role::ksk ? "KSK" : "ZSK"; }

struct SigSummary {
  std::string covered_type;
  Sec inception = 0;
  Sec expiration = 0;
  auto tie() const { return std::tie(covered_type, inception, expiration); }
  bool operator==(SigSummary const&) const = default;
  bool operator<(SigSummary const& o) const { return tie() < o.tie(); }
};

struct KeyLifetime {
  std::string zone;
  KeyIdentity key;
  Interval L{};  // earliest/latest rrsig-backed validity of the run
  std::optional<Sec> S_alpha, S_phi, S_omega;
  std::optional<Interval> DS;
  std::optional<Sec> fs, ls;
  bool role_ksk = false, role_zsk = false;
  std::vector<Interval> revoked;
  double avg_sig_validity = 0;
  std::vector<Interval> ghosts;    // surviving ghost pieces glued into the run
  std::vector<Interval> coverage;  // merged covering-rrsig validity
  std::vector<SigSummary> sigs;    // generated signatures assigned to the run
  int covering_count = 0;
  int inverted_covering = 0;

  bool has_role(Role r) const { return r == Role::ksk ? role_ksk : role_zsk; }
  Interval span() const { return L; }
};

// Role of a lifetime: verifying a DNSKEY rrset makes a key a KSK, verifying
// anything else makes it a ZSK; a key never seen verifying falls back to its
// SEP bit. A key may hold both roles.
inline void infer_role(KeyLifetime& lt) {
  lt.role_ksk = lt.role_zsk = false;
  for (auto const& s : lt.sigs) {
    if (s.covered_type == "DNSKEY")
      lt.role_ksk = true;
    else
      lt.role_zsk = true;
  }
  if (!lt.role_ksk && !lt.role_zsk) {
    if (lt.key.sep())
      lt.role_ksk = true;
    else
      lt.role_zsk = true;
  }
}

inline std::vector<KeyLifetime> bind(std::vector<Observable> const& obs, ZoneEvidence const& ev,
                                     std::string const& zone) {
  std::map<KeyIdentity, std::vector<Observable const*>> per_key;
  for (auto const& ob : obs) per_key[ob.key].push_back(&ob);

  std::vector<KeyLifetime> out;
  for (auto& [key, list] : per_key) {
    std::sort(list.begin(), list.end(), [](Observable const* a, Observable const* b) {
      return std::tie(a->L.lo, a->L.hi) < std::tie(b->L.lo, b->L.hi);
    });
    std::vector<std::vector<Observable const*>> runs;
    Sec run_max = 0;
    for (Observable const* ob : list) {
      if (runs.empty() || ob->min_t() > run_max) {
        runs.push_back({ob});
        run_max = ob->max_t();
      } else {
        runs.back().push_back(ob);
        run_max = std::max(run_max, ob->max_t());
      }
    }

    auto evit = ev.keys.find(key);
    KeyEvidence const* ke = evit == ev.keys.end() ? nullptr : &evit->second;

    for (auto const& run : runs) {
      KeyLifetime lt;
      lt.zone = zone;
      lt.key = key;
      bool any_real = false;
      std::vector<Interval> cov;
      double validity_sum = 0;
      int validity_n = 0;
      for (Observable const* ob : run) {
        if (ob->is_ghost()) {
          lt.ghosts.push_back(ob->L);
          continue;
        }
        if (!any_real) {
          lt.L = ob->L;
          any_real = true;
        } else {
          lt.L.lo = std::min(lt.L.lo, ob->L.lo);
          lt.L.hi = std::max(lt.L.hi, ob->L.hi);
        }
        if (ob->fs) lt.fs = lt.fs ? std::min(*lt.fs, *ob->fs) : *ob->fs;
        if (ob->ls) lt.ls = lt.ls ? std::max(*lt.ls, *ob->ls) : *ob->ls;
        cov.push_back(ob->L);
        validity_sum += static_cast<double>(width(ob->L));
        ++validity_n;
      }
      if (!any_real) continue;  // a run of ghosts alone carries no evidence
      lt.coverage = merge_instants(std::move(cov));
      lt.covering_count = validity_n;
      lt.avg_sig_validity = validity_n > 0 ? validity_sum / validity_n : 0;

      if (ke) {
        lt.inverted_covering = ke->inverted_covering;
        for (auto const& sig : ke->generated) {
          if (!overlaps(sig.validity(), lt.L)) continue;
          lt.sigs.push_back({sig.covered_type, sig.inception, sig.expiration});
        }
        std::sort(lt.sigs.begin(), lt.sigs.end());
        for (auto const& s : lt.sigs) {
          lt.S_alpha = lt.S_alpha ? std::min(*lt.S_alpha, s.inception) : s.inception;
          lt.S_phi = lt.S_phi ? std::max(*lt.S_phi, s.inception) : s.inception;
          lt.S_omega = lt.S_omega ? std::max(*lt.S_omega, s.expiration) : s.expiration;
        }
        for (Interval iv : ke->ds_intervals) {
          if (!overlaps(iv, lt.L)) continue;
          if (!lt.DS)
            lt.DS = iv;
          else
            lt.DS = Interval{std::min(lt.DS->lo, iv.lo), std::max(lt.DS->hi, iv.hi)};
        }
        // Revoked intervals: consecutive sightings with the revoke bit set,
        // within this run's sighting span.
        std::optional<Interval> cur;
        for (auto const& [ts, flags] : ke->sightings) {
          if (lt.fs && (ts < *lt.fs || ts > *lt.ls)) continue;
          if (flags & kFlagRevoke) {
            if (cur)
              cur->hi = ts;
            else
              cur = Interval{ts, ts};
          } else if (cur) {
            lt.revoked.push_back(*cur);
            cur.reset();
          }
        }
        if (cur) lt.revoked.push_back(*cur);
      }
      infer_role(lt);
      out.push_back(std::move(lt));
    }

    // Keys sighted but never covered by any valid rrsig still existed:
    // synthesize a degenerate lifetime from the sightings alone.
    if (runs.empty() && ke && !ke->sightings.empty()) {
      KeyLifetime lt;
      lt.zone = zone;
      lt.key = key;
      lt.fs = ke->sightings.front().first;
      lt.ls = ke->sightings.back().first;
      lt.L = {*lt.fs, *lt.ls};
      lt.inverted_covering = ke->inverted_covering;
      infer_role(lt);
      out.push_back(std::move(lt));
    }
  }

  // Sighting-only keys with no observables at all never enter per_key above;
  // sweep evidence for them.
  for (auto const& [key, ke] : ev.keys) {
    if (per_key.count(key) || ke.sightings.empty() || ke.valid_covering > 0) continue;
    KeyLifetime lt;
    lt.zone = zone;
    lt.key = key;
    lt.fs = ke.sightings.front().first;
    lt.ls = ke.sightings.back().first;
    lt.L = {*lt.fs, *lt.ls};
    lt.inverted_covering = ke.inverted_covering;
    infer_role(lt);
    out.push_back(std::move(lt));
  }

  std::sort(out.begin(), out.end(), [](KeyLifetime const& a, KeyLifetime const& b) {
    return std::tie(a.key, a.L.lo, a.L.hi) < std::tie(b.key, b.L.lo, b.L.hi);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Lifecycle states: a fixed-order decision tree; the first matching state
// wins, so every lifetime lands in exactly one.
// ---------------------------------------------------------------------------

enum class LifecycleState {
  never_signed,
  inverted_signature,
  served_before_inception,
  served_after_expiration,
  published_never_seen,
  coverage_gap,
  valid,
};

inline char const* lifecycle_state_name(LifecycleState s) {
  switch (s) {
    case LifecycleState::never_signed: return "NeverSigned";
    case LifecycleState::inverted_signature: return "InvertedSignature";
    case LifecycleState::served_before_inception: return "ServedBeforeInception";
    case LifecycleState::served_after_expiration: return "ServedAfterExpiration";
    case LifecycleState::published_never_seen: return "PublishedNeverSeen";
    case LifecycleState::coverage_gap: return "CoverageGap";
    case LifecycleState::valid: return "Valid";
  }
  return "?";
}

inline LifecycleState classify_lifecycle(KeyLifetime const& lt) {
  if (lt.covering_count == 0 && lt.inverted_covering == 0) return LifecycleState::never_signed;
  if (lt.inverted_covering > 0) return LifecycleState::inverted_signature;
  if (lt.fs && *lt.fs < lt.L.lo) return LifecycleState::served_before_inception;
  if (lt.ls && *lt.ls > lt.L.hi) return LifecycleState::served_after_expiration;
  if (!lt.fs) return LifecycleState::published_never_seen;
  // Interior sub-interval of [fs, ls] not covered by any valid rrsig.
  Sec cursor = *lt.fs;
  for (Interval iv : lt.coverage) {
    if (iv.hi < cursor) continue;
    if (iv.lo > cursor) return LifecycleState::coverage_gap;
    cursor = iv.hi + 1;
    if (cursor > *lt.ls) break;
  }
  if (cursor <= *lt.ls) return LifecycleState::coverage_gap;
  return LifecycleState::valid;
}

}  // namespace keytrace
