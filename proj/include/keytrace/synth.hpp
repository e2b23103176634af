#pragma once

// Synthetic corpus generation. A scenario scripts one child zone: which keys
// exist when, which rrsets they sign over which windows, and how the parent
// publishes DS records. The script is rendered through the same serving model
// a resolver would see (per signer, the freshest signature that is valid for
// the currently published rrset version), and the ground truth is derived
// from exactly the signatures that made it into a poll, so an undersampled
// rendering of the same script yields a correspondingly thinner truth.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "keytrace/base64.hpp"
#include "keytrace/corpus.hpp"
#include "keytrace/lifecycle.hpp"
#include "keytrace/records.hpp"
#include "keytrace/time_types.hpp"

namespace keytrace::synth {

struct InvalidScenario : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HorizonTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr Sec kForever = std::numeric_limits<Sec>::max() / 4;
constexpr int kParentTag = 21345;

struct Scenario {
  std::string process = "zsk-pre-publication";
  std::vector<std::string> perturbations;  // at most one token
  std::uint64_t seed = 0;
  Sec sig_validity = days(30);
  Sec resign_interval = days(15);
  Sec ttl = days(2);
  Sec poll_interval = days(1);
  Sec jitter = 0;
  Sec t0 = 1300000000;
  int n_departing = 1;  // multi-signer cardinality
  int n_remaining = 1;
};

// ---------------------------------------------------------------------------
// Script model. Times are offsets in seconds from the first poll; negative
// inceptions are allowed (signatures made before polling began, visible while
// still the freshest). A tick window re-signs on the resign grid anchored at
// its start, plus at every rrset version change inside the window; pre-poll
// grid points other than the start are dropped, since those signatures would
// have been replaced before anything observed them. A single window signs
// exactly once.
// ---------------------------------------------------------------------------

struct SignWindow {
  Sec lo = 0, hi = 0;
  std::string rtype = "DNSKEY";
  bool tick = true;
  std::optional<Sec> clamp_exp;  // expirations cut at this instant
};

inline SignWindow tickw(Sec lo, Sec hi, std::string rtype = "DNSKEY",
                        std::optional<Sec> clamp = {}) {
  return {lo, hi, std::move(rtype), true, clamp};
}
inline SignWindow single(Sec at, std::string rtype = "DNSKEY", std::optional<Sec> clamp = {}) {
  return {at, at, std::move(rtype), false, clamp};
}

// Parent-side publication span of this key's DS record, [lo, hi). With clamp
// set, parent signatures over rrset versions containing this record expire no
// later than hi.
struct DsSpan {
  Sec lo = 0, hi = kForever;
  bool clamp = false;
};

struct KeyScript {
  std::string label;
  std::uint16_t flags = kFlagZone;
  int algorithm = 8;
  Sec add = 0, remove = kForever;  // DNSKEY rrset membership [add, remove)
  std::vector<SignWindow> windows;
  std::vector<DsSpan> ds;
  std::optional<Interval> revoke;  // sighted with the revoke bit in [lo, hi)
};

struct ZoneScript {
  std::string zone = "test.example.";
  std::string parent = "example.";
  Sec horizon = days(100);
  std::vector<KeyScript> keys;
  std::vector<Sec> poll_offsets;  // explicit schedule; empty = poll_interval grid
};

// ---------------------------------------------------------------------------
// Ground truth and per-scenario expectations.
// ---------------------------------------------------------------------------

struct TruthKey {
  std::string label;
  KeyIdentity key;
  Interval L{};
  std::optional<Sec> s_alpha, s_phi, s_omega;
  std::optional<Interval> ds;
  std::optional<Sec> fs, ls;
  bool role_ksk = false, role_zsk = false;
  bool contiguous = true;  // served covering validity merges into one piece
};

struct PairExpectation {
  std::string departing, remaining;  // labels
  std::string rfc_class;             // empty = not asserted
  std::vector<std::string> rfc_warnings;
  std::string rfc_severity;  // empty = implied by warnings
  std::string emergency_class;
  bool emergency_checked = false;  // when set and class empty, expect no overlay row
  std::vector<std::string> emergency_warnings;
  std::string behavior;  // transition-level expectation
};

struct GroundTruth {
  std::string zone, process, perturbation;
  Sec t0 = 0, horizon_abs = 0;
  std::vector<TruthKey> keys;
  std::vector<PairExpectation> pairs;
  int n_departing = 1, n_remaining = 1;
  bool cardinality_checked = false;
  bool integrity_clean = true;

  TruthKey const* find(std::string const& label) const {
    for (auto const& k : keys)
      if (k.label == label) return &k;
    return nullptr;
  }
};

struct Generated {
  std::vector<PollRecord> polls;
  GroundTruth truth;
};

struct Script {
  ZoneScript zone;
  GroundTruth truth;
};

// ---------------------------------------------------------------------------
// Deterministic key material.
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t fnv64(std::string const& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// A public key whose canonical and revoked-variant tags collide with nothing
// else in the zone; the revoke bit changes the wire tag, so both are reserved.
inline DnskeyRdata make_material(KeyScript const& ks, std::set<int>& used) {
  for (std::uint64_t bump = 0;; ++bump) {
    std::vector<std::uint8_t> bytes(12);
    std::uint64_t h = fnv64(ks.label) + bump * 0x9e3779b97f4a7c15ull;
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = mix64(h + i) & 0xff;
    DnskeyRdata k;
    k.flags = ks.flags;
    k.protocol = 3;
    k.algorithm = ks.algorithm;
    k.public_key = base64_encode(bytes);
    int tag = compute_key_tag(k);
    int rtag = compute_key_tag(static_cast<std::uint16_t>(ks.flags | kFlagRevoke), 3,
                               ks.algorithm, k.public_key);
    if (tag == rtag || used.count(tag) || used.count(rtag)) continue;
    used.insert(tag);
    used.insert(rtag);
    return k;
  }
}

inline std::string make_digest(std::string const& label) {
  static char const* hex = "0123456789abcdef";
  std::string out;
  std::uint64_t h = fnv64(label) ^ 0xd1fe57ull;
  for (int i = 0; i < 64; ++i) out += hex[mix64(h + i) & 0xf];
  return out;
}

// Published-rrset versions: starts[i] opens the member set members[i].
struct Timeline {
  std::vector<Sec> starts;
  std::vector<std::vector<int>> members;

  bool empty() const { return starts.empty(); }
  int at(Sec t) const {
    int idx = 0;
    for (std::size_t i = 0; i < starts.size(); ++i)
      if (starts[i] <= t) idx = static_cast<int>(i);
    return idx;
  }
  Sec end_of(int v) const {
    return v + 1 < static_cast<int>(starts.size()) ? starts[v + 1] : kForever;
  }
};

inline Timeline dnskey_timeline(ZoneScript const& zs) {
  std::set<Sec> cuts{0};
  for (auto const& k : zs.keys) {
    if (k.add > 0 && k.add <= zs.horizon) cuts.insert(k.add);
    if (k.remove > 0 && k.remove <= zs.horizon) cuts.insert(k.remove);
  }
  Timeline tl;
  for (Sec s : cuts) {
    std::vector<int> m;
    for (std::size_t i = 0; i < zs.keys.size(); ++i)
      if (zs.keys[i].add <= s && s < zs.keys[i].remove) m.push_back(static_cast<int>(i));
    tl.starts.push_back(s);
    tl.members.push_back(std::move(m));
  }
  return tl;
}

inline Timeline ds_timeline(ZoneScript const& zs) {
  std::set<Sec> cuts;
  for (auto const& k : zs.keys)
    for (auto const& sp : k.ds) {
      cuts.insert(sp.lo);
      if (sp.hi < kForever && sp.hi <= zs.horizon) cuts.insert(sp.hi);
    }
  Timeline tl;
  for (Sec s : cuts) {
    std::vector<int> m;
    for (std::size_t i = 0; i < zs.keys.size(); ++i)
      for (auto const& sp : zs.keys[i].ds)
        if (sp.lo <= s && s < sp.hi) {
          m.push_back(static_cast<int>(i));
          break;
        }
    tl.starts.push_back(s);
    tl.members.push_back(std::move(m));
  }
  return tl;
}

struct LedgerSig {
  int signer = -1;  // key index; -1 = parent
  std::string rtype;
  int version = -1;  // -1 for unversioned data rtypes
  Sec inception = 0, expiration = 0;
  int tag = 0;
  bool served = false;
};

inline int tag_at(std::vector<DnskeyRdata> const& mat, KeyScript const& ks, int idx, Sec t) {
  bool revoked = ks.revoke && ks.revoke->lo <= t && t < ks.revoke->hi;
  if (!revoked) return compute_key_tag(mat[idx]);
  return compute_key_tag(static_cast<std::uint16_t>(ks.flags | kFlagRevoke), 3, ks.algorithm,
                         mat[idx].public_key);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Rendering: script -> polls + truth.
// ---------------------------------------------------------------------------

inline Generated render(ZoneScript const& zs, Scenario const& sc, GroundTruth truth) {
  std::set<int> used{kParentTag};
  std::vector<DnskeyRdata> material;
  for (auto const& k : zs.keys) material.push_back(detail::make_material(k, used));

  detail::Timeline ktl = detail::dnskey_timeline(zs);
  detail::Timeline dtl = detail::ds_timeline(zs);

  // Signature ledger. Duplicate (signer, rtype, version, inception) events
  // merge keeping the longest expiration.
  std::map<std::tuple<int, std::string, int, Sec>, Sec> acc;
  auto put = [&](int signer, std::string const& rtype, int ver, Sec inc, Sec exp) {
    if (exp <= inc) return;  // a degenerate signature would read as inverted downstream
    auto key = std::make_tuple(signer, rtype, ver, inc);
    auto it = acc.find(key);
    if (it == acc.end() || it->second < exp) acc[key] = exp;
  };

  for (std::size_t i = 0; i < zs.keys.size(); ++i) {
    for (auto const& w : zs.keys[i].windows) {
      bool versioned = w.rtype == "DNSKEY";
      std::set<Sec> ev;
      if (!w.tick) {
        ev.insert(w.lo);
      } else {
        ev.insert(w.lo);
        for (Sec t = w.lo; t <= w.hi; t += sc.resign_interval)
          if (t >= 0) ev.insert(t);
        if (versioned)
          for (Sec b : ktl.starts)
            // Re-sign on membership changes, but not at the timeline origin:
            // a fresh origin signature would mask backdated ones at every poll.
            if (b > w.lo && b <= w.hi && b != ktl.starts.front()) ev.insert(b);
      }
      for (Sec t : ev) {
        Sec exp = t + sc.sig_validity;
        if (w.clamp_exp) exp = std::min(exp, *w.clamp_exp);
        int ver = versioned ? ktl.at(std::max<Sec>(t, 0)) : -1;
        put(static_cast<int>(i), w.rtype, ver, t, exp);
      }
    }
  }

  if (!dtl.empty()) {
    Sec anchor = dtl.starts.front();
    for (std::size_t v = 0; v < dtl.starts.size(); ++v) {
      if (dtl.members[v].empty()) continue;
      Sec vlo = dtl.starts[v], vhi = dtl.end_of(static_cast<int>(v));
      std::optional<Sec> clamp;
      for (int idx : dtl.members[v])
        for (auto const& sp : zs.keys[idx].ds)
          if (sp.clamp && sp.lo <= vlo && vlo < sp.hi)
            clamp = clamp ? std::min(*clamp, sp.hi) : sp.hi;
      std::set<Sec> ev{vlo};
      for (Sec t = anchor; t < vhi && t <= zs.horizon; t += sc.resign_interval)
        if (t >= 0 && t > vlo) ev.insert(t);
      for (Sec t : ev) {
        Sec exp = t + sc.sig_validity;
        if (clamp) exp = std::min(exp, *clamp);
        put(-1, "DS", static_cast<int>(v), t, exp);
      }
    }
  }

  std::vector<detail::LedgerSig> ledger;
  for (auto const& [key, exp] : acc) {
    detail::LedgerSig s;
    s.signer = std::get<0>(key);
    s.rtype = std::get<1>(key);
    s.version = std::get<2>(key);
    s.inception = std::get<3>(key);
    s.expiration = exp;
    s.tag = s.signer < 0 ? kParentTag
                         : detail::tag_at(material, zs.keys[s.signer], s.signer, s.inception);
    ledger.push_back(std::move(s));
  }

  std::set<std::string> data_rtypes;
  for (auto const& k : zs.keys)
    for (auto const& w : k.windows)
      if (w.rtype != "DNSKEY") data_rtypes.insert(w.rtype);

  // Poll schedule.
  std::vector<Sec> offsets = zs.poll_offsets;
  if (offsets.empty())
    for (Sec t = 0; t <= zs.horizon; t += sc.poll_interval) offsets.push_back(t);
  if (sc.jitter > 0) {
    std::mt19937_64 rng(sc.seed ^ 0x7f4a7c15ull);
    std::uniform_int_distribution<Sec> dist(-sc.jitter, sc.jitter);
    for (std::size_t i = 1; i < offsets.size(); ++i)
      offsets[i] = std::max<Sec>(offsets[i] + dist(rng), 1);
    std::sort(offsets.begin(), offsets.end());
    offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
  }

  // Per signer, the freshest ledger signature valid at t over version ver.
  auto serve = [&](std::string const& rtype, int ver, Sec t) {
    std::vector<RrsigRecord> out;
    std::vector<int> signers;
    for (std::size_t i = 0; i < zs.keys.size(); ++i) signers.push_back(static_cast<int>(i));
    signers.push_back(-1);
    for (int sg : signers) {
      detail::LedgerSig* best = nullptr;
      for (auto& s : ledger) {
        if (s.signer != sg || s.rtype != rtype || s.version != ver) continue;
        if (s.inception > t || s.expiration < t) continue;
        if (!best || s.inception > best->inception) best = &s;
      }
      if (!best) continue;
      best->served = true;
      RrsigRecord r;
      r.covered_type = rtype;
      r.key_tag = best->tag;
      r.algorithm = sg < 0 ? 8 : zs.keys[sg].algorithm;
      r.signer = sg < 0 ? zs.parent : zs.zone;
      r.inception = sc.t0 + best->inception;
      r.expiration = sc.t0 + best->expiration;
      out.push_back(std::move(r));
    }
    return out;
  };

  Generated g;
  for (Sec t : offsets) {
    PollRecord p;
    p.zone = zs.zone;
    p.ts = sc.t0 + t;
    p.vantage = "p0";

    auto const& km = ktl.members[ktl.at(t)];
    if (!km.empty()) {
      RRsetObservation rr;
      rr.rtype = "DNSKEY";
      rr.ttl = sc.ttl;
      for (int idx : km) {
        DnskeyRdata k = material[idx];
        auto const& ks = zs.keys[idx];
        if (ks.revoke && ks.revoke->lo <= t && t < ks.revoke->hi)
          k.flags = static_cast<std::uint16_t>(k.flags | kFlagRevoke);
        rr.dnskeys.push_back(std::move(k));
      }
      rr.rrsigs = serve("DNSKEY", ktl.at(t), t);
      p.rrsets.push_back(std::move(rr));
    }

    if (!dtl.empty() && t >= dtl.starts.front()) {
      auto const& dm = dtl.members[dtl.at(t)];
      if (!dm.empty()) {
        RRsetObservation rr;
        rr.rtype = "DS";
        rr.ttl = sc.ttl;
        for (int idx : dm) {
          DsRdata d;
          d.key_tag = compute_key_tag(material[idx]);
          d.algorithm = zs.keys[idx].algorithm;
          d.digest_type = 2;
          d.digest = detail::make_digest(zs.keys[idx].label);
          rr.ds.push_back(std::move(d));
        }
        rr.rrsigs = serve("DS", dtl.at(t), t);
        p.rrsets.push_back(std::move(rr));
      }
    }

    for (auto const& rt : data_rtypes) {
      RRsetObservation rr;
      rr.rtype = rt;
      rr.ttl = sc.ttl;
      rr.raw_rdata.push_back("192.0.2.1");
      rr.rrsigs = serve(rt, -1, t);
      p.rrsets.push_back(std::move(rr));
    }

    g.polls.push_back(std::move(p));
  }

  // Every post-start signature must have been the freshest at some poll;
  // otherwise the script describes behavior the corpus cannot show.
  for (auto const& s : ledger)
    if (!s.served && s.inception >= 0)
      throw InvalidScenario("unserved signature: " +
                            (s.signer < 0 ? std::string("parent") : zs.keys[s.signer].label) +
                            " " + s.rtype + " @" + std::to_string(s.inception));

  // Ground truth from the served ledger.
  truth.zone = zs.zone;
  truth.t0 = sc.t0;
  truth.horizon_abs = sc.t0 + zs.horizon;
  for (std::size_t i = 0; i < zs.keys.size(); ++i) {
    TruthKey tk;
    tk.label = zs.keys[i].label;
    tk.key = keytrace::detail::canonical_identity(zs.zone, material[i]);

    std::vector<Interval> cover;
    for (auto const& s : ledger) {
      if (!s.served || s.rtype != "DNSKEY" || s.version < 0) continue;
      auto const& m = ktl.members[s.version];
      if (std::find(m.begin(), m.end(), static_cast<int>(i)) == m.end()) continue;
      cover.push_back({sc.t0 + s.inception, sc.t0 + s.expiration});
    }
    if (cover.empty()) continue;  // never covered: no lifetime to speak of
    std::sort(cover.begin(), cover.end(), [](Interval a, Interval b) {
      return std::tie(a.lo, a.hi) < std::tie(b.lo, b.hi);
    });
    Sec lo = cover.front().lo, hi = cover.front().lo;
    int pieces = 0;
    Sec cur_hi = cover.front().lo - 2;
    for (auto iv : cover) {
      lo = std::min(lo, iv.lo);
      hi = std::max(hi, iv.hi);
      if (iv.lo > cur_hi + 1) ++pieces;
      cur_hi = std::max(cur_hi, iv.hi);
    }
    tk.L = {lo, hi};
    tk.contiguous = pieces == 1;

    for (auto const& s : ledger) {
      if (!s.served || s.signer != static_cast<int>(i)) continue;
      Interval v{sc.t0 + s.inception, sc.t0 + s.expiration};
      if (!overlaps(v, tk.L)) continue;
      if (!tk.s_alpha || v.lo < *tk.s_alpha) tk.s_alpha = v.lo;
      if (!tk.s_phi || v.lo > *tk.s_phi) tk.s_phi = v.lo;
      if (!tk.s_omega || v.hi > *tk.s_omega) tk.s_omega = v.hi;
      if (s.rtype == "DNSKEY")
        tk.role_ksk = true;
      else
        tk.role_zsk = true;
    }
    if (!tk.role_ksk && !tk.role_zsk) {
      if (tk.key.sep())
        tk.role_ksk = true;
      else
        tk.role_zsk = true;
    }

    for (auto const& s : ledger) {
      if (!s.served || s.rtype != "DS" || s.version < 0) continue;
      auto const& m = dtl.members[s.version];
      if (std::find(m.begin(), m.end(), static_cast<int>(i)) == m.end()) continue;
      Interval v{sc.t0 + s.inception, sc.t0 + s.expiration};
      if (!overlaps(v, tk.L)) continue;
      if (!tk.ds)
        tk.ds = v;
      else
        tk.ds = Interval{std::min(tk.ds->lo, v.lo), std::max(tk.ds->hi, v.hi)};
    }

    for (Sec t : offsets) {
      if (!(zs.keys[i].add <= t && t < zs.keys[i].remove)) continue;
      if (!tk.fs) tk.fs = sc.t0 + t;
      tk.ls = sc.t0 + t;
    }

    truth.keys.push_back(std::move(tk));
  }
  g.truth = std::move(truth);
  return g;
}

// Thin a corpus to every keep-th instant and/or drop whole outage windows.
inline std::vector<PollRecord> sparsify(std::vector<PollRecord> const& polls, Sec keep_interval,
                                        std::vector<Interval> const& drop = {}) {
  std::vector<PollRecord> out;
  if (polls.empty()) return out;
  Sec first = polls.front().ts;
  for (auto const& p : polls) {
    if (keep_interval > 0 && (p.ts - first) % keep_interval != 0) continue;
    bool dropped = false;
    for (auto const& w : drop)
      if (w.contains(p.ts)) dropped = true;
    if (!dropped) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Counting oracle: the five intersection features recomputed by walking unit
// cells one second at a time, the rest by plain differences. Deliberately
// avoids the interval helpers used by the analysis path.
// ---------------------------------------------------------------------------

struct DenseFeatures {
  std::optional<Sec> pre_ds, rem_pre_ds, ds_pre_rem, ds_overlap;
  Sec pre_stage = 0;
  Sec double_sig = 0, dep_sig_only = 0, rem_sig_only = 0, retire = 0;
  Sec total_duration = 0;
};

inline DenseFeatures dense_pair_features(KeyLifetime const& d, KeyLifetime const& r, Role role) {
  DenseFeatures f;
  Sec t_lo = r.L.lo, t_hi = d.L.hi;
  if (role == Role::ksk) {
    if (r.DS) t_lo = std::min(t_lo, r.DS->lo);
    if (d.DS) t_hi = std::max(t_hi, d.DS->hi);
  }
  f.total_duration = t_hi - t_lo;
  if (d.DS) f.pre_ds = d.DS->lo - d.L.lo;
  f.pre_stage = r.S_alpha ? *r.S_alpha - r.L.lo : 0;
  if (r.DS) f.rem_pre_ds = r.DS->lo - r.L.lo;
  if (d.DS) f.ds_pre_rem = d.L.hi - d.DS->hi;

  std::vector<Sec> marks{t_lo, t_hi, d.L.hi};
  auto note = [&](std::optional<Sec> v) {
    if (v) marks.push_back(*v);
  };
  note(d.S_alpha);
  note(d.S_phi);
  note(r.S_alpha);
  note(r.S_phi);
  if (d.DS) {
    marks.push_back(d.DS->lo);
    marks.push_back(d.DS->hi);
  }
  if (r.DS) {
    marks.push_back(r.DS->lo);
    marks.push_back(r.DS->hi);
  }
  Sec lo = *std::min_element(marks.begin(), marks.end()) - 1;
  Sec hi = *std::max_element(marks.begin(), marks.end()) + 1;
  if (hi - lo > 10000000) throw HorizonTooLarge("oracle span exceeds 1e7 seconds");

  long long n_double = 0, n_dep = 0, n_rem = 0, n_retire = 0, n_ds = 0;
  bool act_d_open = d.S_alpha.has_value(), act_r_open = r.S_alpha.has_value();
  Sec sa_d = act_d_open ? *d.S_alpha : 0, sp_d = d.S_phi ? *d.S_phi : hi;
  Sec sa_r = act_r_open ? *r.S_alpha : 0, sp_r = r.S_phi ? *r.S_phi : hi;
  bool t_valid = t_lo <= t_hi;
  for (Sec t = lo; t < hi; ++t) {
    bool in_d = act_d_open && sa_d <= t && t < sp_d;
    bool in_r = act_r_open && sa_r <= t && t < sp_r;
    bool in_t = t_valid && t_lo <= t && t < t_hi;
    if (in_d && in_r) ++n_double;
    if (in_d && in_t) ++n_dep;
    if (in_r && in_t) ++n_rem;
    if (d.S_phi && t_valid && *d.S_phi <= t && t < d.L.hi && in_t) ++n_retire;
    if (d.DS && r.DS && d.DS->lo <= t && t < d.DS->hi && r.DS->lo <= t && t < r.DS->hi) ++n_ds;
  }
  if (act_d_open && act_r_open) f.double_sig = n_double;
  if (t_valid && act_d_open) f.dep_sig_only = n_dep - f.double_sig;
  if (t_valid && act_r_open) f.rem_sig_only = n_rem - f.double_sig;
  if (t_valid && d.S_phi) f.retire = n_retire;
  if (d.DS && r.DS) f.ds_overlap = n_ds;
  return f;
}

// ---------------------------------------------------------------------------
// Scripted processes. Offsets below are in days unless a one-second nudge is
// spelled out. Every script keeps an always-on signer for the role not under
// test so that rrset coverage never degrades by accident.
// ---------------------------------------------------------------------------

namespace detail {

constexpr Sec D(Sec n) { return days(n); }

inline KeyScript zsk(std::string label) {
  KeyScript k;
  k.label = std::move(label);
  k.flags = kFlagZone;
  return k;
}

inline KeyScript ksk(std::string label) {
  KeyScript k;
  k.label = std::move(label);
  k.flags = kFlagZone | kFlagSep;
  return k;
}

inline PairExpectation pair_rfc(std::string dep, std::string rem, std::string cls,
                                std::vector<std::string> warns, std::string behavior) {
  PairExpectation p;
  p.departing = std::move(dep);
  p.remaining = std::move(rem);
  p.rfc_class = std::move(cls);
  p.rfc_warnings = std::move(warns);
  p.rfc_severity = p.rfc_warnings.empty() ? "valid" : "warning";
  p.emergency_checked = true;  // default: expect no overlay row
  p.behavior = std::move(behavior);
  return p;
}

inline PairExpectation pair_emergency(std::string dep, std::string rem, std::string cls,
                                      std::vector<std::string> warns, std::string behavior) {
  PairExpectation p;
  p.departing = std::move(dep);
  p.remaining = std::move(rem);
  p.emergency_class = std::move(cls);
  p.emergency_checked = true;
  p.emergency_warnings = std::move(warns);
  p.behavior = std::move(behavior);
  return p;
}

inline PairExpectation with_overlay(PairExpectation p, std::string cls,
                                    std::vector<std::string> warns) {
  p.emergency_class = std::move(cls);
  p.emergency_warnings = std::move(warns);
  return p;
}

inline Sec pick(std::mt19937_64& rng, Sec lo, Sec hi) {
  return lo + static_cast<Sec>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

}  // namespace detail

inline std::string one_perturbation(Scenario const& sc) {
  if (sc.perturbations.empty()) return "";
  if (sc.perturbations.size() > 1)
    throw InvalidScenario("at most one perturbation per scenario");
  return sc.perturbations.front();
}

// --- ZSK pre-publication ---------------------------------------------------

inline Script build_pre_publication(Scenario const& sc) {
  using namespace detail;
  std::mt19937_64 rng(sc.seed);
  std::string pert = one_perturbation(sc);
  Script s;
  s.truth.process = sc.process;
  s.truth.perturbation = pert;

  KeyScript k0 = ksk("K0");
  KeyScript z1 = zsk("Z1"), z2 = zsk("Z2");

  if (pert.empty() || pert == "DoubleSig" || pert == "DepSigOnly") {
    Sec hz, a2, rem1;
    if (pert == "DepSigOnly") {
      a2 = D(15);
      hz = a2 + D(pick(rng, 10, 25));
      rem1 = hz + D(pick(rng, 10, 19));
      z1.windows = {tickw(0, a2, "A")};
    } else {
      Sec m = 2 + static_cast<Sec>(rng() % 2);
      hz = D(15) * m;
      Sec p = D(pick(rng, 10, std::min<Sec>(25, 15 * m - 5)));
      a2 = hz - p;
      rem1 = hz + D(pick(rng, 10, 19));
      z1.windows = {tickw(0, hz, "A")};
    }
    Sec h = rem1 + D(40);
    s.zone.horizon = h;
    k0.windows = {tickw(0, h)};
    z1.remove = rem1;
    z2.add = a2;
    Sec z2lo = pert == "DoubleSig" ? hz - D(2) : hz;
    z2.windows = {tickw(z2lo, h, "A")};
    // A staged hand-off this long also satisfies the weak ZSK Emergency 3 row,
    // so the overlay legitimately fires alongside the RFC match.
    if (pert.empty())
      s.truth.pairs = {with_overlay(pair_rfc("Z1", "Z2", "ZSK Pre-Pub", {}, "Cutover"),
                                    "ZSK Emergency 3", {})};
    else if (pert == "DoubleSig")
      s.truth.pairs = {with_overlay(
          pair_rfc("Z1", "Z2", "ZSK Pre-Pub", {"DoubleSig"}, "Multi-Signature"),
          "ZSK Emergency 3", {})};
    else
      s.truth.pairs = {with_overlay(
          pair_rfc("Z1", "Z2", "ZSK Pre-Pub", {"DepSigOnly"}, "Likely-Cutover"),
          "ZSK Emergency 3", {})};
  } else if (pert == "Retire") {
    // Both old signers stop exactly when coverage for Z1 is clamped shut, so
    // the retire slice in the pair window is empty.
    s.zone.horizon = D(130);
    k0.windows = {tickw(0, D(90), "DNSKEY", D(90)), tickw(D(91), D(130))};
    z1.remove = D(91);
    z1.windows = {single(D(85), "A"), single(D(90), "A")};
    z2.add = D(20);
    z2.windows = {tickw(D(50), D(80), "A")};
    KeyScript z3 = zsk("Z3");
    z3.add = D(40);
    z3.remove = D(58);
    z3.windows = {single(D(52), "A"), single(D(56), "A")};
    s.zone.keys = {k0, z1, z2, z3};
    s.truth.pairs = {with_overlay(
        pair_rfc("Z1", "Z2", "ZSK Pre-Pub", {"Retire"}, "Multi-Signature"),
        "ZSK Emergency 3", {})};
    return s;
  } else if (pert == "RemSigOnly") {
    // Z2 only starts signing at the instant Z1's coverage hull closes, so the
    // successor-only slice of the window is empty. Z1 stays in the keyset
    // until its last signature lapses; the A rrset simply goes unsigned in
    // the interior gap.
    s.zone.horizon = D(130);
    k0.windows = {tickw(0, D(130))};
    z1.remove = D(77);
    z1.windows = {tickw(0, D(45), "A")};
    z2.add = D(20);
    z2.windows = {tickw(D(105), D(130), "A")};
    s.truth.pairs = {with_overlay(
        pair_rfc("Z1", "Z2", "ZSK Pre-Pub", {"RemSigOnly"}, "Candidate-Cutover"),
        "ZSK Emergency 3", {})};
  } else {
    throw InvalidScenario("unknown perturbation: " + pert);
  }
  s.zone.keys = {k0, z1, z2};
  return s;
}

// Fixed-knob pre-publication layout with every signing event on the resign
// grid, for sampling-rate experiments.
inline Script build_nyquist(Scenario const& sc) {
  using namespace detail;
  Script s;
  s.truth.process = sc.process;
  KeyScript k0 = ksk("K0");
  KeyScript z1 = zsk("Z1"), z2 = zsk("Z2");
  s.zone.horizon = D(100);
  k0.windows = {tickw(0, D(100))};
  z1.remove = D(60);
  z1.windows = {tickw(0, D(45), "A")};
  z2.add = D(30);
  z2.windows = {tickw(D(45), D(100), "A")};
  s.zone.keys = {k0, z1, z2};
  return s;
}

// --- ZSK double-signature --------------------------------------------------

inline Script build_double_signature(Scenario const& sc) {
  using namespace detail;
  std::mt19937_64 rng(sc.seed);
  std::string pert = one_perturbation(sc);
  Script s;
  s.truth.process = sc.process;
  s.truth.perturbation = pert;

  Sec x = D(45), a2 = D(20), h = D(100);
  if (pert.empty()) {
    x = rng() % 2 ? D(60) : D(45);
    a2 = D(pick(rng, 2, (x - D(10)) / D(5)) * 5);
    h = x + D(55);
  }
  s.zone.horizon = h;
  KeyScript k0 = ksk("K0");
  KeyScript z1 = zsk("Z1"), z2 = zsk("Z2");
  z2.add = a2;

  if (pert.empty() || pert == "DepSigOnly") {
    k0.windows = {tickw(0, x, "DNSKEY", x), tickw(x, h)};
    z1.remove = x;
    z1.windows = {tickw(0, x, "A")};
    z2.windows = {pert.empty() ? tickw(a2, h, "A") : tickw(a2, a2 + D(15), "A")};
    if (pert.empty())
      s.truth.pairs = {pair_rfc("Z1", "Z2", "ZSK Double-Sig", {}, "Multi-Signature")};
    else
      s.truth.pairs = {pair_rfc("Z1", "Z2", "ZSK Double-Sig", {"DepSigOnly"}, "Multi-Signature")};
  } else if (pert == "Retire") {
    k0.windows = {tickw(0, h)};
    z1.remove = D(46);
    z1.windows = {tickw(0, D(45), "A")};
    z2.windows = {tickw(D(20), D(35), "A"), single(D(45), "A")};
    s.truth.pairs = {pair_rfc("Z1", "Z2", "ZSK Double-Sig", {"Retire"}, "Multi-Signature")};
  } else if (pert == "RemSigOnly") {
    k0.windows = {tickw(0, D(45), "DNSKEY", D(45)), tickw(D(45), h)};
    z1.remove = D(45);
    z1.windows = {single(D(35), "A"), single(D(45), "A")};
    z2.windows = {tickw(D(20), h, "A")};
    s.truth.pairs = {pair_rfc("Z1", "Z2", "ZSK Double-Sig", {"RemSigOnly"}, "Multi-Signature")};
  } else {
    throw InvalidScenario("unknown perturbation: " + pert);
  }
  s.zone.keys = {k0, z1, z2};
  return s;
}

// --- KSK double-DS ---------------------------------------------------------

inline Script build_double_ds(Scenario const& sc) {
  using namespace detail;
  std::mt19937_64 rng(sc.seed);
  std::string pert = one_perturbation(sc);
  Script s;
  s.truth.process = sc.process;
  s.truth.perturbation = pert;

  Sec d_add = D(45), b = D(20), d_rem = D(52), h = D(100);
  if (pert.empty()) {
    d_add = rng() % 2 ? D(60) : D(45);
    d_rem = d_add + D(pick(rng, 5, 10));
    // Keep the DS backdate off the resign grid so the opening parent
    // signature is not masked by a fresher one at t=0.
    b = D(pick(rng, 16, 25));
    h = d_add + D(55);
  }
  Sec gamma = d_add + 1;

  KeyScript z0 = zsk("Z0");
  z0.windows = {tickw(0, h, "A")};
  KeyScript k1 = ksk("K1"), k2 = ksk("K2");
  k1.remove = gamma;
  k2.add = gamma;

  if (pert.empty() || pert == "PreDS") {
    k1.windows = {tickw(0, d_add, "DNSKEY", d_add)};
    k2.windows = {tickw(gamma, h)};
    Sec ds1lo = pert == "PreDS" ? 0 : -b;
    k1.ds = {{ds1lo, d_rem, false}};
    k2.ds = {{d_add, kForever, false}};
    if (pert.empty())
      s.truth.pairs = {pair_rfc("K1", "K2", "KSK Double-DS", {}, "Candidate-Cutover")};
    else
      s.truth.pairs = {pair_rfc("K1", "K2", "KSK Double-DS", {"PreDS"}, "Candidate-Cutover")};
    s.zone.keys = {z0, k1, k2};
  } else if (pert == "DepSigOnly") {
    // Atomic swap: K1 leaves and K2 joins at the same instant, and K1 makes
    // one short farewell signature over the new rrset. With the successor DS
    // published two days early, the departing key's signing span reaches
    // into the window.
    k1.remove = d_add;
    k2.add = d_add;
    k1.windows = {tickw(0, d_add, "DNSKEY", d_add), single(d_add, "DNSKEY", d_add + D(2))};
    k2.windows = {tickw(d_add, h)};
    k1.ds = {{-b, d_rem, false}};
    k2.ds = {{d_add - D(2), kForever, false}};
    s.truth.pairs = {pair_rfc("K1", "K2", "KSK Double-DS", {"DepSigOnly"}, "Cutover")};
    s.zone.keys = {z0, k1, k2};
  } else if (pert == "Retire") {
    k1.windows = {tickw(0, D(30))};
    k2.windows = {tickw(gamma, h)};
    k1.ds = {{-b, d_rem, false}};
    k2.ds = {{d_add, kForever, false}};
    s.truth.pairs = {pair_rfc("K1", "K2", "KSK Double-DS", {"Retire"}, "Likely-Cutover")};
    s.zone.keys = {z0, k1, k2};
  } else if (pert == "PreStage") {
    // The successor is published in the swap crack but first signs a day
    // later; K1 bridges the gap with one post-removal signature so coverage
    // never lapses and the successor's hull still opens at the crack.
    k1.windows = {tickw(0, d_add, "DNSKEY", d_add), single(gamma, "DNSKEY", gamma + D(1))};
    k2.windows = {tickw(d_add + D(1), h)};
    k1.ds = {{-b, d_rem, false}};
    k2.ds = {{d_add, kForever, false}};
    s.truth.pairs = {pair_rfc("K1", "K2", "KSK Double-DS", {"PreStage"}, "Candidate-Cutover")};
    s.zone.keys = {z0, k1, k2};
  } else {
    // A lone DoubleSig violation cannot be staged for this class: pushing the
    // pair's signing spans into overlap necessarily drags PreStage or
    // DepSigOnly off their soft cells as well.
    throw InvalidScenario("unknown perturbation: " + pert);
  }
  s.zone.horizon = h;
  return s;
}

// --- KSK double-KSK (and its figure fixture) -------------------------------

inline Script build_double_ksk(Scenario const& sc, bool fig_fixture) {
  using namespace detail;
  std::mt19937_64 rng(sc.seed);
  std::string pert = one_perturbation(sc);
  Script s;
  s.truth.process = sc.process;
  s.truth.perturbation = pert;
  Sec h = D(100);
  s.zone.horizon = h;

  KeyScript z0 = zsk("Z0");
  z0.windows = {tickw(0, h, "A")};
  KeyScript k1 = ksk("K1"), k2 = ksk("K2");
  k1.remove = D(60);
  Sec m2 = D(30), b1 = D(20), swap = D(50);
  if (pert.empty() && !fig_fixture) {
    b1 = D(5) * pick(rng, 4, 5);
    Sec s_phi1 = D(45) - (D(45) + b1) % D(15);
    std::vector<Sec> allowed;
    for (Sec c = D(15); c <= D(35); c += D(5))
      if (c < s_phi1) allowed.push_back(c);
    m2 = allowed[rng() % allowed.size()];
  }
  k2.add = m2;

  if (fig_fixture) {
    // The departing key leaves exactly one signature, made after its own
    // coverage ended, over an rrset it no longer belongs to.
    KeyScript ka = ksk("KA");
    ka.windows = {tickw(-D(20), D(40))};
    ka.ds = {{-D(20), D(55), true}};
    k1.windows = {single(D(75))};
    k2.windows = {tickw(D(30), h)};
    k1.ds = {{-D(10), D(50), true}};
    k2.ds = {{D(50), kForever, false}};
    // With both signing spans degenerate the pair also satisfies every KSK
    // Emergency 2 cell, so that overlay rides along.
    s.truth.pairs = {with_overlay(
        pair_rfc("K1", "K2", "KSK Double-KSK", {"DoubleSig", "Retire"}, "Multi-Signature"),
        "KSK Emergency 2", {})};
    s.zone.keys = {z0, ka, k1, k2};
    return s;
  }

  if (pert.empty() || pert == "PreDS" || pert == "DSOverlap" || pert == "DoubleSig") {
    k1.windows = {pert == "DoubleSig" ? tickw(-D(20), D(25)) : tickw(-b1, D(45))};
    k2.windows = {tickw(m2, h)};
    k1.ds = {{pert == "PreDS" ? -b1 : -D(10), swap, true}};
    k2.ds = {{pert == "DSOverlap" ? D(48) : swap, kForever, false}};
    std::string cls = "KSK Double-KSK";
    if (pert.empty())
      s.truth.pairs = {pair_rfc("K1", "K2", cls, {}, "Multi-Signature")};
    else if (pert == "DoubleSig") {
      // K1 stops signing well before K2 starts; a standing third key keeps
      // an in-use, delegated signer through the gap until K2's DS lands.
      KeyScript ka = ksk("KA");
      ka.windows = {tickw(-D(20), D(45))};
      ka.ds = {{-D(20), D(55), false}};
      s.truth.pairs = {pair_rfc("K1", "K2", cls, {"DoubleSig"}, "Multi-Signature")};
      s.truth.n_remaining = 2;
      s.zone.keys = {z0, ka, k1, k2};
      return s;
    } else
      s.truth.pairs = {pair_rfc("K1", "K2", cls, {pert}, "Multi-Signature")};
    s.zone.keys = {z0, k1, k2};
  } else if (pert == "PreStage") {
    KeyScript ka = ksk("KA");
    ka.windows = {tickw(-D(20), D(33))};
    ka.ds = {{-D(20), D(33), false}};
    k1.windows = {tickw(D(32), D(32)), single(D(40))};
    k2.windows = {tickw(D(32), h)};
    k1.ds = {{-D(10), swap, true}};
    k2.ds = {{swap, kForever, false}};
    // The staged start plus the long tail also satisfies KSK Emergency 3's
    // mandatory cells; its soft DoubleSig cell is violated by the overlap.
    s.truth.pairs = {with_overlay(
        pair_rfc("K1", "K2", "KSK Double-KSK", {"PreStage"}, "Multi-Signature"),
        "KSK Emergency 3", {"DoubleSig"})};
    s.zone.keys = {z0, ka, k1, k2};
  } else if (pert == "DepSigOnly") {
    KeyScript ka = ksk("KA");
    ka.windows = {tickw(-D(20), D(33)), tickw(D(60), h)};
    ka.ds = {{-D(20), D(36), false}, {D(55), kForever, false}};
    k2.add = D(28);
    k1.windows = {tickw(D(34), D(49)), single(D(55))};
    k2.windows = {single(D(28)), single(D(40))};
    k1.ds = {{-D(10), swap, true}};
    k2.ds = {{swap, kForever, false}};
    s.truth.pairs = {pair_rfc("K1", "K2", "KSK Double-KSK", {"DepSigOnly"}, "Multi-Signature")};
    s.zone.keys = {z0, ka, k1, k2};
  } else if (pert == "Retire") {
    KeyScript ka = ksk("KA");
    ka.windows = {tickw(-D(20), D(45))};
    ka.ds = {{-D(20), D(55), false}};
    k1.windows = {tickw(D(50), D(80))};
    k2.windows = {tickw(D(30), h)};
    k1.ds = {{-D(10), swap, true}};
    k2.ds = {{swap, kForever, false}};
    s.truth.pairs = {pair_rfc("K1", "K2", "KSK Double-KSK", {"Retire"}, "Multi-Signature")};
    s.zone.keys = {z0, ka, k1, k2};
  } else if (pert == "RemSigOnly") {
    KeyScript ka = ksk("KA");
    ka.windows = {tickw(D(60), h)};
    ka.ds = {{D(55), kForever, false}};
    k1.windows = {tickw(-D(20), D(45))};
    k2.windows = {single(D(30)), single(D(40))};
    k1.ds = {{-D(10), swap, true}};
    k2.ds = {{swap, kForever, false}};
    s.truth.pairs = {pair_rfc("K1", "K2", "KSK Double-KSK", {"RemSigOnly"}, "Multi-Signature")};
    s.zone.keys = {z0, ka, k1, k2};
  } else {
    throw InvalidScenario("unknown perturbation: " + pert);
  }
  return s;
}

// --- KSK double-RRset ------------------------------------------------------

inline Script build_double_rrset(Scenario const& sc) {
  using namespace detail;
  std::mt19937_64 rng(sc.seed);
  std::string pert = one_perturbation(sc);
  Script s;
  s.truth.process = sc.process;
  s.truth.perturbation = pert;
  Sec h = D(100);
  s.zone.horizon = h;

  KeyScript z0 = zsk("Z0");
  z0.windows = {tickw(0, h, "A")};
  KeyScript k1 = ksk("K1"), k2 = ksk("K2");
  k1.remove = D(60);
  Sec m2 = D(28);
  if (pert.empty()) m2 = D(22) + D(3) * pick(rng, 0, 4);
  k2.add = m2;
  std::string cls = "KSK Double-RRset";

  if (pert.empty() || pert == "PreDS" || pert == "DSOverlap" || pert == "DoubleSig") {
    k1.windows = {pert == "DoubleSig" ? tickw(-D(20), D(25)) : tickw(-D(20), D(45))};
    k2.windows = {tickw(m2, h)};
    if (pert == "DSOverlap") {
      k1.ds = {{-D(10), D(30), true}};
      k2.ds = {{D(28), kForever, false}};
    } else {
      k1.ds = {{pert == "PreDS" ? -D(20) : -D(10), m2, true}};
      k2.ds = {{m2, kForever, false}};
    }
    if (pert.empty())
      s.truth.pairs = {pair_rfc("K1", "K2", cls, {}, "Multi-Signature")};
    else if (pert == "DoubleSig")
      s.truth.pairs = {pair_rfc("K1", "K2", cls, {"DoubleSig"}, "Likely-Cutover")};
    else
      s.truth.pairs = {pair_rfc("K1", "K2", cls, {pert}, "Multi-Signature")};
    s.zone.keys = {z0, k1, k2};
  } else if (pert == "PreStage") {
    KeyScript ka = ksk("KA");
    ka.windows = {tickw(-D(20), D(33))};
    ka.ds = {{-D(20), D(33), false}};
    k1.windows = {tickw(D(30), D(30)), single(D(40))};
    k2.windows = {tickw(D(30), h)};
    k1.ds = {{-D(10), m2, true}};
    k2.ds = {{m2, kForever, false}};
    s.truth.pairs = {pair_rfc("K1", "K2", cls, {"PreStage"}, "Multi-Signature")};
    s.zone.keys = {z0, ka, k1, k2};
  } else if (pert == "DepSigOnly") {
    KeyScript ka = ksk("KA");
    ka.windows = {tickw(-D(20), D(31)), tickw(D(60), h)};
    ka.ds = {{-D(20), D(34), false}, {D(55), kForever, false}};
    k2.add = D(26);
    k1.windows = {tickw(D(30), D(45)), single(D(55))};
    k2.windows = {single(D(26)), single(D(40))};
    k1.ds = {{-D(10), D(26), true}};
    k2.ds = {{D(26), kForever, false}};
    s.truth.pairs = {pair_rfc("K1", "K2", cls, {"DepSigOnly"}, "Multi-Signature")};
    s.zone.keys = {z0, ka, k1, k2};
  } else if (pert == "Retire") {
    KeyScript ka = ksk("KA");
    ka.windows = {tickw(-D(20), D(45))};
    ka.ds = {{-D(20), D(55), false}};
    k1.windows = {tickw(D(50), D(80)), single(D(88))};
    k2.windows = {tickw(m2, h)};
    k1.ds = {{-D(10), m2, true}};
    k2.ds = {{m2, kForever, false}};
    s.truth.pairs = {pair_rfc("K1", "K2", cls, {"Retire"}, "Multi-Signature")};
    s.zone.keys = {z0, ka, k1, k2};
  } else if (pert == "RemSigOnly") {
    KeyScript ka = ksk("KA");
    ka.windows = {tickw(D(60), h)};
    ka.ds = {{D(55), kForever, false}};
    k1.windows = {tickw(-D(20), D(45))};
    k2.windows = {single(D(28)), single(D(40))};
    k1.ds = {{-D(10), m2, true}};
    k2.ds = {{m2, kForever, false}};
    s.truth.pairs = {pair_rfc("K1", "K2", cls, {"RemSigOnly"}, "Multi-Signature")};
    s.zone.keys = {z0, ka, k1, k2};
  } else {
    throw InvalidScenario("unknown perturbation: " + pert);
  }
  return s;
}

// --- KSK trust-anchor update (no delegation: the zone is its own anchor) ---

inline Script build_update_ta(Scenario const& sc) {
  using namespace detail;
  std::mt19937_64 rng(sc.seed);
  std::string pert = one_perturbation(sc);
  Script s;
  s.truth.process = sc.process;
  s.truth.perturbation = pert;
  Sec h = D(100);
  s.zone.horizon = h;

  Sec m2 = D(pick(rng, 5, 10)), rev_lo = D(pick(rng, 15, 25));
  if (!pert.empty()) {
    m2 = D(10);
    rev_lo = D(20);
  }
  if (pert == "reject-boundary") m2 = D(10) + 1;

  KeyScript z0 = zsk("Z0");
  z0.windows = {tickw(0, h, "A")};
  KeyScript k1 = ksk("K1"), k2 = ksk("K2");
  k1.remove = D(41);
  k1.windows = {tickw(-D(20), D(40))};
  if (pert != "unrevoked") k1.revoke = Interval{rev_lo, D(41)};
  k2.add = m2;
  // The boundary layout puts K2's grid off the whole-day polls; splitting its
  // window keeps every off-grid signature observable at least once.
  if (pert == "reject-boundary")
    k2.windows = {tickw(m2, D(40)), tickw(D(41), h)};
  else
    k2.windows = {tickw(m2, h)};
  s.zone.keys = {z0, k1, k2};

  if (pert.empty())
    s.truth.pairs = {pair_rfc("K1", "K2", "KSK Update-TA", {}, "Multi-Signature")};
  else if (pert == "unrevoked")
    s.truth.pairs = {pair_rfc("K1", "K2", "KSK Update-TA", {"Unrevoked"}, "Multi-Signature")};
  else if (pert == "reject-boundary") {
    PairExpectation p = pair_rfc("K1", "K2", "noncompliant", {}, "Multi-Signature");
    p.rfc_severity = "noncompliant";
    s.truth.pairs = {p};
  } else {
    throw InvalidScenario("unknown perturbation: " + pert);
  }
  return s;
}

// --- KSK emergency: unplanned successor, no staging ------------------------

inline Script build_emergency_ksk2(Scenario const& sc) {
  using namespace detail;
  std::mt19937_64 rng(sc.seed);
  std::string pert = one_perturbation(sc);
  Script s;
  s.truth.process = sc.process;
  s.truth.perturbation = pert;
  Sec h = D(100);
  s.zone.horizon = h;

  Sec e = D(40), bds = D(10);
  if (pert.empty()) {
    e = D(pick(rng, 25, 50));
    bds = D(pick(rng, 5, 15));
  }
  Sec ge = e + 1, c = e + D(30);

  KeyScript z0 = zsk("Z0");
  z0.windows = {tickw(0, h, "A")};
  KeyScript k0 = ksk("K0"), k1 = ksk("K1"), k2 = ksk("K2");
  k0.windows = {tickw(-D(20), e), single(e + D(1))};
  k0.ds = {{-D(20), kForever, false}};
  k1.remove = ge;
  k1.ds = {{-bds, e, true}};
  k2.add = e;

  if (pert.empty()) {
    k1.windows = {single(c)};
    k2.windows = {single(e), tickw(ge, h)};
    k2.ds = {{e, kForever, false}};
    s.truth.pairs = {pair_emergency("K1", "K2", "KSK Emergency 2", {}, "Multi-Signature")};
    s.truth.n_remaining = 2;
  } else if (pert == "DepSigOnly") {
    k0.windows = {tickw(-D(20), e), single(e + D(1)), tickw(D(84), h)};
    k1.windows = {single(D(68)), single(D(70))};
    k2.windows = {single(e), tickw(ge, D(55) + 1)};
    k2.ds = {{e, kForever, false}};
    s.truth.pairs = {
        pair_emergency("K1", "K2", "KSK Emergency 2", {"DepSigOnly"}, "Multi-Signature")};
  } else if (pert == "RemSigOnly") {
    k0.windows = {tickw(-D(20), D(70)), single(D(71))};
    k1.windows = {single(D(70))};
    k2.add = D(70);
    k2.windows = {tickw(D(70), h)};
    k2.ds = {{D(70), kForever, false}};
    s.truth.pairs = {
        pair_emergency("K1", "K2", "KSK Emergency 2", {"RemSigOnly"}, "Multi-Signature")};
  } else {
    throw InvalidScenario("unknown perturbation: " + pert);
  }
  s.zone.keys = {z0, k0, k1, k2};
  return s;
}

// --- KSK emergency: staged successor, stretched transition -----------------

inline Script build_emergency_ksk3(Scenario const& sc) {
  using namespace detail;
  std::mt19937_64 rng(sc.seed);
  std::string pert = one_perturbation(sc);
  Script s;
  s.truth.process = sc.process;
  s.truth.perturbation = pert;
  Sec h = D(100);
  s.zone.horizon = h;

  Sec m2 = D(5), d1rem = D(55), d2 = D(50);
  if (pert.empty()) {
    m2 = D(pick(rng, 5, 10));
    d2 = D(pick(rng, 45, 52));
  }

  KeyScript z0 = zsk("Z0");
  z0.windows = {tickw(0, h, "A")};
  KeyScript k1 = ksk("K1"), k2 = ksk("K2");
  k1.remove = D(60);
  k2.add = m2;
  k1.ds = {{-D(10), pert == "DsPreRem" ? D(70) : d1rem, false}};
  k2.ds = {{d2, kForever, false}};

  if (pert.empty() || pert == "DsPreRem") {
    k1.windows = {tickw(-D(20), D(40))};
    k2.windows = {tickw(D(40), h)};
    if (pert.empty())
      s.truth.pairs = {pair_emergency("K1", "K2", "KSK Emergency 3", {}, "Cutover")};
    else
      s.truth.pairs = {pair_emergency("K1", "K2", "KSK Emergency 3", {"DsPreRem"}, "Cutover")};
    s.zone.keys = {z0, k1, k2};
  } else if (pert == "DoubleSig") {
    k1.windows = {tickw(-D(20), D(40))};
    k2.windows = {tickw(D(38), h)};
    s.truth.pairs = {
        pair_emergency("K1", "K2", "KSK Emergency 3", {"DoubleSig"}, "Multi-Signature")};
    s.zone.keys = {z0, k1, k2};
  } else if (pert == "Retire") {
    KeyScript k0 = ksk("K0");
    k0.windows = {tickw(-D(20), D(40)), single(D(41))};
    k0.ds = {{-D(20), kForever, false}};
    k1.windows = {single(D(85))};
    k2.windows = {tickw(D(40), h)};
    s.truth.pairs = {pair_emergency("K1", "K2", "KSK Emergency 3", {"Retire"}, "Multi-Signature")};
    s.zone.keys = {z0, k0, k1, k2};
  } else {
    throw InvalidScenario("unknown perturbation: " + pert);
  }
  return s;
}

// --- ZSK emergency: unplanned successor ------------------------------------

inline Script build_emergency_zsk2(Scenario const& sc) {
  using namespace detail;
  std::mt19937_64 rng(sc.seed);
  std::string pert = one_perturbation(sc);
  Script s;
  s.truth.process = sc.process;
  s.truth.perturbation = pert;
  Sec h = D(100);
  s.zone.horizon = h;

  Sec e = D(40);
  if (pert.empty()) e = D(pick(rng, 30, 50));
  // With e one day short of a resign tick, the post-removal boundary
  // signature would be masked before the next poll; nudge off that residue.
  if (e == D(44)) e = D(43);
  Sec ge = e + 1, c = e + D(30);

  KeyScript k0 = ksk("K0");
  k0.windows = {tickw(0, h)};
  KeyScript za = zsk("ZA"), z1 = zsk("Z1"), z2 = zsk("Z2");
  z1.remove = ge;

  if (pert.empty()) {
    za.windows = {tickw(-D(20), e, "A"), single(e + D(2), "A")};
    z1.windows = {single(c, "A")};
    z2.add = e;
    z2.windows = {tickw(e, h, "A")};
    s.truth.pairs = {pair_emergency("Z1", "Z2", "ZSK Emergency 2", {}, "Multi-Signature")};
    s.truth.n_remaining = 2;
  } else if (pert == "RemSigOnly") {
    // Z1 departs long before its coverage hull closes; the successor joins
    // and signs exactly at the closing instant, so the pair window is a
    // single point and the successor-only slice is empty.
    z1.remove = D(45) + 1;
    za.windows = {tickw(-D(20), D(70), "A"), single(D(77), "A")};
    z1.windows = {single(D(75), "A")};
    z2.add = D(75);
    z2.windows = {tickw(D(75), h, "A")};
    s.truth.pairs = {
        pair_emergency("Z1", "Z2", "ZSK Emergency 2", {"RemSigOnly"}, "Multi-Signature")};
    s.truth.n_remaining = 2;
  } else {
    throw InvalidScenario("unknown perturbation: " + pert);
  }
  s.zone.keys = {k0, za, z1, z2};
  return s;
}

// --- ZSK emergency: staged successor, stretched transition -----------------

inline Script build_emergency_zsk3(Scenario const& sc) {
  using namespace detail;
  std::mt19937_64 rng(sc.seed);
  if (!one_perturbation(sc).empty())
    throw InvalidScenario("zsk-emergency-3 has no individually violatable soft cells");
  Script s;
  s.truth.process = sc.process;
  Sec h = D(100);
  s.zone.horizon = h;
  Sec m2 = D(pick(rng, 5, 10));

  KeyScript k0 = ksk("K0");
  k0.windows = {tickw(0, h)};
  KeyScript z1 = zsk("Z1"), z2 = zsk("Z2");
  z1.remove = D(60);
  z1.windows = {tickw(-D(20), D(40), "A")};
  z2.add = m2;
  z2.windows = {tickw(D(40), h, "A")};
  s.zone.keys = {k0, z1, z2};
  s.truth.pairs = {pair_emergency("Z1", "Z2", "ZSK Emergency 3", {}, "Cutover")};
  return s;
}

// --- Overlapless but continuous handoff ------------------------------------

inline Script build_noncompliant_cutover(Scenario const& sc) {
  using namespace detail;
  Script s;
  s.truth.process = sc.process;
  Sec h = D(100), e = D(45);
  s.zone.horizon = h;
  KeyScript k0 = ksk("K0");
  k0.windows = {tickw(0, h)};
  KeyScript z1 = zsk("Z1"), z2 = zsk("Z2");
  z1.remove = D(55);
  z1.windows = {tickw(0, e, "A")};
  z2.add = e;
  z2.windows = {tickw(e, h, "A")};
  s.zone.keys = {k0, z1, z2};
  PairExpectation p = pair_rfc("Z1", "Z2", "noncompliant", {}, "Cutover");
  p.rfc_severity = "noncompliant";
  s.truth.pairs = {p};
  return s;
}

// --- n departing, m remaining ----------------------------------------------

inline Script build_multi_signer(Scenario const& sc) {
  using namespace detail;
  Script s;
  s.truth.process = sc.process;
  Sec h = D(90);
  s.zone.horizon = h;
  KeyScript k0 = ksk("K0");
  k0.windows = {tickw(0, h)};
  s.zone.keys = {k0};
  for (int i = 0; i < sc.n_departing; ++i) {
    KeyScript d = zsk("D" + std::to_string(i + 1));
    d.remove = D(46);
    d.windows = {tickw(0, D(45), "A")};
    s.zone.keys.push_back(std::move(d));
  }
  for (int i = 0; i < sc.n_remaining; ++i) {
    KeyScript r = zsk("R" + std::to_string(i + 1));
    r.add = D(20);
    r.windows = {tickw(D(20), h, "A")};
    s.zone.keys.push_back(std::move(r));
  }
  PairExpectation p;
  p.departing = "D1";
  p.remaining = "R1";
  p.behavior = "Multi-Signature";
  s.truth.pairs = {p};
  s.truth.n_departing = sc.n_departing;
  s.truth.n_remaining = sc.n_remaining;
  s.truth.cardinality_checked = true;
  return s;
}

// --- Polling outage: steady cadence, then a long hole ----------------------

inline Script build_outage(Scenario const& sc) {
  using namespace detail;
  (void)sc;
  Script s;
  s.truth.process = "outage-split";
  Sec h = D(800);
  s.zone.horizon = h;
  KeyScript k0 = ksk("K0");
  k0.windows = {tickw(0, h)};
  KeyScript z1 = zsk("Z1");
  z1.windows = {tickw(0, h, "A")};
  s.zone.keys = {k0, z1};
  // Alternating 8- and 12-day gaps across the whole range; the acceptance
  // side knocks out everything between day 300 and day 700.
  Sec t = 0;
  bool eight = true;
  while (t <= h) {
    s.zone.poll_offsets.push_back(t);
    t += eight ? D(8) : D(12);
    eight = !eight;
  }
  return s;
}

// --- Random two-or-three way ZSK churn for the counting oracle -------------

inline Script build_random(Scenario const& sc) {
  using namespace detail;
  std::mt19937_64 rng(sc.seed * 0x9e3779b97f4a7c15ull + 0xc0ffee);
  Script s;
  s.truth.process = sc.process;
  Sec h = D(55 + pick(rng, 0, 25));
  s.zone.horizon = h;

  KeyScript k0 = ksk("K0");
  k0.windows = {tickw(0, h)};
  KeyScript z1 = zsk("Z1");
  Sec r1 = D(pick(rng, 25, 45));
  z1.remove = r1;
  z1.windows = {tickw(0, r1 - D(5), "A")};
  KeyScript z2 = zsk("Z2");
  Sec a2 = D(pick(rng, 5, 20));
  z2.add = a2;
  z2.windows = {tickw(a2 + D(pick(rng, 0, 8)), h, "A")};
  s.zone.keys = {k0, z1, z2};
  if (rng() % 2) {
    KeyScript z3 = zsk("Z3");
    Sec a3 = r1 + D(pick(rng, 0, 10));
    Sec rm3 = a3 + D(pick(rng, 20, 30));
    // Constrain the third key to the classifiable envelope: its window stays
    // inside the polled range, holds at least two signing events, and starts
    // before the incumbent successor's last re-sign, so a multi-key remainder
    // always shows measurable signing concurrency. A lone-instant signer
    // would leave the hand-off genuinely unclassifiable.
    Sec z2lo = z2.windows[0].lo;
    Sec z2last = z2lo + (h - 1 - z2lo) / D(15) * D(15);
    a3 = std::min(a3, z2last - D(1));
    Sec hi3 = std::min(rm3 - D(4), h);
    if (hi3 > a3 + D(15)) {
      z3.add = a3;
      z3.remove = rm3;
      z3.windows = {tickw(a3, hi3, "A")};
      s.zone.keys.push_back(std::move(z3));
    }
  }
  return s;
}

// ---------------------------------------------------------------------------

inline Script build_script(Scenario const& sc) {
  if (sc.process == "zsk-pre-publication") return build_pre_publication(sc);
  if (sc.process == "nyquist") return build_nyquist(sc);
  if (sc.process == "zsk-double-signature") return build_double_signature(sc);
  if (sc.process == "ksk-double-ds") return build_double_ds(sc);
  if (sc.process == "ksk-double-ksk") return build_double_ksk(sc, false);
  if (sc.process == "fig-double-ksk") return build_double_ksk(sc, true);
  if (sc.process == "ksk-double-rrset") return build_double_rrset(sc);
  if (sc.process == "ksk-update-ta") return build_update_ta(sc);
  if (sc.process == "ksk-emergency-2") return build_emergency_ksk2(sc);
  if (sc.process == "ksk-emergency-3") return build_emergency_ksk3(sc);
  if (sc.process == "zsk-emergency-2") return build_emergency_zsk2(sc);
  if (sc.process == "zsk-emergency-3") return build_emergency_zsk3(sc);
  if (sc.process == "noncompliant-cutover") return build_noncompliant_cutover(sc);
  if (sc.process == "multi-signer") return build_multi_signer(sc);
  if (sc.process == "outage-split") return build_outage(sc);
  if (sc.process == "random") return build_random(sc);
  throw InvalidScenario("unknown process: " + sc.process);
}

inline std::vector<std::string> known_processes() {
  return {"zsk-pre-publication", "zsk-double-signature", "ksk-double-ds", "ksk-double-ksk",
          "ksk-double-rrset",    "ksk-update-ta",        "ksk-emergency-2", "ksk-emergency-3",
          "zsk-emergency-2",     "zsk-emergency-3",      "noncompliant-cutover", "multi-signer",
          "outage-split",        "nyquist",              "fig-double-ksk",  "random"};
}

// Feasible single-warning perturbations per process. Double-DS has no
// RemSigOnly entry: its mandatory cells force the successor's delegation to
// outlive the departing key's coverage, so the successor necessarily keeps
// signing alone inside the window and that cell cannot be violated on its
// own in a corpus that stays continuously verifiable.
inline std::vector<std::string> perturbations_for(std::string const& process) {
  if (process == "zsk-pre-publication")
    return {"DoubleSig", "DepSigOnly", "Retire", "RemSigOnly"};
  if (process == "zsk-double-signature") return {"DepSigOnly", "Retire", "RemSigOnly"};
  if (process == "ksk-double-ds")
    return {"PreDS", "PreStage", "DepSigOnly", "Retire"};
  if (process == "ksk-double-ksk" || process == "ksk-double-rrset")
    return {"PreDS", "DoubleSig", "PreStage", "DepSigOnly", "Retire", "DSOverlap", "RemSigOnly"};
  if (process == "ksk-update-ta") return {"unrevoked", "reject-boundary"};
  if (process == "ksk-emergency-2") return {"DepSigOnly", "RemSigOnly"};
  if (process == "ksk-emergency-3") return {"DoubleSig", "Retire", "DsPreRem"};
  if (process == "zsk-emergency-2") return {"RemSigOnly"};
  return {};
}

inline Generated generate(Scenario const& sc) {
  Script s = build_script(sc);
  return render(s.zone, sc, std::move(s.truth));
}

}  // namespace keytrace::synth
