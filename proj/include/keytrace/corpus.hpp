#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "keytrace/keytag.hpp"
#include "keytrace/records.hpp"
#include "keytrace/wire.hpp"

namespace keytrace {

// A key as tracked per zone: canonical identity plus every flag variant it
// was observed with. The revoked variant (revoke bit set) has a different
// wire tag, so rrsig matching must know all variant tags.
struct TrackedKey {
  KeyIdentity id;
  std::map<std::uint16_t, int> variant_tags;  // observed flags -> wire tag
};

struct ZoneData {
  std::string zone;
  std::vector<PollRecord> polls;  // sorted by (ts, vantage)
  std::vector<TrackedKey> keys;   // sorted by identity
};

struct CorpusStats {
  std::size_t lines = 0;
  std::size_t malformed = 0;
  std::size_t timing_anomalies = 0;
  std::size_t vantage_disagreements = 0;
  std::size_t orphan_rrsigs = 0;
  std::size_t ambiguous_rrsigs = 0;
};

struct Corpus {
  std::map<std::string, ZoneData> zones;
  CorpusStats stats;
};

namespace detail {

inline KeyIdentity canonical_identity(std::string const& zone, DnskeyRdata const& k) {
  DnskeyRdata canon = k;
  canon.flags = static_cast<std::uint16_t>(k.flags & ~kFlagRevoke);
  KeyIdentity id;
  id.zone = zone;
  id.algorithm = k.algorithm;
  id.flags = canon.flags;
  id.public_key = k.public_key;
  id.key_tag = compute_key_tag(canon);
  return id;
}

}  // namespace detail

inline void index_zone_keys(ZoneData& zd) {
  std::map<KeyIdentity, std::map<std::uint16_t, int>> acc;
  for (auto const& poll : zd.polls) {
    for (auto const& rr : poll.rrsets) {
      if (rr.rtype != "DNSKEY") continue;
      for (auto const& k : rr.dnskeys) {
        KeyIdentity id = detail::canonical_identity(zd.zone, k);
        acc[id][k.flags] = compute_key_tag(k);
      }
    }
  }
  zd.keys.clear();
  for (auto& [id, variants] : acc) zd.keys.push_back({id, std::move(variants)});
}

inline void count_vantage_disagreements(ZoneData const& zd, CorpusStats& stats) {
  // Vantage observations at the same instant are unioned downstream; here we
  // only count instants where vantages reported different DNSKEY rrsets.
  std::map<Sec, std::set<std::vector<DnskeyRdata>>> seen;
  for (auto const& poll : zd.polls) {
    auto const* rr = poll.find_rrset("DNSKEY");
    if (!rr) continue;
    std::vector<DnskeyRdata> keys = rr->dnskeys;
    std::sort(keys.begin(), keys.end(), [](DnskeyRdata const& a, DnskeyRdata const& b) {
      return std::tie(a.flags, a.algorithm, a.public_key) < std::tie(b.flags, b.algorithm, b.public_key);
    });
    seen[poll.ts].insert(std::move(keys));
  }
  for (auto const& [ts, variants] : seen)
    if (variants.size() > 1) ++stats.vantage_disagreements;
}

inline Corpus build_corpus(std::vector<PollRecord> polls) {
  Corpus c;
  for (auto& p : polls) {
    c.stats.timing_anomalies += static_cast<std::size_t>(p.timing_anomalies);
    c.zones[p.zone].polls.push_back(std::move(p));
  }
  for (auto& [zone, zd] : c.zones) {
    zd.zone = zone;
    std::sort(zd.polls.begin(), zd.polls.end(), [](PollRecord const& a, PollRecord const& b) {
      return std::tie(a.ts, a.vantage) < std::tie(b.ts, b.vantage);
    });
    index_zone_keys(zd);
    count_vantage_disagreements(zd, c.stats);
  }
  return c;
}

// Reads a JSONL stream; malformed lines are skipped and counted.
inline Corpus load_corpus(std::istream& in) {
  std::vector<PollRecord> polls;
  CorpusStats pre;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++pre.lines;
    try {
      polls.push_back(parse_poll_line(line));
    } catch (MalformedRecord const&) {
      ++pre.malformed;
    }
  }
  Corpus c = build_corpus(std::move(polls));
  c.stats.lines = pre.lines;
  c.stats.malformed = pre.malformed;
  return c;
}

// Signature attribution: maps (signer zone, key tag, algorithm) to candidate
// keys. Includes every observed flag variant's tag, so signatures made by a
// revoked key still resolve to its canonical identity. Tag collisions within
// a zone resolve to all candidates and are counted as ambiguous per lookup.
class SigIndex {
 public:
  explicit SigIndex(Corpus const& corpus) {
    for (auto const& [zone, zd] : corpus.zones)
      for (auto const& tk : zd.keys)
        for (auto const& [flags, tag] : tk.variant_tags)
          index_[Key{zone, tag, tk.id.algorithm}].push_back(&tk.id);
    for (auto& [k, v] : index_) {
      std::sort(v.begin(), v.end(), [](KeyIdentity const* a, KeyIdentity const* b) { return *a < *b; });
      v.erase(std::unique(v.begin(), v.end(),
                          [](KeyIdentity const* a, KeyIdentity const* b) { return *a == *b; }),
              v.end());
    }
  }

  std::vector<KeyIdentity const*> const* lookup(RrsigRecord const& sig) const {
    auto it = index_.find(Key{sig.signer, sig.key_tag, sig.algorithm});
    if (it == index_.end()) return nullptr;
    return &it->second;
  }

 private:
  struct Key {
    std::string zone;
    int tag;
    int algorithm;
    auto tie() const { return std::tie(zone, tag, algorithm); }
    bool operator<(Key const& o) const { return tie() < o.tie(); }
  };
  std::map<Key, std::vector<KeyIdentity const*>> index_;
};

// Walks every rrsig in the corpus and resolves it against the key index;
// orphans (no candidate) and ambiguous tags (several) are tallied.
inline void match_sigs_to_keys(Corpus& corpus, SigIndex const& index) {
  corpus.stats.orphan_rrsigs = 0;
  corpus.stats.ambiguous_rrsigs = 0;
  std::set<RrsigRecord> seen;
  for (auto const& [zone, zd] : corpus.zones)
    for (auto const& poll : zd.polls)
      for (auto const& rr : poll.rrsets)
        for (auto const& sig : rr.rrsigs) {
          if (!seen.insert(sig).second) continue;
          auto const* cands = index.lookup(sig);
          if (!cands)
            ++corpus.stats.orphan_rrsigs;
          else if (cands->size() > 1)
            ++corpus.stats.ambiguous_rrsigs;
        }
}

}  // namespace keytrace
