#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "keytrace/time_types.hpp"

namespace keytrace {

// DNSKEY flag bits (RFC 4034 section 2.1.1, RFC 5011 section 3).
constexpr std::uint16_t kFlagZone = 0x0100;
constexpr std::uint16_t kFlagRevoke = 0x0080;
constexpr std::uint16_t kFlagSep = 0x0001;

struct DnskeyRdata {
  std::uint16_t flags = 0;
  int protocol = 3;
  int algorithm = 0;
  std::string public_key;  // base64

  bool operator==(DnskeyRdata const&) const = default;
  auto tie() const { return std::tie(flags, protocol, algorithm, public_key); }
  bool operator<(DnskeyRdata const& o) const { return tie() < o.tie(); }
};

struct DsRdata {
  int key_tag = 0;
  int algorithm = 0;
  int digest_type = 0;
  std::string digest;  // hex, lowercase

  bool operator==(DsRdata const&) const = default;
};

struct RrsigRecord {
  std::string covered_type;
  int key_tag = 0;
  int algorithm = 0;
  std::string signer;
  Sec inception = 0;
  Sec expiration = 0;

  bool operator==(RrsigRecord const&) const = default;
  auto tie() const { return std::tie(covered_type, key_tag, algorithm, signer, inception, expiration); }
  bool operator<(RrsigRecord const& o) const { return tie() < o.tie(); }
  Interval validity() const { return {inception, expiration}; }
  bool inverted() const { return expiration <= inception; }
};

// One observed rrset within a poll. rdata is typed for DNSKEY and DS; any
// other rtype keeps its rdata entries as opaque strings.
struct RRsetObservation {
  std::string rtype;
  Sec ttl = 0;
  std::vector<DnskeyRdata> dnskeys;
  std::vector<DsRdata> ds;
  std::vector<std::string> raw_rdata;
  std::vector<RrsigRecord> rrsigs;

  bool operator==(RRsetObservation const&) const = default;
};

struct PollRecord {
  std::string zone;  // lowercase FQDN with trailing dot
  Sec ts = 0;
  std::string vantage;
  std::vector<RRsetObservation> rrsets;
  // Derived at parse time, not serialized: rrsigs whose expiration does not
  // follow their inception.
  int timing_anomalies = 0;

  bool operator==(PollRecord const& o) const {
    return zone == o.zone && ts == o.ts && vantage == o.vantage && rrsets == o.rrsets;
  }

  RRsetObservation const* find_rrset(std::string const& rtype) const {
    for (auto const& r : rrsets)
      if (r.rtype == rtype) return &r;
    return nullptr;
  }
};

// Canonical key identity. The revoke bit is stripped from flags so that the
// revoked variant of a key maps onto the same identity; key_tag is computed
// over the canonical rdata.
struct KeyIdentity {
  std::string zone;
  int algorithm = 0;
  std::uint16_t flags = 0;
  std::string public_key;
  int key_tag = 0;

  auto tie() const { return std::tie(zone, algorithm, flags, public_key); }
  bool operator==(KeyIdentity const& o) const { return tie() == o.tie(); }
  bool operator<(KeyIdentity const& o) const { return tie() < o.tie(); }
  bool sep() const { return (flags & kFlagSep) != 0; }
};

}  // namespace keytrace
