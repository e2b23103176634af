#pragma once

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "keytrace/base64.hpp"
#include "keytrace/records.hpp"

namespace keytrace {

struct MalformedRecord : std::runtime_error {
  explicit MalformedRecord(std::string const& what) : std::runtime_error(what) {}
};

namespace detail {

inline bool is_hex(std::string const& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isxdigit(c) != 0; });
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Zone names are kept lowercase and fully qualified.
inline std::string normalize_zone(std::string z) {
  z = lower(std::move(z));
  if (z.empty() || z.back() != '.') z.push_back('.');
  return z;
}

inline Sec require_int(nlohmann::json const& j, char const* field) {
  if (!j.contains(field) || !j[field].is_number_integer())
    throw MalformedRecord(std::string("missing or non-integer field: ") + field);
  return j[field].get<Sec>();
}

inline std::string require_str(nlohmann::json const& j, char const* field) {
  if (!j.contains(field) || !j[field].is_string())
    throw MalformedRecord(std::string("missing or non-string field: ") + field);
  return j[field].get<std::string>();
}

}  // namespace detail

// Parses one JSONL line of the polling wire format. Unknown extra fields are
// ignored; unknown rtypes keep their rdata opaque. Throws MalformedRecord on
// structural problems (missing required fields, bad base64/hex). An rrsig
// whose expiration does not follow its inception parses fine but bumps the
// record's timing_anomalies counter.
inline PollRecord parse_poll_line(std::string const& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (nlohmann::json::exception const& e) {
    throw MalformedRecord(std::string("bad json: ") + e.what());
  }
  if (!j.is_object()) throw MalformedRecord("record is not an object");

  PollRecord rec;
  rec.zone = detail::normalize_zone(detail::require_str(j, "zone"));
  if (rec.zone == ".") throw MalformedRecord("empty zone");
  rec.ts = detail::require_int(j, "ts");
  if (rec.ts <= 0) throw MalformedRecord("ts must be positive");
  if (j.contains("vantage")) {
    if (!j["vantage"].is_string()) throw MalformedRecord("non-string vantage");
    rec.vantage = j["vantage"].get<std::string>();
  }

  if (j.contains("rrsets")) {
    if (!j["rrsets"].is_array()) throw MalformedRecord("rrsets must be an array");
    for (auto const& rj : j["rrsets"]) {
      if (!rj.is_object()) throw MalformedRecord("rrset entry is not an object");
      RRsetObservation rr;
      rr.rtype = detail::require_str(rj, "rtype");
      rr.ttl = rj.contains("ttl") ? detail::require_int(rj, "ttl") : 0;
      if (rr.ttl < 0) throw MalformedRecord("negative ttl");
      if (rj.contains("rdata")) {
        if (!rj["rdata"].is_array()) throw MalformedRecord("rdata must be an array");
        for (auto const& dj : rj["rdata"]) {
          if (rr.rtype == "DNSKEY") {
            DnskeyRdata k;
            k.flags = static_cast<std::uint16_t>(detail::require_int(dj, "flags"));
            k.protocol = static_cast<int>(detail::require_int(dj, "protocol"));
            k.algorithm = static_cast<int>(detail::require_int(dj, "algorithm"));
            k.public_key = detail::require_str(dj, "public_key");
            if (!base64_decode(k.public_key)) throw MalformedRecord("public_key is not base64");
            rr.dnskeys.push_back(std::move(k));
          } else if (rr.rtype == "DS") {
            DsRdata d;
            d.key_tag = static_cast<int>(detail::require_int(dj, "key_tag"));
            d.algorithm = static_cast<int>(detail::require_int(dj, "algorithm"));
            d.digest_type = static_cast<int>(detail::require_int(dj, "digest_type"));
            d.digest = detail::lower(detail::require_str(dj, "digest"));
            if (!detail::is_hex(d.digest) || d.digest.size() % 2 != 0)
              throw MalformedRecord("digest is not hex");
            // Known digest types have fixed lengths: sha1 20, sha256 32, sha384 48.
            std::size_t want = d.digest_type == 1 ? 40 : d.digest_type == 2 ? 64 : d.digest_type == 4 ? 96 : 0;
            if (want != 0 && d.digest.size() != want)
              throw MalformedRecord("digest length does not match digest_type");
            rr.ds.push_back(std::move(d));
          } else {
            if (dj.is_string())
              rr.raw_rdata.push_back(dj.get<std::string>());
            else
              rr.raw_rdata.push_back(dj.dump());
          }
        }
      }
      if (rj.contains("rrsigs")) {
        if (!rj["rrsigs"].is_array()) throw MalformedRecord("rrsigs must be an array");
        for (auto const& sj : rj["rrsigs"]) {
          RrsigRecord s;
          s.covered_type = detail::require_str(sj, "covered_type");
          s.key_tag = static_cast<int>(detail::require_int(sj, "key_tag"));
          s.algorithm = static_cast<int>(detail::require_int(sj, "algorithm"));
          s.signer = detail::normalize_zone(detail::require_str(sj, "signer"));
          s.inception = detail::require_int(sj, "inception");
          s.expiration = detail::require_int(sj, "expiration");
          if (s.inverted()) ++rec.timing_anomalies;
          rr.rrsigs.push_back(std::move(s));
        }
      }
      rec.rrsets.push_back(std::move(rr));
    }
  }
  return rec;
}

inline nlohmann::ordered_json to_wire_json(PollRecord const& rec) {
  nlohmann::ordered_json j;
  j["zone"] = rec.zone;
  j["ts"] = rec.ts;
  j["vantage"] = rec.vantage;
  j["rrsets"] = nlohmann::ordered_json::array();
  for (auto const& rr : rec.rrsets) {
    nlohmann::ordered_json rj;
    rj["rtype"] = rr.rtype;
    rj["ttl"] = rr.ttl;
    rj["rdata"] = nlohmann::ordered_json::array();
    for (auto const& k : rr.dnskeys) {
      rj["rdata"].push_back({{"flags", k.flags},
                             {"protocol", k.protocol},
                             {"algorithm", k.algorithm},
                             {"public_key", k.public_key}});
    }
    for (auto const& d : rr.ds) {
      rj["rdata"].push_back({{"key_tag", d.key_tag},
                             {"algorithm", d.algorithm},
                             {"digest_type", d.digest_type},
                             {"digest", d.digest}});
    }
    for (auto const& raw : rr.raw_rdata) rj["rdata"].push_back(raw);
    rj["rrsigs"] = nlohmann::ordered_json::array();
    for (auto const& s : rr.rrsigs) {
      rj["rrsigs"].push_back({{"covered_type", s.covered_type},
                              {"key_tag", s.key_tag},
                              {"algorithm", s.algorithm},
                              {"signer", s.signer},
                              {"inception", s.inception},
                              {"expiration", s.expiration}});
    }
    j["rrsets"].push_back(std::move(rj));
  }
  return j;
}

inline std::string serialize_poll_record(PollRecord const& rec) { return to_wire_json(rec).dump(); }

}  // namespace keytrace
