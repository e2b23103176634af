#pragma once

#include <cstdint>
#include <vector>

#include "keytrace/base64.hpp"
#include "keytrace/records.hpp"

namespace keytrace {

// RFC 4034 Appendix B checksum over the canonical DNSKEY RDATA wire form:
// flags (2 bytes, network order) | protocol (1) | algorithm (1) | key material.
inline int compute_key_tag(std::uint16_t flags, int protocol, int algorithm,
                           std::vector<std::uint8_t> const& key_material) {
  std::uint32_t ac = 0;
  auto add = [&](std::uint8_t b, std::size_t i) { ac += (i & 1) ? b : static_cast<std::uint32_t>(b) << 8; };
  std::size_t i = 0;
  add(static_cast<std::uint8_t>(flags >> 8), i++);
  add(static_cast<std::uint8_t>(flags & 0xFF), i++);
  add(static_cast<std::uint8_t>(protocol), i++);
  add(static_cast<std::uint8_t>(algorithm), i++);
  for (std::uint8_t b : key_material) add(b, i++);
  ac += (ac >> 16) & 0xFFFF;
  return static_cast<int>(ac & 0xFFFF);
}

// Same checksum with the key material still base64-encoded; used where a
// flag variant of an existing key needs its tag. Returns -1 on bad base64.
inline int compute_key_tag(std::uint16_t flags, int protocol, int algorithm,
                           std::string const& public_key_b64) {
  auto material = base64_decode(public_key_b64);
  if (!material) return -1;
  return compute_key_tag(flags, protocol, algorithm, *material);
}

// Tag of a DNSKEY rdata as observed (flags used verbatim, so a revoked
// variant yields its own tag). Returns -1 if the key is not valid base64.
inline int compute_key_tag(DnskeyRdata const& k) {
  return compute_key_tag(k.flags, k.protocol, k.algorithm, k.public_key);
}

}  // namespace keytrace
