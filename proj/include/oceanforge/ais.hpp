// ais.hpp
//
// Copyright 2026 The Oceanforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Field layouts follow ITU-R M.1371 for message types 1/2/3 (position
// reports, class A) and type 5 (static and voyage data).
//
// Sources:
//   https://www.itu.int/rec/R-REC-M.1371
//   https://gpsd.gitlab.io/gpsd/AIVDM.html

#ifndef OCEANFORGE_AIS_HPP
#define OCEANFORGE_AIS_HPP

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "oceanforge/bitstream.hpp"
#include "oceanforge/errors.hpp"
#include "oceanforge/hash.hpp"

#include "json.hpp"

namespace oceanforge::ais {

enum class Errc {
  InvalidArmorChar,
  EmptyPayload,
  UnsupportedMsgType,
  TruncatedBitstream,
  FieldOutOfRange,
  UnrepresentableValue,
  MmsiOutOfRange,
  MalformedTimestamp,
  MalformedSentence,
  BadChecksum,
};

using Error = CodedError<Errc>;

// Scaling constants from ITU-R M.1371 (lon/lat in 1/10000 minute).
inline constexpr int64_t kLonLatScale = 600000;
inline constexpr int64_t kLonRawMax = 180 * kLonLatScale;
inline constexpr int64_t kLatRawMax = 90 * kLonLatScale;
inline constexpr int kSogRawMax = 1022;   // 102.2 knots
inline constexpr int kCogRawMax = 3599;   // 359.9 degrees
inline constexpr int kHeadingMax = 359;
inline constexpr int kHeadingUnavailable = 511;
inline constexpr std::size_t kPositionReportBits = 168;
inline constexpr std::size_t kPositionReportMinBits = 144;
inline constexpr std::size_t kStaticReportBits = 424;
inline constexpr std::size_t kStaticReportMinBits = 240;

// ---------------------------------------------------------------------------
// Six-bit payload armoring
// ---------------------------------------------------------------------------

inline bool is_armor_char(char c) {
  const unsigned char u = static_cast<unsigned char>(c);
  return (u >= 0x30 && u <= 0x57) || (u >= 0x60 && u <= 0x77);
}

// Unpack an armored payload into bits, 6 per character, MSB first.
inline BitStream decode_sixbit(std::string_view payload) {
  if (payload.empty()) throw Error(Errc::EmptyPayload, "empty AIS payload");
  std::vector<uint8_t> bits;
  bits.reserve(payload.size() * 6);
  for (char c : payload) {
    if (!is_armor_char(c))
      throw Error(Errc::InvalidArmorChar,
                  std::string("invalid armoring character '") + c + "'");
    int v = static_cast<unsigned char>(c) - 48;
    if (v > 40) v -= 8;
    for (int i = 5; i >= 0; --i) bits.push_back(static_cast<uint8_t>((v >> i) & 1));
  }
  return BitStream(std::move(bits));
}

// Pack bits back into armored characters; pads the tail with zero bits.
inline std::string encode_sixbit(const BitStream& bits) {
  std::string payload;
  const std::size_t n = bits.size();
  payload.reserve((n + 5) / 6);
  for (std::size_t i = 0; i < n; i += 6) {
    int v = 0;
    for (std::size_t j = 0; j < 6; ++j) {
      v <<= 1;
      if (i + j < n) v |= bits[i + j];
    }
    payload += static_cast<char>(v <= 39 ? v + 48 : v + 56);
  }
  return payload;
}

// ---------------------------------------------------------------------------
// Position reports (types 1/2/3)
// ---------------------------------------------------------------------------

// Raw integer fields exactly as carried on the wire. Scaled views are
// derived; round-trip guarantees hold at this level.
struct RawPositionReport {
  int msg_type = 1;          // 1, 2 or 3
  uint32_t mmsi = 0;         // 9 decimal digits
  int sog_raw = 0;           // 0.1 knot units
  int64_t lon_raw = 0;       // 1/10000 min, signed
  int64_t lat_raw = 0;       // 1/10000 min, signed
  int cog_raw = 0;           // 0.1 degree units
  int heading = 0;           // degrees, or 511 when unavailable

  bool operator==(const RawPositionReport&) const = default;

  double longitude() const { return static_cast<double>(lon_raw) / kLonLatScale; }
  double latitude() const { return static_cast<double>(lat_raw) / kLonLatScale; }
  double sog_knots() const { return sog_raw / 10.0; }
  double cog_degrees() const { return cog_raw / 10.0; }
};

inline void validate_report_fields(const RawPositionReport& r, Errc errc) {
  const char* what = nullptr;
  if (r.lon_raw < -kLonRawMax || r.lon_raw > kLonRawMax) what = "longitude out of range";
  else if (r.lat_raw < -kLatRawMax || r.lat_raw > kLatRawMax) what = "latitude out of range";
  else if (r.cog_raw < 0 || r.cog_raw > kCogRawMax) what = "cog out of range";
  else if (r.sog_raw < 0 || r.sog_raw > kSogRawMax) what = "sog out of range";
  else if ((r.heading < 0 || r.heading > kHeadingMax) && r.heading != kHeadingUnavailable)
    what = "true heading out of range";
  if (what) throw Error(errc, what);
}

inline RawPositionReport decode_position_report(const BitStream& bits) {
  if (bits.size() < kPositionReportMinBits)
    throw Error(Errc::TruncatedBitstream, "position report shorter than 144 bits");
  RawPositionReport r;
  r.msg_type = static_cast<int>(bits.get_uint(0, 6));
  if (r.msg_type < 1 || r.msg_type > 3)
    throw Error(Errc::UnsupportedMsgType,
                "expected message type 1/2/3, got " + std::to_string(r.msg_type));
  r.mmsi = static_cast<uint32_t>(bits.get_uint(8, 30));
  r.sog_raw = static_cast<int>(bits.get_uint(50, 10));
  r.lon_raw = bits.get_int(61, 28);
  r.lat_raw = bits.get_int(89, 27);
  r.cog_raw = static_cast<int>(bits.get_uint(116, 12));
  r.heading = static_cast<int>(bits.get_uint(128, 9));
  // sog_raw 1023 means "not available"; beyond-max speeds are representable
  // on the wire, so only positional/angular fields are range-checked here.
  if (r.lon_raw < -kLonRawMax || r.lon_raw > kLonRawMax)
    throw Error(Errc::FieldOutOfRange, "longitude out of range");
  if (r.lat_raw < -kLatRawMax || r.lat_raw > kLatRawMax)
    throw Error(Errc::FieldOutOfRange, "latitude out of range");
  if (r.cog_raw > kCogRawMax)
    throw Error(Errc::FieldOutOfRange, "cog out of range");
  if (r.heading > kHeadingMax && r.heading != kHeadingUnavailable)
    throw Error(Errc::FieldOutOfRange, "true heading out of range");
  return r;
}

// Inverse of decode_position_report; round-trip oracle and fixture builder.
inline BitStream encode_position_report(const RawPositionReport& r) {
  if (r.msg_type < 1 || r.msg_type > 3)
    throw Error(Errc::UnrepresentableValue, "message type must be 1/2/3");
  if (r.mmsi >= 1000000000u)
    throw Error(Errc::UnrepresentableValue, "mmsi must have at most 9 digits");
  validate_report_fields(r, Errc::UnrepresentableValue);
  BitStream bits;
  bits.put_uint(0, 6, static_cast<uint64_t>(r.msg_type));
  bits.put_uint(8, 30, r.mmsi);
  bits.put_uint(50, 10, static_cast<uint64_t>(r.sog_raw));
  bits.put_int(61, 28, r.lon_raw);
  bits.put_int(89, 27, r.lat_raw);
  bits.put_uint(116, 12, static_cast<uint64_t>(r.cog_raw));
  bits.put_uint(128, 9, static_cast<uint64_t>(r.heading));
  bits.put_uint(kPositionReportBits - 1, 1, 0);  // pad to full length
  return bits;
}

// ---------------------------------------------------------------------------
// Static and voyage reports (type 5)
// ---------------------------------------------------------------------------

struct StaticReport {
  uint32_t mmsi = 0;
  int ship_type_code = 0;  // 8-bit field, 0 = not available
};

inline StaticReport decode_static_report(const BitStream& bits) {
  if (bits.size() < 6)
    throw Error(Errc::TruncatedBitstream, "static report shorter than type field");
  const int msg_type = static_cast<int>(bits.get_uint(0, 6));
  if (msg_type != 5)
    throw Error(Errc::UnsupportedMsgType,
                "expected message type 5, got " + std::to_string(msg_type));
  if (bits.size() < kStaticReportMinBits)
    throw Error(Errc::TruncatedBitstream, "static report shorter than 240 bits");
  StaticReport s;
  s.mmsi = static_cast<uint32_t>(bits.get_uint(8, 30));
  s.ship_type_code = static_cast<int>(bits.get_uint(232, 8));
  return s;
}

inline BitStream encode_static_report(const StaticReport& s) {
  if (s.mmsi >= 1000000000u)
    throw Error(Errc::UnrepresentableValue, "mmsi must have at most 9 digits");
  if (s.ship_type_code < 0 || s.ship_type_code > 255)
    throw Error(Errc::UnrepresentableValue, "ship type code must fit 8 bits");
  BitStream bits;
  bits.put_uint(0, 6, 5);
  bits.put_uint(8, 30, s.mmsi);
  bits.put_uint(232, 8, static_cast<uint64_t>(s.ship_type_code));
  bits.put_uint(kStaticReportBits - 1, 1, 0);
  return bits;
}

// ---------------------------------------------------------------------------
// MMSI anonymization
// ---------------------------------------------------------------------------

inline uint32_t anonymize_mmsi(uint64_t mmsi, std::string_view salt) {
  if (mmsi >= 1000000000ull)
    throw Error(Errc::MmsiOutOfRange, "mmsi must be below 10^9");
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((mmsi >> (8 * i)) & 0xff);
  const uint64_t h = siphash24(salt, std::string_view(buf, 8));
  return static_cast<uint32_t>(h & 0xffffffffull);
}

// Corpus-level anonymizer: re-salts until the keyed map is injective over the
// realized MMSI set, so emitted ids never collide.
class MmsiAnonymizer {
 public:
  explicit MmsiAnonymizer(std::string salt) : base_salt_(std::move(salt)) {
    salt_ = base_salt_;
  }

  template <typename Iter>
  void fit(Iter first, Iter last) {
    std::set<uint64_t> distinct(first, last);
    for (int attempt = 0;; ++attempt) {
      salt_ = attempt == 0 ? base_salt_ : base_salt_ + "#" + std::to_string(attempt);
      ids_.clear();
      std::set<uint32_t> seen;
      bool collided = false;
      for (uint64_t m : distinct) {
        const uint32_t id = anonymize_mmsi(m, salt_);
        if (!seen.insert(id).second) {
          collided = true;
          break;
        }
        ids_[m] = id;
      }
      if (!collided) return;
    }
  }

  uint32_t id_for(uint64_t mmsi) const {
    auto it = ids_.find(mmsi);
    if (it != ids_.end()) return it->second;
    return anonymize_mmsi(mmsi, salt_);
  }

  const std::string& effective_salt() const noexcept { return salt_; }

 private:
  std::string base_salt_;
  std::string salt_;
  std::map<uint64_t, uint32_t> ids_;
};

// ---------------------------------------------------------------------------
// Timestamps
// ---------------------------------------------------------------------------

// "YYYYMMDDTHHMMSS.mmmZ" (UTC) -> epoch milliseconds.
inline int64_t parse_ais_timestamp(std::string_view s) {
  auto fail = [&](const char* why) -> int64_t {
    throw Error(Errc::MalformedTimestamp,
                std::string(why) + ": \"" + std::string(s) + "\"");
  };
  if (s.size() != 20) fail("timestamp must be 20 characters");
  if (s[8] != 'T') fail("missing 'T' separator");
  if (s[15] != '.') fail("missing fractional separator");
  if (s[19] != 'Z') fail("missing 'Z' suffix");
  auto digits = [&](std::size_t off, std::size_t len) -> int64_t {
    int64_t v = 0;
    for (std::size_t i = off; i < off + len; ++i) {
      if (s[i] < '0' || s[i] > '9') fail("non-digit in timestamp");
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  const int64_t year = digits(0, 4);
  const int64_t month = digits(4, 2);
  const int64_t day = digits(6, 2);
  const int64_t hour = digits(9, 2);
  const int64_t minute = digits(11, 2);
  const int64_t second = digits(13, 2);
  const int64_t millis = digits(16, 3);

  if (month < 1 || month > 12) fail("month out of range");
  static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  const int64_t dim = kDays[month - 1] + ((month == 2 && leap) ? 1 : 0);
  if (day < 1 || day > dim) fail("day out of range");
  if (hour > 23 || minute > 59 || second > 59) fail("time of day out of range");

  // Days since 1970-01-01 via the civil-calendar algorithm (Hinnant).
  const int64_t y = year - (month <= 2 ? 1 : 0);
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const int64_t yoe = y - era * 400;
  const int64_t doy = (153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
  const int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  const int64_t days = era * 146097 + doe - 719468;

  return ((days * 24 + hour) * 60 + minute) * 60000 + second * 1000 + millis;
}

// ---------------------------------------------------------------------------
// Decoded records and JSONL serialization
// ---------------------------------------------------------------------------

struct DecodedAisRecord {
  double x = 0.0;            // longitude, degrees
  double y = 0.0;            // latitude, degrees
  double sog = 0.0;          // knots
  double cog = 0.0;          // degrees
  int true_heading = 0;      // degrees or 511
  int64_t ais_timestamp = 0; // epoch milliseconds
  uint32_t id = 0;           // anonymized vessel id
  int msg_type = 1;
  std::optional<int> ship_type_code;

  bool operator==(const DecodedAisRecord&) const = default;

  static DecodedAisRecord from_raw(const RawPositionReport& r, int64_t timestamp_ms,
                                   uint32_t anonymized_id) {
    DecodedAisRecord rec;
    rec.x = r.longitude();
    rec.y = r.latitude();
    rec.sog = r.sog_knots();
    rec.cog = r.cog_degrees();
    rec.true_heading = r.heading;
    rec.ais_timestamp = timestamp_ms;
    rec.id = anonymized_id;
    rec.msg_type = r.msg_type;
    return rec;
  }
};

inline nlohmann::json to_json(const DecodedAisRecord& r) {
  nlohmann::json j{
      {"x", r.x},
      {"y", r.y},
      {"sog", r.sog},
      {"cog", r.cog},
      {"true_heading", r.true_heading},
      {"ais_timestamp", r.ais_timestamp},
      {"id", r.id},
      {"msg_type", r.msg_type},
  };
  if (r.ship_type_code) j["ship_type_code"] = *r.ship_type_code;
  return j;
}

inline DecodedAisRecord record_from_json(const nlohmann::json& j) {
  DecodedAisRecord r;
  r.x = j.at("x").get<double>();
  r.y = j.at("y").get<double>();
  r.sog = j.at("sog").get<double>();
  r.cog = j.at("cog").get<double>();
  r.true_heading = j.at("true_heading").get<int>();
  r.ais_timestamp = j.at("ais_timestamp").get<int64_t>();
  r.id = j.at("id").get<uint32_t>();
  r.msg_type = j.value("msg_type", 1);
  if (j.contains("ship_type_code")) r.ship_type_code = j["ship_type_code"].get<int>();
  return r;
}

// ---------------------------------------------------------------------------
// Input framing: bare payload lines and NMEA sentences
// ---------------------------------------------------------------------------

struct NmeaSentence {
  int fragment_count = 1;
  int fragment_number = 1;
  std::string sequence_id;   // empty for single-part messages
  std::string channel;
  std::string payload;
  int fill_bits = 0;
};

// Parses "!AIVDM,total,num,seq,chan,payload,fill*CS" with checksum check.
inline NmeaSentence parse_nmea_sentence(std::string_view line) {
  if (line.size() < 10 || line[0] != '!')
    throw Error(Errc::MalformedSentence, "NMEA sentence must start with '!'");
  const std::size_t star = line.rfind('*');
  if (star == std::string_view::npos || star + 3 > line.size())
    throw Error(Errc::MalformedSentence, "missing NMEA checksum");
  uint8_t sum = 0;
  for (std::size_t i = 1; i < star; ++i) sum ^= static_cast<uint8_t>(line[i]);
  const std::string given(line.substr(star + 1, 2));
  char buf[3];
  std::snprintf(buf, sizeof buf, "%02X", sum);
  if (given != buf)
    throw Error(Errc::BadChecksum, "NMEA checksum mismatch, expected " + std::string(buf));

  std::vector<std::string> fields;
  std::size_t start = 0;
  const std::string_view body = line.substr(0, star);
  while (start <= body.size()) {
    std::size_t comma = body.find(',', start);
    if (comma == std::string_view::npos) comma = body.size();
    fields.emplace_back(body.substr(start, comma - start));
    start = comma + 1;
  }
  if (fields.size() != 7)
    throw Error(Errc::MalformedSentence, "expected 7 comma-separated NMEA fields");
  if (fields[0] != "!AIVDM" && fields[0] != "!AIVDO")
    throw Error(Errc::MalformedSentence, "not an AIVDM/AIVDO sentence");

  NmeaSentence s;
  try {
    s.fragment_count = std::stoi(fields[1]);
    s.fragment_number = std::stoi(fields[2]);
    s.fill_bits = std::stoi(fields[6]);
  } catch (const std::exception&) {
    throw Error(Errc::MalformedSentence, "non-numeric NMEA fragment/fill field");
  }
  s.sequence_id = fields[3];
  s.channel = fields[4];
  s.payload = fields[5];
  if (s.fragment_count < 1 || s.fragment_number < 1 ||
      s.fragment_number > s.fragment_count)
    throw Error(Errc::MalformedSentence, "inconsistent NMEA fragment numbering");
  return s;
}

// Reassembles multipart AIVDM payloads; single-part sentences pass through.
class MultipartAssembler {
 public:
  // Returns the full unpacked bitstream once all fragments have arrived.
  std::optional<BitStream> add(const NmeaSentence& s) {
    if (s.fragment_count == 1) return finish(s.payload, s.fill_bits);
    const std::string key = s.sequence_id + "/" + s.channel;
    auto& group = pending_[key];
    group.resize(static_cast<std::size_t>(s.fragment_count));
    group[static_cast<std::size_t>(s.fragment_number - 1)] = {s.payload, s.fill_bits};
    for (const auto& part : group)
      if (part.first.empty()) return std::nullopt;
    std::string payload;
    for (const auto& part : group) payload += part.first;
    const int fill = group.back().second;
    pending_.erase(key);
    return finish(payload, fill);
  }

 private:
  static BitStream finish(const std::string& payload, int fill_bits) {
    BitStream bits = decode_sixbit(payload);
    std::vector<uint8_t> v = bits.bits();
    if (fill_bits > 0 && static_cast<std::size_t>(fill_bits) < v.size())
      v.resize(v.size() - static_cast<std::size_t>(fill_bits));
    return BitStream(std::move(v));
  }

  std::map<std::string, std::vector<std::pair<std::string, int>>> pending_;
};

}  // namespace oceanforge::ais

#endif  // OCEANFORGE_AIS_HPP
