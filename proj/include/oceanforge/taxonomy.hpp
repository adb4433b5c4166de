// taxonomy.hpp
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

#ifndef OCEANFORGE_TAXONOMY_HPP
#define OCEANFORGE_TAXONOMY_HPP

#include <optional>
#include <string>
#include <vector>

#include "oceanforge/errors.hpp"

namespace oceanforge::corpus {

enum class Errc {
  CodeOutOfRange,
  IndeterminateCategory,
  UnsortedInput,
  NegativeSkew,
  MalformedCaption,
  MalformedManifest,
};

using Error = CodedError<Errc>;

inline constexpr const char* kIndeterminate = "Indeterminate";

// Maps an AIS ship-type code (first-digit ranges plus the special-craft
// block) onto the category vocabulary. Codes without a name stay
// Indeterminate and are excluded from corpus building.
inline std::string map_shiptype(int code) {
  if (code < 0 || code > 255)
    throw Error(Errc::CodeOutOfRange, "ship type code must be in [0,255]");
  if (code >= 70 && code <= 79) return "Cargo";
  if (code >= 80 && code <= 89) return "Tanker";
  if (code >= 60 && code <= 69) return "Passenger";
  switch (code) {
    case 30: return "Fishing";
    case 31: case 32: return "Towing";
    case 33: return "Dredging";
    case 34: return "Diving ship";
    case 35: return "Military ship";
    case 36: return "Sailing";
    case 37: return "Pleasure Craft";
    case 50: return "Pilot Vessel";
    case 51: return "Search and Rescue vessel";
    case 52: return "Tug";
    case 53: return "Port Tender";
    case 54: return "Anti-pollution equipment";
    case 55: return "Law Enforcement";
    case 56: case 57: return "Spare";
    case 58: return "Medical Transport";
    default: return kIndeterminate;
  }
}

// Vessel-name query vocabulary used for retrieval and zero-shot prompts.
// The enumerated set has 25 names; one extra slot can be configured.
class CategoryTaxonomy {
 public:
  CategoryTaxonomy() = default;

  static const std::vector<std::string>& base_query_list() {
    static const std::vector<std::string> kQueries = {
        "Fishing", "Motorboat", "Port Tender", "Spare", "Trawler",
        "Diving ship", "Dredging", "Towing", "Search and Rescue vessel",
        "Cargo", "Pilot Vessel", "Tanker", "Pleasure Craft", "Passenger",
        "RORO", "Sailboat", "Military ship", "Tug", "Ocean liner",
        "Mussel boat", "Law Enforcement", "Anti-pollution equipment",
        "Medical Transport", "Natural ambient noise", "Sailing",
    };
    return kQueries;
  }

  std::vector<std::string> query_list() const {
    std::vector<std::string> q = base_query_list();
    if (extra_query_) q.push_back(*extra_query_);
    return q;
  }

  void set_extra_query(std::string name) { extra_query_ = std::move(name); }

  // Position of a category in the query list, if present.
  std::optional<std::size_t> query_index(const std::string& name) const {
    const auto q = query_list();
    for (std::size_t i = 0; i < q.size(); ++i)
      if (q[i] == name) return i;
    return std::nullopt;
  }

 private:
  std::optional<std::string> extra_query_;
};

}  // namespace oceanforge::corpus

#endif  // OCEANFORGE_TAXONOMY_HPP
