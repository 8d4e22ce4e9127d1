// Copyright 2026 The OAuthGuard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oauthguard/harness/rp.hpp"

namespace oauthguard::harness {

/// Per-class persona counts for a generated corpus. misuse includes
/// impersonation; leaks includes intentional. vulnerable is the number
/// of distinct personas carrying at least one planted class.
struct CorpusSpec {
  int total = 0;
  int csrf = 0;
  int misuse = 0;
  int impersonation = 0;
  int leaks = 0;
  int intentional = 0;
  int http = 0;
  int vulnerable = 0;

  // Optional knobs (not part of the per-class counts): how many of the
  // http personas also serve https, and how many token-leaking requests
  // the leak personas emit in total.
  int https_available = 0;
  int leak_requests = 0;

  nlohmann::json to_json() const;
  static CorpusSpec from_json(const nlohmann::json& j);
};

struct CorpusError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Deterministic (seeded) persona list whose planted-class tallies equal
/// the spec exactly. Throws CorpusError naming the violated constraint
/// when the counts are unsatisfiable.
std::vector<RpProfile> generate_corpus(const CorpusSpec& spec,
                                       std::uint64_t seed);

/// Counts of the reference corpus exercised by the acceptance suite.
CorpusSpec reference_corpus_spec();

}  // namespace oauthguard::harness
