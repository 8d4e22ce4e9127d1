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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "oauthguard/detector.hpp"
#include "oauthguard/http_model.hpp"
#include "oauthguard/public_suffix.hpp"

namespace oauthguard {

enum class FindingClass {
  kCsrfThreat,
  kImpersonation,
  kFlowMisuse,
  kUnsafeTransfer,
  kRefererLeak,
  kIntentionalLeak,
};

/// Kebab-case name used in reports ("csrf-threat", ...).
std::string to_string(FindingClass klass);
std::optional<FindingClass> finding_class_from_string(std::string_view name);

/// Token values in evidence are cut to a 6-character prefix plus the
/// original length, e.g. "4/gKfV...(45)".
std::string redact_token(std::string_view token);

/// One detected vulnerability instance.
struct Finding {
  FindingClass klass = FindingClass::kCsrfThreat;
  std::string rp_domain;
  std::map<std::string, std::string> evidence;  // token values redacted
  std::uint64_t transaction_ref = 0;

  bool operator==(const Finding&) const = default;
};

/// Registrable domains exempt from referer validation and the
/// missing-request leak rule.
class Whitelist {
 public:
  Whitelist() = default;

  static Whitelist from_file(
      const std::string& path,
      const PublicSuffixList& psl = PublicSuffixList::bundled());
  static Whitelist from_string(
      std::string_view data,
      const PublicSuffixList& psl = PublicSuffixList::bundled());

  /// The whitelist compiled into the binary (mirrors data/whitelist.default).
  static const Whitelist& bundled();

  /// Entries are normalized to lowercase registrable domains.
  void insert(std::string_view domain,
              const PublicSuffixList& psl = PublicSuffixList::bundled());
  bool contains(std::string_view registrable_domain) const;
  std::size_t size() const { return entries_.size(); }
  const std::set<std::string>& entries() const { return entries_; }

 private:
  std::set<std::string> entries_;
};

std::optional<Finding> detect_csrf_threat(const OAuthResponseMeta& resp);
std::optional<Finding> detect_impersonation(const OAuthResponseMeta& resp);
std::optional<Finding> detect_flow_misuse(const OAuthResponseMeta& resp);
std::optional<Finding> detect_unsafe_transfer(const OAuthResponseMeta& resp);

/// Applies to every transaction: fires when the Referer URL carries a
/// non-empty code/access_token/id_token (query or fragment) and its
/// registrable domain differs from the request host's. The finding is
/// attributed to the referer's domain (the leaking RP).
std::optional<Finding> detect_referer_leak(
    const HttpTransaction& tx,
    const PublicSuffixList& psl = PublicSuffixList::bundled());

/// Token-bearing response with no stored request for its domain and the
/// domain not whitelisted. Attributed to the referer's domain when one is
/// present (the page that sent the token away), else to the target host.
std::optional<Finding> detect_intentional_leak(
    const HttpTransaction& tx, const SessionStore& store, const Whitelist& wl,
    const PublicSuffixList& psl = PublicSuffixList::bundled());

/// Full per-response rule set. With no stored request the result is
/// [IntentionalLeak] or, for whitelisted domains, nothing; otherwise the
/// union of the four per-rule detectors.
std::vector<Finding> analyse_response(
    const std::optional<OAuthRequestMeta>& req, const OAuthResponseMeta& resp,
    const Whitelist& wl);

}  // namespace oauthguard
