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

#include <optional>
#include <string>
#include <vector>

#include "oauthguard/analyser.hpp"
#include "oauthguard/detector.hpp"
#include "oauthguard/http_model.hpp"

namespace oauthguard {

enum class Verdict { kAllow, kBlock, kUpgradeToHttps, kWarn };

std::string to_string(Verdict verdict);
std::optional<Verdict> verdict_from_string(std::string_view name);

/// Protector output for one transaction.
struct MitigationAction {
  Verdict verdict = Verdict::kAllow;
  std::optional<FindingClass> reason_class;  // set for Block
  std::string message;                       // interstitial / warning text
  std::string rewritten_url;                 // set for UpgradeToHttps
  std::vector<std::string> applied_policies;

  bool operator==(const MitigationAction&) const = default;
};

enum class EnforcementMode { kEnforce, kReportOnly };

struct PolicyConfig {
  bool https_upgrade_enabled = true;
  EnforcementMode mode = EnforcementMode::kEnforce;
  Whitelist whitelist;
};

enum class RefererVerdict { kAllow, kBlock };

/// Strict referer validation for an OAuth response delivered over HTTPS:
/// the Referer's registrable domain must be the IdP's, the RP's, or
/// whitelisted. HTTP-delivered responses are skipped for compatibility
/// (the user agent suppresses the referer on the downgrade). The stored
/// request, when available, supplies the expected IdP domain.
RefererVerdict validate_referer(
    const OAuthResponseMeta& resp, const std::optional<OAuthRequestMeta>& req,
    const Whitelist& wl,
    const PublicSuffixList& psl = PublicSuffixList::bundled());

/// Scheme flip with the default-port rewrite (80 -> 443); nonstandard
/// ports are preserved. Everything else is copied. Requires an http
/// transaction.
UrlParts upgrade_url_to_https(const UrlParts& url);
HttpTransaction upgrade_to_https(const HttpTransaction& tx);

struct DecisionContext {
  bool is_oauth_response = false;
  RefererVerdict referer_verdict = RefererVerdict::kAllow;
};

/// Maps findings plus context to a mitigation, in priority order:
/// leak block > CSRF referer block > HTTPS upgrade > warning > allow.
/// Report-only mode downgrades Block/Upgrade to Allow but keeps the
/// applied-policy trail.
MitigationAction decide(const std::vector<Finding>& findings,
                        const HttpTransaction& tx, const DecisionContext& ctx,
                        const PolicyConfig& cfg);

}  // namespace oauthguard
