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

#include "oauthguard/protector.hpp"

#include <algorithm>
#include <stdexcept>

namespace oauthguard {

namespace {

bool has_class(const std::vector<Finding>& findings, FindingClass klass) {
  return std::any_of(findings.begin(), findings.end(),
                     [klass](const Finding& f) { return f.klass == klass; });
}

const Finding* first_of(const std::vector<Finding>& findings,
                        std::initializer_list<FindingClass> classes) {
  for (const auto& f : findings) {
    for (FindingClass k : classes) {
      if (f.klass == k) return &f;
    }
  }
  return nullptr;
}

}  // namespace

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kAllow: return "allow";
    case Verdict::kBlock: return "block";
    case Verdict::kUpgradeToHttps: return "upgradeToHttps";
    case Verdict::kWarn: return "warn";
  }
  return "unknown";
}

std::optional<Verdict> verdict_from_string(std::string_view name) {
  if (name == "allow") return Verdict::kAllow;
  if (name == "block") return Verdict::kBlock;
  if (name == "upgradeToHttps") return Verdict::kUpgradeToHttps;
  if (name == "warn") return Verdict::kWarn;
  return std::nullopt;
}

RefererVerdict validate_referer(const OAuthResponseMeta& resp,
                                const std::optional<OAuthRequestMeta>& req,
                                const Whitelist& wl,
                                const PublicSuffixList& psl) {
  // Compatibility skip: on an HTTP delivery the user agent suppresses the
  // referer, so validation cannot work.
  if (resp.rp_protocol == Scheme::kHttp) return RefererVerdict::kAllow;

  if (!resp.referer || resp.referer->empty()) return RefererVerdict::kBlock;
  auto ref_url = try_parse_url(*resp.referer);
  if (!ref_url) return RefererVerdict::kBlock;
  std::string referer_domain =
      psl.registrable_domain(ref_url->host).registrable;

  // Expected IdP domain comes from the stored request (the authorization
  // endpoint actually contacted); without one, fall back to the
  // response-side record.
  std::string idp_domain = resp.idp;
  if (req) {
    if (auto idp_url = try_parse_url(req->idp)) {
      idp_domain = psl.registrable_domain(idp_url->host).registrable;
    }
  }

  if (!idp_domain.empty() && referer_domain == idp_domain) {
    return RefererVerdict::kAllow;
  }
  if (referer_domain == resp.rp_domain) return RefererVerdict::kAllow;
  if (wl.contains(referer_domain)) return RefererVerdict::kAllow;
  return RefererVerdict::kBlock;
}

UrlParts upgrade_url_to_https(const UrlParts& url) {
  if (url.scheme != Scheme::kHttp) {
    throw std::logic_error("upgrade_url_to_https requires an http URL");
  }
  UrlParts out = url;
  out.scheme = Scheme::kHttps;
  if (out.port == 80) out.port = 443;
  return out;
}

HttpTransaction upgrade_to_https(const HttpTransaction& tx) {
  if (tx.scheme() != Scheme::kHttp) {
    throw std::logic_error("upgrade_to_https requires an http transaction");
  }
  HttpTransaction out = tx;
  out.url = upgrade_url_to_https(tx.url);
  return out;
}

MitigationAction decide(const std::vector<Finding>& findings,
                        const HttpTransaction& tx, const DecisionContext& ctx,
                        const PolicyConfig& cfg) {
  MitigationAction action;

  // 1. Privacy leaks: block, irreversible disclosure dominates.
  if (const Finding* leak = first_of(
          findings, {FindingClass::kRefererLeak,
                     FindingClass::kIntentionalLeak})) {
    action.verdict = Verdict::kBlock;
    action.reason_class = leak->klass;
    action.message =
        leak->klass == FindingClass::kRefererLeak
            ? "blocked: request leaks a sign-in token through its Referer "
              "header to a third-party site"
            : "blocked: sign-in token deliberately forwarded to a third "
              "party";
    action.applied_policies.push_back("leak-block");
  }
  // 2. CSRF: block an OAuth response that failed strict referer validation.
  else if (ctx.is_oauth_response &&
           ctx.referer_verdict == RefererVerdict::kBlock) {
    action.verdict = Verdict::kBlock;
    action.reason_class = FindingClass::kCsrfThreat;
    action.message =
        "blocked: sign-in response did not come from the identity provider "
        "or the relying party (possible CSRF attempt)";
    action.applied_policies.push_back("csrf-referer-block");
  }
  // 3. Unsafe transfer: redirect the response over HTTPS.
  else if (has_class(findings, FindingClass::kUnsafeTransfer) &&
           cfg.https_upgrade_enabled && tx.scheme() == Scheme::kHttp) {
    action.verdict = Verdict::kUpgradeToHttps;
    action.rewritten_url =
        upgrade_url_to_https(tx.url).serialize_without_fragment();
    action.message = "sign-in response upgraded to HTTPS";
    action.applied_policies.push_back("https-upgrade");
  }
  // 4. Warnings: impersonation and flow misuse have no active mitigation.
  else if (has_class(findings, FindingClass::kImpersonation)) {
    action.verdict = Verdict::kWarn;
    action.message =
        "warning: this site accepts a bare access token at its sign-in "
        "endpoint and may be vulnerable to an impersonation attack; "
        "consider not using this sign-in method with this site";
    action.applied_policies.push_back("warn-impersonation");
  } else if (has_class(findings, FindingClass::kFlowMisuse)) {
    action.verdict = Verdict::kWarn;
    action.message =
        "warning: this site submits a combination of sign-in tokens to its "
        "sign-in endpoint (authorization flow misuse)";
    action.applied_policies.push_back("warn-flow-misuse");
  }

  if (cfg.mode == EnforcementMode::kReportOnly &&
      (action.verdict == Verdict::kBlock ||
       action.verdict == Verdict::kUpgradeToHttps)) {
    action.verdict = Verdict::kAllow;
    action.applied_policies.push_back("report-only-downgrade");
  }
  return action;
}

}  // namespace oauthguard
