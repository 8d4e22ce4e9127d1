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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oauthguard/protector.hpp"

using namespace oauthguard;

namespace {

OAuthResponseMeta https_response(const std::string& referer,
                                 const std::string& rp_domain = "dropbox.com") {
  OAuthResponseMeta meta;
  meta.rp_domain = rp_domain;
  meta.rp_host = "www." + rp_domain;
  meta.rp_protocol = Scheme::kHttps;
  meta.code = "4/x";
  if (!referer.empty()) {
    meta.referer = referer;
    if (auto url = try_parse_url(referer)) {
      meta.idp = PublicSuffixList::bundled()
                     .registrable_domain(url->host)
                     .registrable;
    }
  }
  return meta;
}

OAuthRequestMeta google_request(const std::string& rp_domain = "dropbox.com") {
  OAuthRequestMeta meta;
  meta.idp = "https://accounts.google.com";
  meta.rp_domain = rp_domain;
  return meta;
}

Finding finding(FindingClass klass, const std::string& domain = "rp.test") {
  Finding f;
  f.klass = klass;
  f.rp_domain = domain;
  return f;
}

HttpTransaction http_tx(const std::string& url) {
  HttpTransaction tx;
  tx.method = "GET";
  tx.url = parse_url(url);
  return tx;
}

}  // namespace

TEST_CASE("referer validation accepts the IdP origin") {
  auto resp = https_response(
      "https://accounts.google.com/signin/oauth/oauthchooseaccount?");
  CHECK(validate_referer(resp, google_request(), Whitelist()) ==
        RefererVerdict::kAllow);
}

TEST_CASE("referer validation accepts the RP's own domain") {
  auto resp = https_response("https://www.dropbox.com/start");
  CHECK(validate_referer(resp, google_request(), Whitelist()) ==
        RefererVerdict::kAllow);
}

TEST_CASE("referer validation blocks foreign referers") {
  auto resp = https_response("https://attacker.test/lure");
  CHECK(validate_referer(resp, google_request(), Whitelist()) ==
        RefererVerdict::kBlock);
}

TEST_CASE("referer validation blocks an absent or empty referer") {
  CHECK(validate_referer(https_response(""), google_request(), Whitelist()) ==
        RefererVerdict::kBlock);
  auto resp = https_response("");
  resp.referer = "";
  CHECK(validate_referer(resp, google_request(), Whitelist()) ==
        RefererVerdict::kBlock);
}

TEST_CASE("referer validation skips http deliveries for compatibility") {
  auto resp = https_response("https://attacker.test/lure");
  resp.rp_protocol = Scheme::kHttp;
  CHECK(validate_referer(resp, google_request(), Whitelist()) ==
        RefererVerdict::kAllow);
  resp.referer.reset();
  CHECK(validate_referer(resp, google_request(), Whitelist()) ==
        RefererVerdict::kAllow);
}

TEST_CASE("referer validation honors the whitelist") {
  auto resp = https_response("https://ssor.tribdss.com/assets/sso_popup.html",
                             "chicagotribune.com");
  CHECK(validate_referer(resp, google_request("chicagotribune.com"),
                         Whitelist()) == RefererVerdict::kBlock);
  Whitelist wl;
  wl.insert("tribdss.com");
  CHECK(validate_referer(resp, google_request("chicagotribune.com"), wl) ==
        RefererVerdict::kAllow);
}

TEST_CASE("referer validation uses the stored request's IdP") {
  // referer claims to come from evil-idp.test; without the stored request
  // the response-side IdP (derived from the referer itself) would pass it
  auto resp = https_response("https://evil-idp.test/authorize");
  CHECK(validate_referer(resp, google_request(), Whitelist()) ==
        RefererVerdict::kBlock);
  CHECK(validate_referer(resp, std::nullopt, Whitelist()) ==
        RefererVerdict::kAllow);  // degenerate fallback, no request stored
}

TEST_CASE("upgrade_to_https rewrites scheme and default port") {
  auto tx = upgrade_to_https(http_tx("http://rp.test/cb?code=x"));
  CHECK(tx.url.serialize() == "https://rp.test/cb?code=x");
}

TEST_CASE("upgrade_to_https maps explicit port 80 to 443") {
  auto tx = upgrade_to_https(http_tx("http://rp.test:80/cb"));
  CHECK(tx.url.serialize() == "https://rp.test:443/cb");
}

TEST_CASE("upgrade_to_https preserves nonstandard ports") {
  auto tx = upgrade_to_https(http_tx("http://rp.test:8080/cb"));
  CHECK(tx.url.serialize() == "https://rp.test:8080/cb");
}

TEST_CASE("upgrade_to_https rejects non-http transactions") {
  CHECK_THROWS_AS(upgrade_to_https(http_tx("https://rp.test/cb")),
                  std::logic_error);
}

TEST_CASE("upgrade_to_https changes nothing else") {
  std::mt19937_64 rng(20260413);
  for (int i = 0; i < 200; ++i) {
    HttpTransaction tx;
    tx.method = rng() % 2 ? "GET" : "POST";
    UrlParts url;
    url.scheme = Scheme::kHttp;
    url.host = "h" + std::to_string(rng() % 100) + ".test";
    if (rng() % 2) {
      url.port = 80 + static_cast<int>(rng() % 9000);
      url.port_specified = true;
    }
    url.path = "/p/" + std::to_string(rng() % 10);
    url.query.emplace_back("code", std::to_string(rng()));
    if (rng() % 3 == 0) url.fragment = "f=" + std::to_string(rng() % 10);
    tx.url = url;
    tx.headers.emplace("Referer", "https://idp.test/x");
    tx.headers.emplace("Cookie", "k=v");
    if (rng() % 2) tx.body = HttpBody{"code=1", "application/x-www-form-urlencoded"};

    HttpTransaction upgraded = upgrade_to_https(tx);
    CHECK(upgraded.url.scheme == Scheme::kHttps);
    CHECK(upgraded.url.port == (tx.url.port == 80 ? 443 : tx.url.port));
    CHECK(upgraded.url.host == tx.url.host);
    CHECK(upgraded.url.path == tx.url.path);
    CHECK(upgraded.url.query == tx.url.query);
    CHECK(upgraded.url.fragment == tx.url.fragment);
    CHECK(upgraded.method == tx.method);
    CHECK(upgraded.headers == tx.headers);
    CHECK((upgraded.body.has_value() == tx.body.has_value()));
    if (tx.body) CHECK(upgraded.body->bytes == tx.body->bytes);
  }
}

TEST_CASE("decide: privacy leaks block") {
  PolicyConfig cfg;
  auto action = decide({finding(FindingClass::kRefererLeak)},
                       http_tx("https://optimizely.com/t.js"),
                       {false, RefererVerdict::kAllow}, cfg);
  CHECK(action.verdict == Verdict::kBlock);
  CHECK(action.reason_class == FindingClass::kRefererLeak);

  action = decide({finding(FindingClass::kIntentionalLeak)},
                  http_tx("https://tracker.test/collect?code=x"),
                  {true, RefererVerdict::kAllow}, cfg);
  CHECK(action.verdict == Verdict::kBlock);
}

TEST_CASE("decide: failed referer validation blocks an OAuth response") {
  PolicyConfig cfg;
  auto action = decide({finding(FindingClass::kCsrfThreat)},
                       http_tx("https://rp.test/cb?code=x"),
                       {true, RefererVerdict::kBlock}, cfg);
  CHECK(action.verdict == Verdict::kBlock);
  CHECK(action.reason_class == FindingClass::kCsrfThreat);

  // the same findings with a clean referer stay report-only
  action = decide({finding(FindingClass::kCsrfThreat)},
                  http_tx("https://rp.test/cb?code=x"),
                  {true, RefererVerdict::kAllow}, cfg);
  CHECK(action.verdict == Verdict::kAllow);
}

TEST_CASE("decide: unsafe transfer upgrades when enabled") {
  PolicyConfig cfg;
  auto action = decide({finding(FindingClass::kUnsafeTransfer)},
                       http_tx("http://rp.test/cb?code=x"),
                       {true, RefererVerdict::kAllow}, cfg);
  CHECK(action.verdict == Verdict::kUpgradeToHttps);
  CHECK(action.rewritten_url == "https://rp.test/cb?code=x");

  cfg.https_upgrade_enabled = false;
  action = decide({finding(FindingClass::kUnsafeTransfer)},
                  http_tx("http://rp.test/cb?code=x"),
                  {true, RefererVerdict::kAllow}, cfg);
  CHECK(action.verdict == Verdict::kAllow);
}

TEST_CASE("decide: impersonation and misuse warn") {
  PolicyConfig cfg;
  auto action = decide({finding(FindingClass::kImpersonation)},
                       http_tx("https://rp.test/signin?access_token=T"),
                       {true, RefererVerdict::kAllow}, cfg);
  CHECK(action.verdict == Verdict::kWarn);
  CHECK(action.message.find("impersonation") != std::string::npos);

  action = decide({finding(FindingClass::kFlowMisuse)},
                  http_tx("https://rp.test/cb?code=x&id_token=y"),
                  {true, RefererVerdict::kAllow}, cfg);
  CHECK(action.verdict == Verdict::kWarn);
}

TEST_CASE("decide: leak block outranks upgrade and warnings") {
  PolicyConfig cfg;
  auto action = decide({finding(FindingClass::kUnsafeTransfer),
                        finding(FindingClass::kImpersonation),
                        finding(FindingClass::kRefererLeak)},
                       http_tx("http://rp.test/cb?access_token=T"),
                       {true, RefererVerdict::kAllow}, cfg);
  CHECK(action.verdict == Verdict::kBlock);
  CHECK(action.reason_class == FindingClass::kRefererLeak);
}

TEST_CASE("decide: report-only downgrades block and upgrade to allow") {
  PolicyConfig cfg;
  cfg.mode = EnforcementMode::kReportOnly;
  auto action = decide({finding(FindingClass::kRefererLeak)},
                       http_tx("https://optimizely.com/t.js"),
                       {false, RefererVerdict::kAllow}, cfg);
  CHECK(action.verdict == Verdict::kAllow);
  CHECK(action.applied_policies.front() == "leak-block");

  action = decide({finding(FindingClass::kUnsafeTransfer)},
                  http_tx("http://rp.test/cb?code=x"),
                  {true, RefererVerdict::kAllow}, cfg);
  CHECK(action.verdict == Verdict::kAllow);

  // warnings still surface in report-only mode
  action = decide({finding(FindingClass::kImpersonation)},
                  http_tx("https://rp.test/signin?access_token=T"),
                  {true, RefererVerdict::kAllow}, cfg);
  CHECK(action.verdict == Verdict::kWarn);
}

TEST_CASE("decide is pure") {
  PolicyConfig cfg;
  std::vector<Finding> findings = {finding(FindingClass::kUnsafeTransfer)};
  auto tx = http_tx("http://rp.test/cb?code=x");
  DecisionContext ctx{true, RefererVerdict::kAllow};
  CHECK(decide(findings, tx, ctx, cfg) == decide(findings, tx, ctx, cfg));
}
