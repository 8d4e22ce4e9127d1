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

#include <unistd.h>

#include <cstdio>
#include <fstream>

#include <httplib.h>

#include "oauthguard/harness/flows.hpp"
#include "oauthguard/proxy.hpp"

using namespace oauthguard;
using namespace oauthguard::harness;

namespace {

struct ProxiedHarness {
  Harness harness;
  std::shared_ptr<Pipeline> pipeline;
  std::unique_ptr<Proxy> proxy;
  std::shared_ptr<CertAuthority> mitm_ca;
  std::string mitm_ca_path;

  explicit ProxiedHarness(std::vector<RpProfile> profiles,
                          PolicyConfig policy = {}) {
    for (auto& profile : profiles) harness.add_persona(profile);
    harness.start();

    pipeline = std::make_shared<Pipeline>(std::move(policy));
    ProxyConfig config;
    config.tls_interception = true;
    mitm_ca = std::make_shared<CertAuthority>(
        CertAuthority::create("test-mitm-root"));
    config.authority = mitm_ca;
    config.resolver = harness.resolver();
    proxy = std::make_unique<Proxy>(std::move(config), pipeline);
    proxy->start();

    char name[] = "/tmp/mitm-ca-XXXXXX";
    int fd = ::mkstemp(name);
    REQUIRE(fd >= 0);
    ::close(fd);
    std::ofstream(name) << mitm_ca->cert_pem();
    mitm_ca_path = name;
  }

  ~ProxiedHarness() {
    proxy->stop();
    harness.stop();
    std::remove(mitm_ca_path.c_str());
  }

  UaOptions proxied_ua() const {
    UaOptions ua;
    ua.proxy = {{"127.0.0.1", proxy->port()}};
    ua.proxy_ca_bundle = mitm_ca_path;
    return ua;
  }

  UaOptions direct_ua() const {
    UaOptions ua;
    ua.resolver = harness.resolver();
    return ua;
  }
};

RpProfile secure_profile(const std::string& name) {
  RpProfile p;
  p.name = name;
  return p;
}

}  // namespace

TEST_CASE("proxy: legitimate flows pass through the MITM untouched") {
  ProxiedHarness ph({secure_profile("clean")});
  FlowRunner direct_runner(ph.harness, ph.direct_ua());
  FlowResult direct = direct_runner.run(*ph.harness.persona("clean"));
  REQUIRE(direct.completed);

  FlowRunner proxied_runner(ph.harness, ph.proxied_ua());
  FlowResult proxied = proxied_runner.run(*ph.harness.persona("clean"));
  CHECK(proxied.completed);
  CHECK_FALSE(proxied.blocked);
  CHECK(proxied.final_body == direct.final_body);

  Report report = ph.pipeline->snapshot();
  CHECK(report.findings.empty());
  CHECK(report.action_count(Verdict::kBlock) == 0);
  CHECK(report.oauth_requests == 1);
  CHECK(report.oauth_responses == 1);
}

TEST_CASE("proxy: report-only mode is transparent for leaky flows") {
  PolicyConfig policy;
  policy.mode = EnforcementMode::kReportOnly;

  RpProfile leaky;
  leaky.name = "leakyrp";
  leaky.sends_state = false;
  leaky.third_party_resources = {"optimizely.test", "bing.test"};
  ProxiedHarness ph({leaky}, policy);

  FlowRunner direct_runner(ph.harness, ph.direct_ua());
  FlowResult direct = direct_runner.run(*ph.harness.persona("leakyrp"));
  REQUIRE(direct.completed);
  std::size_t direct_hits = ph.harness.web().request_count("optimizely.test");

  FlowRunner proxied_runner(ph.harness, ph.proxied_ua());
  FlowResult proxied = proxied_runner.run(*ph.harness.persona("leakyrp"));
  CHECK(proxied.completed);
  CHECK(proxied.final_body == direct.final_body);
  // the leaking fetches went through (report-only), findings recorded
  CHECK(ph.harness.web().request_count("optimizely.test") == 2 * direct_hits);
  Report report = ph.pipeline->snapshot();
  CHECK(report.rp_count(FindingClass::kRefererLeak) == 1);
  CHECK(report.action_count(Verdict::kBlock) == 0);
}

TEST_CASE("proxy: enforce mode blocks leaks before they reach upstream") {
  RpProfile leaky;
  leaky.name = "leakyrp";
  leaky.sends_state = false;
  leaky.third_party_resources = {"optimizely.test", "optimizely.test",
                                 "bing.test"};
  ProxiedHarness ph({leaky});

  FlowRunner runner(ph.harness, ph.proxied_ua());
  ph.harness.web().clear_log();
  FlowResult result = runner.run(*ph.harness.persona("leakyrp"));
  CHECK(result.completed);  // only the embedded images are lost

  // blocked transactions never reach the upstream host
  CHECK(ph.harness.web().request_count("optimizely.test") == 0);
  CHECK(ph.harness.web().request_count("bing.test") == 0);
  Report report = ph.pipeline->snapshot();
  CHECK(report.action_count(Verdict::kBlock) == 3);
}

TEST_CASE("proxy: http sign-in responses are upgraded via 307") {
  RpProfile upgradable;
  upgradable.name = "upgradable";
  upgradable.uses_https = false;
  upgradable.https_available = true;
  ProxiedHarness ph({upgradable});

  FlowRunner runner(ph.harness, ph.proxied_ua());
  FlowResult result = runner.run(*ph.harness.persona("upgradable"));
  CHECK(result.completed);
  REQUIRE(result.signed_in.has_value());

  Report report = ph.pipeline->snapshot();
  CHECK(report.action_count(Verdict::kUpgradeToHttps) == 1);
  CHECK(report.rp_count(FindingClass::kUnsafeTransfer) == 1);

  // the welcome page was reached over https after the upgrade
  bool upgraded_hop = false;
  for (auto& [tx, status] : result.recorded) {
    if (tx.url.host == "upgradable.test" &&
        tx.url.scheme == Scheme::kHttps &&
        tx.url.path == "/google/authcallback") {
      upgraded_hop = true;
    }
  }
  CHECK(upgraded_hop);
}

TEST_CASE("proxy: failed https upgrade surfaces the documented 502") {
  RpProfile stuck;
  stuck.name = "stuck";
  stuck.uses_https = false;
  stuck.https_available = false;
  ProxiedHarness ph({stuck});

  FlowRunner runner(ph.harness, ph.proxied_ua());
  FlowResult result = runner.run(*ph.harness.persona("stuck"));
  CHECK_FALSE(result.completed);
  CHECK(result.final_status == 502);
  CHECK(result.final_body.find("HTTPS") != std::string::npos);
  CHECK_FALSE(result.signed_in.has_value());
}

TEST_CASE("proxy: upgrade disabled leaves http flows alone") {
  PolicyConfig policy;
  policy.https_upgrade_enabled = false;

  RpProfile plain;
  plain.name = "noupgrade";
  plain.uses_https = false;
  plain.https_available = true;  // available, but the toggle is off
  ProxiedHarness ph({plain}, policy);

  FlowRunner runner(ph.harness, ph.proxied_ua());
  FlowResult result = runner.run(*ph.harness.persona("noupgrade"));
  CHECK(result.completed);

  Report report = ph.pipeline->snapshot();
  CHECK(report.action_count(Verdict::kUpgradeToHttps) == 0);
  CHECK(report.rp_count(FindingClass::kUnsafeTransfer) == 1);
  // the whole sign-in ran over plain http
  for (auto& [tx, status] : result.recorded) {
    if (tx.url.host == "noupgrade.test") {
      CHECK(tx.url.scheme == Scheme::kHttp);
    }
  }
}

TEST_CASE("proxy: warn verdicts attach the warning header") {
  RpProfile implicit_rp;
  implicit_rp.name = "warnrp";
  implicit_rp.flow = Flow::kImplicit;
  implicit_rp.tokens_submitted = {"access_token"};
  ProxiedHarness ph({implicit_rp});

  // register a request record via a legitimate flow first
  FlowRunner runner(ph.harness, ph.proxied_ua());
  REQUIRE(runner.run(*ph.harness.persona("warnrp")).completed);

  httplib::Client client("https://warnrp.test:443");
  client.set_proxy("127.0.0.1", ph.proxy->port());
  client.set_ca_cert_path(ph.mitm_ca_path);
  httplib::Headers headers = {
      {"Referer", "https://warnrp.test/google/authcallback"}};
  auto res = client.Get("/google/signin?access_token=ya29.bogus&state=s",
                        headers);
  REQUIRE(res);
  CHECK(res->has_header("X-OAuthGuard-Warning"));
  CHECK(res->get_header_value("X-OAuthGuard-Warning").find("impersonation") !=
        std::string::npos);
}

TEST_CASE("proxy: forged https responses are dropped as CSRF") {
  RpProfile vulnerable;
  vulnerable.name = "vuln";
  vulnerable.sends_state = false;
  ProxiedHarness ph({vulnerable});

  FlowRunner runner(ph.harness, ph.proxied_ua());
  FlowOptions forged;
  forged.mode = FlowMode::kCsrfForged;
  FlowResult result = runner.run(*ph.harness.persona("vuln"), forged);

  CHECK(result.blocked);
  CHECK_FALSE(result.signed_in.has_value());  // attack stopped
  Report report = ph.pipeline->snapshot();
  CHECK(report.action_count(Verdict::kBlock) == 1);
}

TEST_CASE("proxy: impersonation-prone flows warn but pass") {
  RpProfile implicit_rp;
  implicit_rp.name = "implicitrp";
  implicit_rp.flow = Flow::kImplicit;
  implicit_rp.tokens_submitted = {"access_token"};
  ProxiedHarness ph({implicit_rp});

  FlowRunner runner(ph.harness, ph.proxied_ua());
  FlowResult result = runner.run(*ph.harness.persona("implicitrp"));
  CHECK(result.completed);
  Report report = ph.pipeline->snapshot();
  CHECK(report.action_count(Verdict::kWarn) >= 1);
  CHECK(report.rp_count(FindingClass::kImpersonation) == 1);
  CHECK(report.action_count(Verdict::kBlock) == 0);
}

TEST_CASE("proxy: without interception, https tunnels stay opaque") {
  Harness harness;
  harness.add_persona(secure_profile("opaque"));
  harness.start();

  auto pipeline = std::make_shared<Pipeline>(PolicyConfig{});
  ProxyConfig config;
  config.tls_interception = false;
  config.resolver = harness.resolver();
  Proxy proxy(std::move(config), pipeline);
  proxy.start();

  UaOptions ua;
  ua.proxy = {{"127.0.0.1", proxy.port()}};
  FlowRunner runner(harness, ua);
  FlowResult result = runner.run(*harness.persona("opaque"));
  CHECK(result.completed);

  // nothing was observable: no transactions scanned, tunnels counted
  Report report = pipeline->snapshot();
  CHECK(report.oauth_requests == 0);
  CHECK(report.oauth_responses == 0);
  CHECK(proxy.opaque_tunnels() > 0);

  proxy.stop();
  harness.stop();
}

TEST_CASE("proxy: plain-http forward proxying without interception") {
  Harness harness;
  RpProfile plain;
  plain.name = "plainfwd";
  plain.uses_https = false;
  plain.https_available = false;
  harness.add_persona(plain);
  harness.start();

  PolicyConfig policy;
  policy.https_upgrade_enabled = false;  // let the http flow run
  auto pipeline = std::make_shared<Pipeline>(policy);
  ProxyConfig config;
  config.resolver = harness.resolver();
  Proxy proxy(std::move(config), pipeline);
  proxy.start();

  UaOptions ua;
  ua.proxy = {{"127.0.0.1", proxy.port()}};
  FlowRunner runner(harness, ua);
  FlowResult result = runner.run(*harness.persona("plainfwd"));

  // The plain-http half is observable without MITM, but the https hop to
  // the IdP is not: with no stored request, the token delivery counts as
  // an intentional leak and enforce mode blocks it.
  CHECK(proxy.opaque_tunnels() > 0);
  CHECK(result.blocked);
  Report report = pipeline->snapshot();
  CHECK(report.oauth_requests == 0);
  CHECK(report.oauth_responses >= 1);
  CHECK(report.rp_count(FindingClass::kIntentionalLeak) == 1);

  proxy.stop();
  harness.stop();
}
