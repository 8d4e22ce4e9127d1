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

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "oauthguard/har.hpp"
#include "oauthguard/harness/flows.hpp"
#include "oauthguard/pipeline.hpp"
#include "oauthguard/proxy.hpp"
#include "oauthguard/report.hpp"

namespace {

volatile std::sig_atomic_t g_shutdown = 0;
void handle_signal(int) { g_shutdown = 1; }

oauthguard::ReportFormat parse_format(const std::string& name) {
  return name == "json" ? oauthguard::ReportFormat::kJson
                        : oauthguard::ReportFormat::kText;
}

oauthguard::Whitelist load_whitelist(const std::string& path) {
  if (path.empty()) return oauthguard::Whitelist::bundled();
  return oauthguard::Whitelist::from_file(path);
}

int cmd_scan(const std::string& har_path, const std::string& whitelist_path,
             const std::string& format) {
  oauthguard::HarLoadResult loaded;
  try {
    loaded = oauthguard::load_har(har_path);
  } catch (const std::exception& e) {
    std::cerr << "scan: " << e.what() << "\n";
    return 1;
  }
  if (loaded.skipped_entries > 0) {
    std::cerr << "scan: skipped " << loaded.skipped_entries
              << " malformed HAR entries\n";
  }

  oauthguard::Report report;
  try {
    report = oauthguard::scan_transactions(loaded.transactions,
                                           load_whitelist(whitelist_path));
  } catch (const std::exception& e) {
    std::cerr << "scan: " << e.what() << "\n";
    return 1;
  }
  std::cout << oauthguard::render_report(report, parse_format(format));
  return report.findings.empty() ? 0 : 2;
}

int cmd_proxy(const std::string& listen, const std::string& ca_cert,
              const std::string& ca_key, bool report_only, bool no_upgrade,
              const std::string& whitelist_path,
              const std::vector<std::string>& resolve_rules,
              const std::string& upstream_ca, const std::string& format) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "proxy: --listen expects HOST:PORT\n";
    return 1;
  }

  oauthguard::PolicyConfig policy;
  policy.mode = report_only ? oauthguard::EnforcementMode::kReportOnly
                            : oauthguard::EnforcementMode::kEnforce;
  policy.https_upgrade_enabled = !no_upgrade;
  try {
    policy.whitelist = load_whitelist(whitelist_path);
  } catch (const std::exception& e) {
    std::cerr << "proxy: " << e.what() << "\n";
    return 1;
  }

  oauthguard::ProxyConfig config;
  config.listen_host = listen.substr(0, colon);
  config.listen_port = std::atoi(listen.c_str() + colon + 1);
  for (const auto& rule : resolve_rules) {
    if (!config.resolver.add_rule(rule)) {
      std::cerr << "proxy: bad --resolve rule '" << rule << "'\n";
      return 1;
    }
  }
  if (!upstream_ca.empty()) config.upstream_ca_path = upstream_ca;
  if (!ca_cert.empty() || !ca_key.empty()) {
    if (ca_cert.empty() || ca_key.empty()) {
      std::cerr << "proxy: --ca-cert and --ca-key must be given together\n";
      return 1;
    }
    try {
      config.authority = std::make_shared<oauthguard::CertAuthority>(
          oauthguard::CertAuthority::load(ca_cert, ca_key));
      config.tls_interception = true;
    } catch (const std::exception& e) {
      std::cerr << "proxy: " << e.what() << "\n";
      return 1;
    }
  }

  auto pipeline = std::make_shared<oauthguard::Pipeline>(policy);
  oauthguard::Proxy proxy(config, pipeline);
  try {
    proxy.start();
  } catch (const std::exception& e) {
    std::cerr << "proxy: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "proxy: listening on " << config.listen_host << ":"
            << proxy.port()
            << (config.tls_interception ? " (TLS interception on)" : "")
            << (report_only ? " [report-only]" : " [enforce]") << "\n";

  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  while (!g_shutdown) {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
  }
  std::cerr << "proxy: shutting down\n";
  proxy.stop();
  std::cout << oauthguard::render_report(pipeline->snapshot(),
                                         parse_format(format));
  return 0;
}

int cmd_corpus(const std::string& spec_path, std::uint64_t seed, bool run,
               const std::string& out_path, const std::string& format) {
  oauthguard::harness::CorpusSpec spec;
  try {
    std::ifstream in(spec_path);
    if (!in) throw std::runtime_error("cannot open spec file: " + spec_path);
    spec = oauthguard::harness::CorpusSpec::from_json(
        nlohmann::json::parse(in));
  } catch (const std::exception& e) {
    std::cerr << "corpus: " << e.what() << "\n";
    return 1;
  }

  std::vector<oauthguard::harness::RpProfile> profiles;
  try {
    profiles = oauthguard::harness::generate_corpus(spec, seed);
  } catch (const std::exception& e) {
    std::cerr << "corpus: " << e.what() << "\n";
    return 1;
  }

  if (!run) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& profile : profiles) out.push_back(profile.to_json());
    if (out_path.empty()) {
      std::cout << out.dump(2) << "\n";
    } else {
      std::ofstream f(out_path);
      f << out.dump(2) << "\n";
    }
    return 0;
  }

  // Simulate every persona's sign-in against the local mock services and
  // scan the recorded traffic.
  try {
    oauthguard::harness::Harness harness;
    harness.add_personas(profiles);
    harness.start();

    oauthguard::harness::UaOptions ua;
    ua.resolver = harness.resolver();
    oauthguard::harness::FlowRunner runner(harness, ua);

    std::vector<oauthguard::HttpTransaction> transactions;
    for (const auto& profile : profiles) {
      auto result = runner.run(*harness.persona(profile.name));
      if (!result.error.empty()) {
        std::cerr << "corpus: flow for " << profile.name
                  << " failed: " << result.error << "\n";
      }
      for (auto& [tx, status] : result.recorded) {
        transactions.push_back(std::move(tx));
      }
    }
    harness.stop();

    auto report = oauthguard::scan_transactions(transactions,
                                                oauthguard::Whitelist());
    std::string rendered =
        oauthguard::render_report(report, parse_format(format));
    if (out_path.empty()) {
      std::cout << rendered;
    } else {
      std::ofstream f(out_path);
      f << rendered;
    }
  } catch (const std::exception& e) {
    std::cerr << "corpus: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OAuth 2.0 / OpenID Connect sign-in vulnerability scanner "
               "and enforcement proxy"};
  app.require_subcommand(1);

  // scan
  std::string har_path, scan_whitelist, scan_format = "text";
  auto* scan = app.add_subcommand("scan", "Scan a HAR capture offline");
  scan->add_option("--har", har_path, "HAR 1.2 capture file")
      ->required()
      ->envname("OAUTHGUARD_HAR");
  scan->add_option("--whitelist", scan_whitelist,
                   "referer whitelist file (default: bundled)")
      ->envname("OAUTHGUARD_WHITELIST");
  scan->add_option("--format", scan_format, "json|text")
      ->check(CLI::IsMember({"json", "text"}))
      ->envname("OAUTHGUARD_FORMAT");

  // proxy
  std::string listen = "127.0.0.1:8080";
  std::string ca_cert, ca_key, proxy_whitelist, upstream_ca;
  std::string proxy_format = "text";
  bool report_only = false, enforce = false, no_upgrade = false;
  std::vector<std::string> resolve_rules;
  auto* proxy = app.add_subcommand("proxy", "Run the enforcement proxy");
  proxy->add_option("--listen", listen, "HOST:PORT to listen on")
      ->envname("OAUTHGUARD_LISTEN");
  proxy->add_option("--ca-cert", ca_cert,
                    "CA certificate PEM (enables TLS interception)")
      ->envname("OAUTHGUARD_CA_CERT");
  proxy->add_option("--ca-key", ca_key, "CA private key PEM")
      ->envname("OAUTHGUARD_CA_KEY");
  proxy->add_flag("--report-only", report_only,
                  "observe and report, never block");
  proxy->add_flag("--enforce", enforce, "enforce verdicts (default)");
  proxy->add_flag("--no-https-upgrade", no_upgrade,
                  "disable the HTTPS upgrade of http sign-in responses");
  proxy->add_option("--whitelist", proxy_whitelist,
                    "referer whitelist file (default: bundled)")
      ->envname("OAUTHGUARD_WHITELIST");
  proxy->add_option("--resolve", resolve_rules,
                    "upstream override HOST:PORT=ADDR:PORT (repeatable)");
  proxy->add_option("--upstream-ca", upstream_ca,
                    "verify upstream TLS against this CA bundle");
  proxy->add_option("--format", proxy_format, "json|text shutdown report")
      ->check(CLI::IsMember({"json", "text"}));

  // corpus
  std::string spec_path, corpus_out, corpus_format = "text";
  std::uint64_t seed = 1;
  bool corpus_run = false;
  auto* corpus = app.add_subcommand(
      "corpus", "Generate (and optionally run) a persona corpus");
  corpus->add_option("--spec", spec_path, "per-class count JSON file")
      ->required()
      ->envname("OAUTHGUARD_SPEC");
  corpus->add_option("--seed", seed, "shuffle seed")
      ->envname("OAUTHGUARD_SEED");
  corpus->add_flag("--run", corpus_run,
                   "run all personas' flows and print the scan report");
  corpus->add_option("--out", corpus_out, "write output to a file");
  corpus->add_option("--format", corpus_format, "json|text report format")
      ->check(CLI::IsMember({"json", "text"}));

  CLI11_PARSE(app, argc, argv);

  if (scan->parsed()) return cmd_scan(har_path, scan_whitelist, scan_format);
  if (proxy->parsed()) {
    if (report_only && enforce) {
      std::cerr << "proxy: --report-only and --enforce are exclusive\n";
      return 1;
    }
    return cmd_proxy(listen, ca_cert, ca_key, report_only, no_upgrade,
                     proxy_whitelist, resolve_rules, upstream_ca,
                     proxy_format);
  }
  if (corpus->parsed()) {
    return cmd_corpus(spec_path, seed, corpus_run, corpus_out, corpus_format);
  }
  return 1;
}
