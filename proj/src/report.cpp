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

#include "oauthguard/report.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

namespace oauthguard {

void Report::add_finding(const Finding& f) {
  findings.push_back(f);
  per_rp_summary[f.rp_domain].insert(f.klass);
  rp_domains_seen.insert(f.rp_domain);
}

std::size_t Report::rp_count(FindingClass klass) const {
  return static_cast<std::size_t>(
      std::count_if(per_rp_summary.begin(), per_rp_summary.end(),
                    [klass](const auto& entry) {
                      return entry.second.count(klass) > 0;
                    }));
}

std::uint64_t Report::action_count(Verdict verdict) const {
  auto it = actions_taken.find(verdict);
  return it == actions_taken.end() ? 0 : it->second;
}

namespace {

nlohmann::json finding_to_json(const Finding& f) {
  return nlohmann::json{
      {"class", to_string(f.klass)},
      {"rpDomain", f.rp_domain},
      {"evidence", f.evidence},
      {"transactionRef", f.transaction_ref},
  };
}

Finding finding_from_json(const nlohmann::json& j) {
  Finding f;
  auto klass = finding_class_from_string(j.at("class").get<std::string>());
  if (!klass) throw std::runtime_error("unknown finding class in report");
  f.klass = *klass;
  f.rp_domain = j.at("rpDomain").get<std::string>();
  f.evidence = j.at("evidence").get<std::map<std::string, std::string>>();
  f.transaction_ref = j.at("transactionRef").get<std::uint64_t>();
  return f;
}

}  // namespace

std::string render_report(const Report& report, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    nlohmann::json j;
    j["schemaVersion"] = kReportSchemaVersion;
    j["scannedTransactions"] = report.scanned_transactions;
    j["oauthRequests"] = report.oauth_requests;
    j["oauthResponses"] = report.oauth_responses;
    j["findings"] = nlohmann::json::array();
    for (const auto& f : report.findings) {
      j["findings"].push_back(finding_to_json(f));
    }
    j["perRpSummary"] = nlohmann::json::object();
    for (const auto& [domain, classes] : report.per_rp_summary) {
      auto arr = nlohmann::json::array();
      for (FindingClass k : classes) arr.push_back(to_string(k));
      j["perRpSummary"][domain] = arr;
    }
    j["actionsTaken"] = nlohmann::json::object();
    for (const auto& [verdict, count] : report.actions_taken) {
      j["actionsTaken"][to_string(verdict)] = count;
    }
    j["rpDomainsSeen"] = report.rp_domains_seen;
    return j.dump(2) + "\n";
  }

  std::ostringstream out;
  out << "scanned transactions: " << report.scanned_transactions << "\n";
  out << "oauth requests:       " << report.oauth_requests << "\n";
  out << "oauth responses:      " << report.oauth_responses << "\n";
  out << "actions: allow=" << report.action_count(Verdict::kAllow)
      << " block=" << report.action_count(Verdict::kBlock)
      << " upgrade=" << report.action_count(Verdict::kUpgradeToHttps)
      << " warn=" << report.action_count(Verdict::kWarn) << "\n";
  if (!report.per_rp_summary.empty()) {
    out << "\nRP domain                        findings\n";
    out << "-------------------------------  ------------------------------\n";
    for (const auto& [domain, classes] : report.per_rp_summary) {
      out << domain;
      for (std::size_t i = domain.size(); i < 33; ++i) out << ' ';
      bool first = true;
      for (FindingClass k : classes) {
        if (!first) out << ", ";
        out << to_string(k);
        first = false;
      }
      out << "\n";
    }
  }
  out << "\ntotals: " << report.vulnerable_rp_count() << "/"
      << report.rp_domains_seen.size() << " RPs with >=1 finding\n";
  return out.str();
}

Report report_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("schemaVersion").get<int>() != kReportSchemaVersion) {
    throw std::runtime_error("unsupported report schema version");
  }
  Report report;
  report.scanned_transactions = j.at("scannedTransactions").get<std::uint64_t>();
  report.oauth_requests = j.at("oauthRequests").get<std::uint64_t>();
  report.oauth_responses = j.at("oauthResponses").get<std::uint64_t>();
  for (const auto& f : j.at("findings")) {
    report.findings.push_back(finding_from_json(f));
  }
  for (const auto& [domain, classes] : j.at("perRpSummary").items()) {
    for (const auto& name : classes) {
      auto klass = finding_class_from_string(name.get<std::string>());
      if (!klass) throw std::runtime_error("unknown finding class in report");
      report.per_rp_summary[domain].insert(*klass);
    }
  }
  for (const auto& [name, count] : j.at("actionsTaken").items()) {
    auto verdict = verdict_from_string(name);
    if (!verdict) throw std::runtime_error("unknown verdict in report");
    report.actions_taken[*verdict] = count.get<std::uint64_t>();
  }
  report.rp_domains_seen =
      j.at("rpDomainsSeen").get<std::set<std::string>>();
  return report;
}

}  // namespace oauthguard
