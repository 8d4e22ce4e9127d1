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
#include <set>
#include <string>
#include <vector>

#include "oauthguard/analyser.hpp"
#include "oauthguard/protector.hpp"

namespace oauthguard {

inline constexpr int kReportSchemaVersion = 1;

/// Aggregated scan/proxy results.
struct Report {
  std::uint64_t scanned_transactions = 0;
  std::uint64_t oauth_requests = 0;
  std::uint64_t oauth_responses = 0;
  std::vector<Finding> findings;
  std::map<std::string, std::set<FindingClass>> per_rp_summary;
  std::map<Verdict, std::uint64_t> actions_taken;
  std::set<std::string> rp_domains_seen;

  void add_finding(const Finding& f);
  void note_action(Verdict verdict) { ++actions_taken[verdict]; }

  /// Number of RP domains carrying at least one finding of the class.
  std::size_t rp_count(FindingClass klass) const;
  /// Number of RP domains with at least one finding of any class.
  std::size_t vulnerable_rp_count() const { return per_rp_summary.size(); }
  std::uint64_t action_count(Verdict verdict) const;

  bool operator==(const Report&) const = default;
};

enum class ReportFormat { kJson, kText };

std::string render_report(const Report& report, ReportFormat format);
Report report_from_json(const std::string& text);

}  // namespace oauthguard
