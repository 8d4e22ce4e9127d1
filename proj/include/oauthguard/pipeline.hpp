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
#include <mutex>
#include <vector>

#include "oauthguard/analyser.hpp"
#include "oauthguard/detector.hpp"
#include "oauthguard/protector.hpp"
#include "oauthguard/report.hpp"

namespace oauthguard {

/// Detector -> analyser -> protector over a transaction stream, with the
/// session store and the report accumulator. Safe for concurrent
/// process() calls (the proxy serves connections in parallel).
class Pipeline {
 public:
  explicit Pipeline(PolicyConfig cfg,
                    const PublicSuffixList& psl = PublicSuffixList::bundled(),
                    SessionStore::Clock clock = nullptr);

  MitigationAction process(const HttpTransaction& tx);

  Report snapshot() const;
  const PolicyConfig& config() const { return cfg_; }

 private:
  // An issued HTTPS upgrade leaves a short-lived marker for the rewritten
  // URL; the retried response then skips referer validation, since the RP
  // delivered it over HTTP and the user agent suppressed the referer.
  void note_upgrade(const std::string& key);
  bool consume_upgrade_marker(const std::string& key);
  static std::string upgrade_key(const UrlParts& url);

  PolicyConfig cfg_;
  const PublicSuffixList& psl_;
  SessionStore store_;
  mutable std::mutex mutex_;
  Report report_;
  std::uint64_t next_ref_ = 1;
  std::map<std::string, std::chrono::steady_clock::time_point>
      upgrade_markers_;
};

/// Offline (report-only) analysis of a prerecorded stream.
Report scan_transactions(
    const std::vector<HttpTransaction>& transactions, const Whitelist& wl,
    const PublicSuffixList& psl = PublicSuffixList::bundled());

}  // namespace oauthguard
