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

#include "oauthguard/pipeline.hpp"

#include <algorithm>

namespace oauthguard {

namespace {

constexpr std::chrono::seconds kUpgradeMarkerTtl{120};

}  // namespace

Pipeline::Pipeline(PolicyConfig cfg, const PublicSuffixList& psl,
                   SessionStore::Clock clock)
    : cfg_(std::move(cfg)),
      psl_(psl),
      store_(SessionStore::kDefaultTtl, std::move(clock)) {}

std::string Pipeline::upgrade_key(const UrlParts& url) {
  // Scheme-free semantic key: the upgraded retry arrives over https while
  // the marker was minted from the http original.
  std::string key = url.host + ':' + std::to_string(url.port == 80 ? 443 : url.port);
  key += url.path;
  if (!url.query.empty()) {
    key += '?';
    key += serialize_query(url.query);
  }
  return key;
}

void Pipeline::note_upgrade(const std::string& key) {
  std::lock_guard lock(mutex_);
  upgrade_markers_[key] = std::chrono::steady_clock::now();
}

bool Pipeline::consume_upgrade_marker(const std::string& key) {
  std::lock_guard lock(mutex_);
  auto now = std::chrono::steady_clock::now();
  std::erase_if(upgrade_markers_, [now](const auto& entry) {
    return now - entry.second > kUpgradeMarkerTtl;
  });
  auto it = upgrade_markers_.find(key);
  if (it == upgrade_markers_.end()) return false;
  upgrade_markers_.erase(it);
  return true;
}

MitigationAction Pipeline::process(const HttpTransaction& tx) {
  std::uint64_t ref;
  {
    std::lock_guard lock(mutex_);
    ref = next_ref_++;
    ++report_.scanned_transactions;
  }

  std::vector<Finding> findings;
  DecisionContext ctx;
  TxClass klass = classify(tx);

  if (klass == TxClass::kOAuthRequest) {
    OAuthRequestMeta meta = extract_request_meta(tx, psl_);
    store_.store_request(meta);
    std::lock_guard lock(mutex_);
    ++report_.oauth_requests;
    if (!meta.rp_domain.empty()) report_.rp_domains_seen.insert(meta.rp_domain);
  } else if (klass == TxClass::kOAuthResponse) {
    ctx.is_oauth_response = true;
    OAuthResponseMeta resp = extract_response_meta(tx, psl_);
    auto stored = store_.lookup_request(resp.rp_domain);
    auto analysed = analyse_response(stored, resp, cfg_.whitelist);
    findings.insert(findings.end(), analysed.begin(), analysed.end());

    if (consume_upgrade_marker(upgrade_key(tx.url))) {
      // Response was upgraded from an HTTP delivery; the compatibility
      // skip of the http case applies.
      ctx.referer_verdict = RefererVerdict::kAllow;
    } else if (!stored && cfg_.whitelist.contains(resp.rp_domain)) {
      ctx.referer_verdict = RefererVerdict::kAllow;
    } else {
      ctx.referer_verdict = validate_referer(resp, stored, cfg_.whitelist, psl_);
    }

    std::lock_guard lock(mutex_);
    ++report_.oauth_responses;
    if (stored) report_.rp_domains_seen.insert(resp.rp_domain);
  }

  if (auto leak = detect_referer_leak(tx, psl_)) findings.push_back(*leak);

  MitigationAction action = decide(findings, tx, ctx, cfg_);
  if (std::find(action.applied_policies.begin(), action.applied_policies.end(),
                "https-upgrade") != action.applied_policies.end()) {
    // Marked in report-only mode as well so that rescanning a capture of
    // an enforced run reproduces the same referer-validation skips.
    note_upgrade(upgrade_key(tx.url));
  }

  {
    std::lock_guard lock(mutex_);
    for (Finding& f : findings) {
      f.transaction_ref = ref;
      report_.add_finding(f);
    }
    report_.note_action(action.verdict);
  }
  return action;
}

Report Pipeline::snapshot() const {
  std::lock_guard lock(mutex_);
  return report_;
}

Report scan_transactions(const std::vector<HttpTransaction>& transactions,
                         const Whitelist& wl, const PublicSuffixList& psl) {
  PolicyConfig cfg;
  cfg.mode = EnforcementMode::kReportOnly;
  cfg.whitelist = wl;
  Pipeline pipeline(cfg, psl);
  for (const auto& tx : transactions) pipeline.process(tx);
  return pipeline.snapshot();
}

}  // namespace oauthguard
