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

#include "oauthguard/analyser.hpp"

#include <fstream>
#include <sstream>

#include "bundled_data.inc"

namespace oauthguard {

namespace {

constexpr std::size_t kRedactPrefix = 6;

bool is_token_name(const std::string& name) {
  return name == "code" || name == "access_token" || name == "id_token";
}

/// URL for evidence fields: token parameter values are redacted.
std::string redacted_url(const UrlParts& url) {
  UrlParts scrubbed = url;
  for (auto& [name, value] : scrubbed.query) {
    if (is_token_name(name) && !value.empty()) value = redact_token(value);
  }
  return scrubbed.serialize_without_fragment();
}

/// Names of the non-empty token parameters, e.g. "code+access_token".
std::string token_names(const OAuthResponseMeta& resp) {
  std::string out;
  auto add = [&out](const char* name) {
    if (!out.empty()) out += '+';
    out += name;
  };
  if (!resp.code.empty()) add("code");
  if (!resp.access_token.empty()) add("access_token");
  if (!resp.id_token.empty()) add("id_token");
  return out;
}

}  // namespace

std::string to_string(FindingClass klass) {
  switch (klass) {
    case FindingClass::kCsrfThreat: return "csrf-threat";
    case FindingClass::kImpersonation: return "impersonation";
    case FindingClass::kFlowMisuse: return "flow-misuse";
    case FindingClass::kUnsafeTransfer: return "unsafe-transfer";
    case FindingClass::kRefererLeak: return "referer-leak";
    case FindingClass::kIntentionalLeak: return "intentional-leak";
  }
  return "unknown";
}

std::optional<FindingClass> finding_class_from_string(std::string_view name) {
  static const std::map<std::string, FindingClass, std::less<>> kNames = {
      {"csrf-threat", FindingClass::kCsrfThreat},
      {"impersonation", FindingClass::kImpersonation},
      {"flow-misuse", FindingClass::kFlowMisuse},
      {"unsafe-transfer", FindingClass::kUnsafeTransfer},
      {"referer-leak", FindingClass::kRefererLeak},
      {"intentional-leak", FindingClass::kIntentionalLeak},
  };
  auto it = kNames.find(name);
  if (it == kNames.end()) return std::nullopt;
  return it->second;
}

std::string redact_token(std::string_view token) {
  std::string out(token.substr(0, kRedactPrefix));
  out += "...(";
  out += std::to_string(token.size());
  out += ')';
  return out;
}

Whitelist Whitelist::from_string(std::string_view data,
                                 const PublicSuffixList& psl) {
  Whitelist wl;
  std::istringstream in{std::string(data)};
  std::string line;
  while (std::getline(in, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    auto end = line.find_last_not_of(" \t\r");
    wl.insert(line.substr(begin, end - begin + 1), psl);
  }
  return wl;
}

Whitelist Whitelist::from_file(const std::string& path,
                               const PublicSuffixList& psl) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open whitelist file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str(), psl);
}

const Whitelist& Whitelist::bundled() {
  static const Whitelist wl = Whitelist::from_string(kBundledWhitelistData);
  return wl;
}

void Whitelist::insert(std::string_view domain, const PublicSuffixList& psl) {
  entries_.insert(psl.registrable_domain(domain).registrable);
}

bool Whitelist::contains(std::string_view registrable_domain) const {
  return entries_.count(std::string(registrable_domain)) > 0;
}

std::optional<Finding> detect_csrf_threat(const OAuthResponseMeta& resp) {
  if (resp.state && !resp.state->empty()) return std::nullopt;
  Finding f;
  f.klass = FindingClass::kCsrfThreat;
  f.rp_domain = resp.rp_domain;
  f.evidence["state"] = resp.state ? "empty" : "absent";
  f.evidence["tokens"] = token_names(resp);
  return f;
}

std::optional<Finding> detect_impersonation(const OAuthResponseMeta& resp) {
  if (resp.access_token.empty() || !resp.code.empty() ||
      !resp.id_token.empty()) {
    return std::nullopt;
  }
  Finding f;
  f.klass = FindingClass::kImpersonation;
  f.rp_domain = resp.rp_domain;
  f.evidence["tokens"] = "access_token";
  f.evidence["access_token"] = redact_token(resp.access_token);
  return f;
}

std::optional<Finding> detect_flow_misuse(const OAuthResponseMeta& resp) {
  int present = (!resp.code.empty() ? 1 : 0) +
                (!resp.access_token.empty() ? 1 : 0) +
                (!resp.id_token.empty() ? 1 : 0);
  if (present < 2) return std::nullopt;
  Finding f;
  f.klass = FindingClass::kFlowMisuse;
  f.rp_domain = resp.rp_domain;
  f.evidence["tokens"] = token_names(resp);
  return f;
}

std::optional<Finding> detect_unsafe_transfer(const OAuthResponseMeta& resp) {
  if (resp.rp_protocol != Scheme::kHttp) return std::nullopt;
  Finding f;
  f.klass = FindingClass::kUnsafeTransfer;
  f.rp_domain = resp.rp_domain;
  f.evidence["scheme"] = scheme_label(resp.rp_protocol);
  f.evidence["tokens"] = token_names(resp);
  return f;
}

std::optional<Finding> detect_referer_leak(const HttpTransaction& tx,
                                           const PublicSuffixList& psl) {
  auto referer = tx.header("Referer");
  if (!referer || referer->empty()) return std::nullopt;
  auto ref_url = try_parse_url(*referer);
  if (!ref_url) return std::nullopt;  // cannot establish a leak

  ParamMap params;
  for (const auto& [k, v] : ref_url->query) params.emplace(k, v);
  if (ref_url->fragment) {
    for (const auto& [k, v] : parse_query_string(*ref_url->fragment)) {
      params.emplace(k, v);
    }
  }
  std::string leaked_names;
  std::string leaked_value;
  for (const char* name : {"code", "access_token", "id_token"}) {
    auto it = params.find(name);
    if (it != params.end() && !it->second.empty()) {
      if (!leaked_names.empty()) leaked_names += '+';
      leaked_names += name;
      if (leaked_value.empty()) leaked_value = it->second;
    }
  }
  if (leaked_names.empty()) return std::nullopt;

  std::string referer_domain = psl.registrable_domain(ref_url->host).registrable;
  std::string request_domain = psl.registrable_domain(tx.url.host).registrable;
  if (referer_domain == request_domain) return std::nullopt;

  Finding f;
  f.klass = FindingClass::kRefererLeak;
  f.rp_domain = referer_domain;
  f.evidence["tokens"] = leaked_names;
  f.evidence["token"] = redact_token(leaked_value);
  f.evidence["referer"] = redacted_url(*ref_url);
  f.evidence["thirdParty"] = request_domain;
  return f;
}

namespace {

Finding intentional_leak_finding(const OAuthResponseMeta& resp,
                                 const PublicSuffixList& psl) {
  Finding f;
  f.klass = FindingClass::kIntentionalLeak;
  f.rp_domain = resp.rp_domain;
  if (resp.referer && !resp.referer->empty()) {
    if (auto ref = try_parse_url(*resp.referer)) {
      f.rp_domain = psl.registrable_domain(ref->host).registrable;
    }
  }
  f.evidence["tokens"] = token_names(resp);
  f.evidence["target"] = resp.rp_host;
  if (!resp.code.empty()) {
    f.evidence["code"] = redact_token(resp.code);
  } else if (!resp.access_token.empty()) {
    f.evidence["access_token"] = redact_token(resp.access_token);
  } else if (!resp.id_token.empty()) {
    f.evidence["id_token"] = redact_token(resp.id_token);
  }
  return f;
}

}  // namespace

std::optional<Finding> detect_intentional_leak(const HttpTransaction& tx,
                                               const SessionStore& store,
                                               const Whitelist& wl,
                                               const PublicSuffixList& psl) {
  OAuthResponseMeta resp = extract_response_meta(tx, psl);
  if (store.lookup_request(resp.rp_domain)) return std::nullopt;
  if (wl.contains(resp.rp_domain)) return std::nullopt;
  return intentional_leak_finding(resp, psl);
}

std::vector<Finding> analyse_response(
    const std::optional<OAuthRequestMeta>& req, const OAuthResponseMeta& resp,
    const Whitelist& wl) {
  std::vector<Finding> findings;
  if (!req) {
    if (!wl.contains(resp.rp_domain)) {
      findings.push_back(
          intentional_leak_finding(resp, PublicSuffixList::bundled()));
    }
    return findings;
  }
  if (auto f = detect_csrf_threat(resp)) findings.push_back(*f);
  if (auto f = detect_impersonation(resp)) findings.push_back(*f);
  if (auto f = detect_flow_misuse(resp)) findings.push_back(*f);
  if (auto f = detect_unsafe_transfer(resp)) findings.push_back(*f);
  return findings;
}

}  // namespace oauthguard
