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

#include "oauthguard/detector.hpp"

#include <algorithm>
#include <cctype>

namespace oauthguard {

namespace {

constexpr std::size_t kBodyExcerptLimit = 256;

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  });
  return out;
}

bool has_nonempty(const ParamMap& params, const char* name) {
  auto it = params.find(name);
  return it != params.end() && !it->second.empty();
}

nlohmann::json opt_json(const std::optional<std::string>& value) {
  if (!value) return nullptr;
  return *value;
}

}  // namespace

TxClass classify(const HttpTransaction& tx) {
  std::string url_text = tx.url.path;
  if (!tx.url.query.empty()) {
    url_text += '?';
    url_text += serialize_query(tx.url.query);
  }
  bool has_keyword = to_lower(url_text).find("oauth") != std::string::npos;
  bool has_redirect_uri = false;
  for (const auto& [k, v] : tx.url.query) {
    if (k == "redirect_uri") {
      has_redirect_uri = true;
      break;
    }
  }
  if (has_keyword && has_redirect_uri) return TxClass::kOAuthRequest;

  ParamMap params = extract_params(tx);
  if (has_nonempty(params, "code") || has_nonempty(params, "access_token") ||
      has_nonempty(params, "id_token")) {
    return TxClass::kOAuthResponse;
  }
  return TxClass::kNotOAuth;
}

OAuthRequestMeta extract_request_meta(const HttpTransaction& tx,
                                      const PublicSuffixList& psl) {
  ParamMap params = extract_params(tx);
  auto redirect_it = params.find("redirect_uri");
  if (redirect_it == params.end()) {
    throw ClassificationContradiction(
        "extract_request_meta called without a redirect_uri parameter");
  }

  OAuthRequestMeta meta;
  meta.idp = tx.url.origin();
  meta.idp_protocol = tx.url.scheme;
  meta.request_url = tx.url.serialize_without_fragment();
  meta.redirect_uri = redirect_it->second;
  meta.referer = tx.header("Referer");
  meta.origin = tx.header("Origin");

  if (auto it = params.find("client_id"); it != params.end()) {
    meta.client_id = it->second;
  }
  if (auto it = params.find("response_type"); it != params.end()) {
    meta.response_type = it->second;
  }
  if (auto it = params.find("scope"); it != params.end()) {
    meta.scope = it->second;
  }
  if (auto it = params.find("state"); it != params.end()) {
    meta.state = it->second;
  }

  if (auto target = try_parse_url(meta.redirect_uri)) {
    meta.rp = target->host;
    meta.rp_protocol = target->scheme;
    meta.rp_domain = psl.registrable_domain(target->host).registrable;
  }
  return meta;
}

OAuthResponseMeta extract_response_meta(const HttpTransaction& tx,
                                        const PublicSuffixList& psl) {
  ParamMap params = extract_params(tx);

  OAuthResponseMeta meta;
  meta.method = tx.method;
  meta.response_url = tx.url.serialize_without_fragment();
  meta.rp_host = tx.url.host;
  meta.rp_protocol = tx.url.scheme;
  meta.rp_domain = psl.registrable_domain(tx.url.host).registrable;
  meta.referer = tx.header("Referer");
  meta.cookie = tx.header("Cookie").value_or("");
  if (tx.body) meta.data = tx.body->bytes.substr(0, kBodyExcerptLimit);

  if (auto it = params.find("access_token"); it != params.end()) {
    meta.access_token = it->second;
  }
  if (auto it = params.find("code"); it != params.end()) {
    meta.code = it->second;
  }
  if (auto it = params.find("id_token"); it != params.end()) {
    meta.id_token = it->second;
  }
  if (auto it = params.find("state"); it != params.end()) {
    meta.state = it->second;
  }

  if (meta.referer && !meta.referer->empty()) {
    if (auto ref = try_parse_url(*meta.referer)) {
      meta.idp = psl.registrable_domain(ref->host).registrable;
    }
  }
  return meta;
}

nlohmann::json OAuthRequestMeta::to_json() const {
  return nlohmann::json{
      {"IdP", idp},
      {"IdPProtocol", scheme_label(idp_protocol)},
      {"RP", rp},
      {"RPDomain", rp_domain},
      {"RPProtocol", scheme_label(rp_protocol)},
      {"clientID", client_id},
      {"origin", opt_json(origin)},
      {"redirectURI", redirect_uri},
      {"referer", opt_json(referer)},
      {"requestURL", request_url},
      {"responseType", response_type},
      {"scope", scope},
      {"state", opt_json(state)},
  };
}

nlohmann::json OAuthResponseMeta::to_json() const {
  return nlohmann::json{
      {"IdP", idp},
      {"RPDomain", rp_domain},
      {"RPHost", rp_host},
      {"RPProtocol", scheme_label(rp_protocol)},
      {"access_token", access_token},
      {"code", code},
      {"cookie", cookie},
      {"data", data},
      {"id_token", id_token},
      {"method", method},
      {"referer", opt_json(referer)},
      {"responseURL", response_url},
      {"state", opt_json(state)},
  };
}

SessionStore::SessionStore(std::chrono::steady_clock::duration ttl,
                           Clock clock)
    : ttl_(ttl), clock_(std::move(clock)) {
  if (!clock_) {
    clock_ = [] { return std::chrono::steady_clock::now(); };
  }
}

void SessionStore::store_request(const OAuthRequestMeta& meta) {
  std::lock_guard lock(mutex_);
  entries_[meta.rp_domain] = {meta, clock_()};
}

std::optional<OAuthRequestMeta> SessionStore::lookup_request(
    const std::string& rp_domain) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(rp_domain);
  if (it == entries_.end()) return std::nullopt;
  if (clock_() - it->second.second > ttl_) {
    entries_.erase(it);
    return std::nullopt;
  }
  return it->second.first;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace oauthguard
