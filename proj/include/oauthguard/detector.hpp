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

#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "oauthguard/http_model.hpp"
#include "oauthguard/public_suffix.hpp"

namespace oauthguard {

enum class TxClass { kOAuthRequest, kOAuthResponse, kNotOAuth };

/// OAuthRequest iff the URL (path+query, case-insensitive) contains the
/// substring "oauth" and carries a parameter named redirect_uri; otherwise
/// OAuthResponse iff the merged parameters contain a non-empty code,
/// access_token or id_token. The request check runs first, so a
/// transaction is never both.
TxClass classify(const HttpTransaction& tx);

/// Metadata of an observed authorization request (the request-side record).
struct OAuthRequestMeta {
  std::string idp;  // origin of the request URL, e.g. "https://accounts.google.com"
  Scheme idp_protocol = Scheme::kHttps;
  std::string rp;        // host of redirect_uri
  std::string rp_domain; // registrable domain of rp
  Scheme rp_protocol = Scheme::kHttps;
  std::string client_id;
  std::optional<std::string> origin;
  std::string redirect_uri;
  std::optional<std::string> referer;
  std::string request_url;
  std::string response_type;
  std::string scope;
  std::optional<std::string> state;

  nlohmann::json to_json() const;
  bool operator==(const OAuthRequestMeta&) const = default;
};

/// Metadata of an observed authorization response (token-bearing request
/// back to the RP). Absent tokens are empty strings.
struct OAuthResponseMeta {
  std::string idp;  // registrable domain of the Referer host, "" when absent
  std::string rp_domain;
  std::string rp_host;
  Scheme rp_protocol = Scheme::kHttps;
  std::string access_token;
  std::string code;
  std::string cookie;
  std::string data;  // body excerpt
  std::string id_token;
  std::string method;
  std::optional<std::string> referer;
  std::string response_url;
  std::optional<std::string> state;

  nlohmann::json to_json() const;
  bool operator==(const OAuthResponseMeta&) const = default;
};

struct ClassificationContradiction : std::logic_error {
  using std::logic_error::logic_error;
};

/// Caller must have classified tx as OAuthRequest; a missing redirect_uri
/// throws ClassificationContradiction.
OAuthRequestMeta extract_request_meta(
    const HttpTransaction& tx,
    const PublicSuffixList& psl = PublicSuffixList::bundled());

OAuthResponseMeta extract_response_meta(
    const HttpTransaction& tx,
    const PublicSuffixList& psl = PublicSuffixList::bundled());

/// Request records keyed by RP registrable domain; last writer wins,
/// records expire after the TTL. The clock is injectable for tests.
class SessionStore {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  static constexpr std::chrono::minutes kDefaultTtl{10};

  explicit SessionStore(std::chrono::steady_clock::duration ttl = kDefaultTtl,
                        Clock clock = nullptr);

  void store_request(const OAuthRequestMeta& meta);
  std::optional<OAuthRequestMeta> lookup_request(
      const std::string& rp_domain) const;

  std::size_t size() const;

 private:
  std::chrono::steady_clock::duration ttl_;
  Clock clock_;
  mutable std::mutex mutex_;
  mutable std::map<
      std::string,
      std::pair<OAuthRequestMeta, std::chrono::steady_clock::time_point>>
      entries_;
};

}  // namespace oauthguard
