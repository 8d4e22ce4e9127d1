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

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oauthguard/har.hpp"
#include "oauthguard/http_model.hpp"
#include "oauthguard/resolver.hpp"

namespace oauthguard::harness {

struct UaOptions {
  /// Forward proxy to send everything through; unset dials directly via
  /// the resolver.
  std::optional<std::pair<std::string, int>> proxy;

  /// CA bundle for verifying MITM'd TLS when proxied. Direct connections
  /// dial loopback by IP, so verification stays off there.
  std::string proxy_ca_bundle;

  HostResolver resolver;
  bool record = true;
};

/// Browser-shaped HTTP client: referer propagation with https->http
/// suppression, manual redirect following, fragment retention, and a
/// wire-faithful transaction record (fragments never leave the client).
class UserAgent {
 public:
  explicit UserAgent(UaOptions options);

  struct Form {
    std::string body;
    std::string content_type = "application/x-www-form-urlencoded";
  };

  struct NavResult {
    bool ok = false;   // transport success of the last hop
    int status = 0;
    std::string body;
    std::string location;  // Location header of the last hop, if any
    UrlParts final_url;
    ParamMap fragment_params;  // artifacts collected from URI fragments
    bool blocked = false;      // proxy returned a 403 interstitial
    bool stopped = false;      // stop predicate fired
    UrlParts pending_url;      // the hop not taken when stopped
    std::string error;
  };

  using StopPredicate = std::function<bool(const UrlParts& next)>;

  /// Single request, no redirect following.
  NavResult request(const std::string& method, const UrlParts& url,
                    const std::optional<std::string>& referer,
                    const std::optional<Form>& form = std::nullopt);

  /// Follows redirects like a browser: 307/308 keep method and body,
  /// everything else degrades to GET; the referer rides along unchanged;
  /// Location fragments are stashed, never sent.
  NavResult navigate(const std::string& method, const UrlParts& url,
                     const std::optional<std::string>& referer,
                     const std::optional<Form>& form = std::nullopt,
                     StopPredicate stop = nullptr, int max_hops = 15);

  const std::vector<std::pair<HttpTransaction, int>>& recorded() const {
    return recorded_;
  }
  std::vector<HttpTransaction> transactions() const;
  HarWriter har() const;
  void clear_recorded() { recorded_.clear(); }

 private:
  NavResult fetch(const std::string& method, const UrlParts& url,
                  const std::optional<std::string>& referer,
                  const std::optional<Form>& form);

  UaOptions options_;
  std::vector<std::pair<HttpTransaction, int>> recorded_;
};

}  // namespace oauthguard::harness
