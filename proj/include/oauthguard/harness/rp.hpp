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

#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oauthguard/analyser.hpp"
#include "oauthguard/harness/mock_idp.hpp"
#include "oauthguard/harness/web.hpp"

namespace oauthguard::harness {

enum class Flow { kAuthorizationCode, kImplicit };

/// Relying-party persona describing the sign-in behavior to simulate,
/// including any planted weaknesses.
struct RpProfile {
  std::string name;
  Flow flow = Flow::kAuthorizationCode;
  bool sends_state = true;
  bool uses_https = true;
  bool https_available = true;
  std::vector<std::string> tokens_submitted = {"code"};
  std::vector<std::string> third_party_resources;  // one resource fetch each
  std::optional<std::string> intentional_leak_target;
  int intentional_leak_requests = 0;
  std::optional<std::string> via_proxy_service;

  std::string host() const { return name + ".test"; }
  Scheme scheme() const { return uses_https ? Scheme::kHttps : Scheme::kHttp; }
  std::string origin() const { return to_string(scheme()) + "://" + host(); }
  std::string https_origin() const { return "https://" + host(); }
  std::string client_id() const { return name + "-client.apps.idp.test"; }
  std::string redirect_uri() const { return origin() + "/google/authcallback"; }
  std::string signin_endpoint() const { return origin() + "/google/signin"; }

  bool submits(std::string_view token) const;
  /// "code", "token", "code id_token", ... following tokens_submitted.
  std::string response_type() const;
  /// Implicit grants deliver in the URI fragment; code (and query-mode
  /// hybrid) personas take delivery in the query.
  bool fragment_delivery() const { return flow == Flow::kImplicit; }

  /// Classes the analyser is expected to report for this persona's
  /// flows (ground truth for corpus assertions).
  std::set<FindingClass> expected_classes() const;

  /// Throws std::invalid_argument when flags are inconsistent.
  void validate() const;

  nlohmann::json to_json() const;
  static RpProfile from_json(const nlohmann::json& j);

  bool operator==(const RpProfile&) const = default;
};

/// Live server half of a persona: landing page, sign-in start, the
/// redirect-uri callback and the sign-in endpoint. Token exchange and
/// userinfo run against the IdP directly (server side), never through
/// the simulated browser.
class RpPersona {
 public:
  RpPersona(RpProfile profile, MockIdp* idp);

  const RpProfile& profile() const { return profile_; }

  /// Authorization request URL with a fresh state (when the persona
  /// sends one). prompt=none models a user already signed in at the IdP.
  std::string make_authorize_url(bool prompt_none = false);

  WebResponse handle(const WebRequest& request);

  std::optional<IdpUser> last_sign_in() const;
  void reset_sign_in();

 private:
  WebResponse handle_callback(const WebRequest& request);
  WebResponse handle_submit(const WebRequest& request);
  WebResponse handle_welcome(const WebRequest& request) const;
  WebResponse resource_page(const std::string& note) const;

  /// Validates state (when sent), redeems tokens with the IdP and
  /// records the signed-in user. Returns the failure response on error.
  std::optional<WebResponse> complete_sign_in(const ParamMap& params);

  RpProfile profile_;
  MockIdp* idp_;
  mutable std::mutex mutex_;
  std::set<std::string> valid_states_;
  std::optional<IdpUser> signed_in_;
  std::mt19937_64 rng_;
};

}  // namespace oauthguard::harness
