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
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oauthguard/harness/web.hpp"
#include "oauthguard/http_model.hpp"

namespace oauthguard::harness {

struct IdpUser {
  std::string sub;
  std::string email;
  std::string name;

  bool operator==(const IdpUser&) const = default;
};

/// Simulated identity provider: registration-checked authorization
/// endpoint, single-use code exchange, bearer-token userinfo. Artifacts
/// land in the redirect query, or in the fragment for implicit-style
/// response types (response_mode=query forces the query).
class MockIdp {
 public:
  explicit MockIdp(std::string host = "idp.test");

  const std::string& host() const { return host_; }
  std::string origin() const { return "https://" + host_; }
  std::string authorize_path() const { return "/o/oauth2/auth"; }
  std::string authorize_url() const { return origin() + authorize_path(); }
  std::string chooser_path() const {
    return "/signin/oauth/oauthchooseaccount";
  }

  void register_client(const std::string& client_id,
                       const std::string& redirect_uri,
                       std::optional<std::string> client_secret = {});

  void set_default_user(IdpUser user);
  const IdpUser& default_user() const { return default_user_; }
  void add_user(IdpUser user);

  /// HTTP face, wired into a HarnessWeb host entry.
  WebResponse handle(const WebRequest& request);

  // Protocol-level operations, also exercised directly by tests.
  struct AuthorizeOutcome {
    int status = 0;             // 302 on success, 4xx on error
    std::string location;      // redirect target when status == 302
    std::string error;
  };
  /// prompt=none issues artifacts for the default (signed-in) user;
  /// otherwise redirects to the account chooser.
  AuthorizeOutcome authorize(const ParamMap& params);
  AuthorizeOutcome approve(const std::string& request_id,
                           const std::string& user_email);

  struct JsonResult {
    int status = 0;
    nlohmann::json body;
  };
  JsonResult token(const ParamMap& params);
  JsonResult userinfo(const std::string& access_token);

  // test hooks
  bool code_known(const std::string& code) const;
  bool code_consumed(const std::string& code) const;
  std::vector<std::string> event_log() const;
  void clear_events();

 private:
  struct Registration {
    std::string redirect_uri;
    std::optional<std::string> secret;
  };
  struct PendingAuth {
    std::string client_id;
    std::string redirect_uri;
    std::vector<std::string> response_types;
    std::string scope;
    std::optional<std::string> state;
    bool query_mode = false;
  };
  struct CodeInfo {
    std::string client_id;
    std::string redirect_uri;
    std::string subject;
    std::string scope;
    bool consumed = false;
    std::chrono::steady_clock::time_point issued_at;
  };
  struct TokenInfo {
    std::string subject;
    std::string scope;
  };

  std::string issue_artifacts(const PendingAuth& pending, const IdpUser& user);
  std::string random_token(std::size_t length);
  std::string make_id_token(const IdpUser& user, const std::string& client_id);
  void log_event(const std::string& event);

  std::string host_;
  IdpUser default_user_{"u-alice-001", "alice@example.test", "Alice"};
  std::map<std::string, IdpUser> users_;  // by email

  mutable std::mutex mutex_;
  std::map<std::string, Registration> clients_;
  std::map<std::string, PendingAuth> pending_;
  std::map<std::string, CodeInfo> codes_;
  std::map<std::string, TokenInfo> tokens_;
  std::vector<std::string> events_;
  std::mt19937_64 rng_;
};

}  // namespace oauthguard::harness
