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

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oauthguard/harness/corpus.hpp"
#include "oauthguard/harness/mock_idp.hpp"
#include "oauthguard/harness/rp.hpp"
#include "oauthguard/harness/user_agent.hpp"
#include "oauthguard/harness/web.hpp"

namespace oauthguard::harness {

/// Owns the IdP, the persona servers and the shared web front end.
class Harness {
 public:
  Harness();
  ~Harness();

  RpPersona* add_persona(const RpProfile& profile);
  void add_personas(const std::vector<RpProfile>& profiles);

  void start();
  void stop();

  MockIdp& idp() { return idp_; }
  HarnessWeb& web() { return web_; }
  RpPersona* persona(const std::string& name);

  HostResolver resolver() const { return web_.resolver(); }
  std::string ca_bundle_path() const { return web_.ca_bundle_path(); }

 private:
  void ensure_support_host(const std::string& host);

  HarnessWeb web_;
  MockIdp idp_;
  std::map<std::string, std::unique_ptr<RpPersona>> personas_;
  std::set<std::string> support_hosts_;
};

enum class FlowMode { kLegitimate, kCsrfForged };

struct FlowOptions {
  FlowMode mode = FlowMode::kLegitimate;
  /// Referer delivered with the forged response (subject to the usual
  /// downgrade suppression); unset sends none.
  std::optional<std::string> attacker_referer =
      std::string("https://attacker.test/lure");
  /// Approving user; the IdP default when unset. Forged mode uses this
  /// for the attacker's own token acquisition.
  std::optional<std::string> user_email;
};

struct FlowResult {
  bool completed = false;  // sign-in finished on the welcome page
  bool blocked = false;    // a proxy interstitial ended the flow
  int final_status = 0;
  std::string final_body;
  std::string error;
  std::optional<IdpUser> signed_in;  // RP-side session after the flow
  std::vector<std::pair<HttpTransaction, int>> recorded;  // victim's UA
};

/// Drives a persona's sign-in through a simulated browser, optionally
/// via a proxy. Forged mode acquires a response out of band (directly,
/// as the attacker's own machine would) and delivers it cross-site.
class FlowRunner {
 public:
  FlowRunner(Harness& harness, UaOptions ua_options);

  FlowResult run(RpPersona& persona, const FlowOptions& options = {});

 private:
  FlowResult run_legitimate(RpPersona& persona, const FlowOptions& options);
  FlowResult run_forged(RpPersona& persona, const FlowOptions& options);

  /// Consent hop: submits the chooser form as the given user.
  UserAgent::NavResult approve(UserAgent& ua,
                               const UserAgent::NavResult& chooser_page,
                               const UrlParts& chooser_url,
                               const std::string& user_email,
                               UserAgent::StopPredicate stop = nullptr);

  /// Page-script behavior after landing on the callback: fragment token
  /// submission, third-party fetches, leak beacons, the welcome hop.
  void finish_sign_in(UserAgent& ua, RpPersona& persona,
                      UserAgent::NavResult at_page, FlowResult* result);

  Harness& harness_;
  UaOptions ua_options_;
};

}  // namespace oauthguard::harness
