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

#include "oauthguard/harness/rp.hpp"

#include <algorithm>
#include <stdexcept>

namespace oauthguard::harness {

namespace {

const char* kScope = "email profile";

std::string random_state(std::mt19937_64& rng) {
  static const char* kAlphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_";
  std::string out = "st-";
  std::uniform_int_distribution<std::size_t> pick(0, 62);
  for (int i = 0; i < 24; ++i) out.push_back(kAlphabet[pick(rng)]);
  return out;
}

}  // namespace

bool RpProfile::submits(std::string_view token) const {
  return std::find(tokens_submitted.begin(), tokens_submitted.end(), token) !=
         tokens_submitted.end();
}

std::string RpProfile::response_type() const {
  std::string out;
  auto add = [&out](const char* piece) {
    if (!out.empty()) out += ' ';
    out += piece;
  };
  if (submits("code")) add("code");
  if (submits("access_token")) add("token");
  if (submits("id_token")) add("id_token");
  return out;
}

std::set<FindingClass> RpProfile::expected_classes() const {
  std::set<FindingClass> classes;
  if (!sends_state) classes.insert(FindingClass::kCsrfThreat);
  if (tokens_submitted.size() == 1 && submits("access_token")) {
    classes.insert(FindingClass::kImpersonation);
  }
  if (tokens_submitted.size() >= 2) classes.insert(FindingClass::kFlowMisuse);
  if (!uses_https) classes.insert(FindingClass::kUnsafeTransfer);
  if (!third_party_resources.empty()) {
    classes.insert(FindingClass::kRefererLeak);
  }
  if (intentional_leak_target) classes.insert(FindingClass::kIntentionalLeak);
  return classes;
}

void RpProfile::validate() const {
  if (name.empty()) throw std::invalid_argument("profile needs a name");
  if (tokens_submitted.empty()) {
    throw std::invalid_argument("profile must submit at least one token");
  }
  for (const auto& token : tokens_submitted) {
    if (token != "code" && token != "access_token" && token != "id_token") {
      throw std::invalid_argument("unknown token kind '" + token + "'");
    }
  }
  if (flow == Flow::kImplicit && !submits("access_token")) {
    throw std::invalid_argument(
        "implicit flow requires access_token among the submitted tokens");
  }
  if (intentional_leak_target && intentional_leak_requests <= 0) {
    throw std::invalid_argument(
        "intentional leak target set without a request count");
  }
}

nlohmann::json RpProfile::to_json() const {
  nlohmann::json j{
      {"name", name},
      {"flow", flow == Flow::kImplicit ? "implicit" : "authorizationCode"},
      {"sendsState", sends_state},
      {"usesHttps", uses_https},
      {"httpsAvailable", https_available},
      {"tokensSubmitted", tokens_submitted},
      {"thirdPartyResources", third_party_resources},
  };
  if (intentional_leak_target) {
    j["intentionalLeakTarget"] = *intentional_leak_target;
    j["intentionalLeakRequests"] = intentional_leak_requests;
  }
  if (via_proxy_service) j["viaProxyService"] = *via_proxy_service;
  return j;
}

RpProfile RpProfile::from_json(const nlohmann::json& j) {
  RpProfile profile;
  profile.name = j.at("name").get<std::string>();
  profile.flow = j.at("flow").get<std::string>() == "implicit"
                     ? Flow::kImplicit
                     : Flow::kAuthorizationCode;
  profile.sends_state = j.at("sendsState").get<bool>();
  profile.uses_https = j.at("usesHttps").get<bool>();
  profile.https_available = j.at("httpsAvailable").get<bool>();
  profile.tokens_submitted =
      j.at("tokensSubmitted").get<std::vector<std::string>>();
  profile.third_party_resources =
      j.at("thirdPartyResources").get<std::vector<std::string>>();
  if (j.contains("intentionalLeakTarget")) {
    profile.intentional_leak_target =
        j.at("intentionalLeakTarget").get<std::string>();
    profile.intentional_leak_requests =
        j.value("intentionalLeakRequests", 1);
  }
  if (j.contains("viaProxyService")) {
    profile.via_proxy_service = j.at("viaProxyService").get<std::string>();
  }
  profile.validate();
  return profile;
}

RpPersona::RpPersona(RpProfile profile, MockIdp* idp)
    : profile_(std::move(profile)), idp_(idp), rng_(std::random_device{}()) {
  profile_.validate();
  idp_->register_client(profile_.client_id(), profile_.redirect_uri(),
                        profile_.name + "-secret");
}

std::string RpPersona::make_authorize_url(bool prompt_none) {
  std::vector<std::pair<std::string, std::string>> query = {
      {"client_id", profile_.client_id()},
      {"redirect_uri", profile_.redirect_uri()},
      {"response_type", profile_.response_type()},
      {"scope", kScope},
  };
  if (profile_.sends_state) {
    std::string state;
    {
      std::lock_guard lock(mutex_);
      state = random_state(rng_);
      valid_states_.insert(state);
    }
    query.emplace_back("state", state);
  }
  // Hybrid personas that take delivery in the query ask for it explicitly.
  if (!profile_.fragment_delivery() && profile_.tokens_submitted.size() > 1) {
    query.emplace_back("response_mode", "query");
  }
  if (prompt_none) query.emplace_back("prompt", "none");
  return idp_->authorize_url() + "?" + serialize_query(query);
}

std::optional<WebResponse> RpPersona::complete_sign_in(const ParamMap& params) {
  if (profile_.sends_state) {
    auto state = params.find("state");
    std::lock_guard lock(mutex_);
    if (state == params.end() ||
        valid_states_.erase(state->second) == 0) {
      return WebResponse::failure(403, "sign-in failed: state mismatch");
    }
  }

  std::string access_token;
  if (auto it = params.find("code");
      it != params.end() && !it->second.empty()) {
    ParamMap exchange = {
        {"grant_type", "authorization_code"},
        {"code", it->second},
        {"client_id", profile_.client_id()},
        {"client_secret", profile_.name + "-secret"},
        {"redirect_uri", profile_.redirect_uri()},
    };
    auto result = idp_->token(exchange);
    if (result.status != 200) {
      return WebResponse::failure(403, "sign-in failed: code rejected");
    }
    access_token = result.body.at("access_token").get<std::string>();
  } else if (auto at = params.find("access_token");
             at != params.end() && !at->second.empty()) {
    access_token = at->second;
  } else {
    return WebResponse::failure(400, "sign-in failed: no usable token");
  }

  auto info = idp_->userinfo(access_token);
  if (info.status != 200) {
    return WebResponse::failure(403, "sign-in failed: token rejected");
  }
  IdpUser user{info.body.at("sub").get<std::string>(),
               info.body.at("email").get<std::string>(),
               info.body.value("name", "")};
  {
    std::lock_guard lock(mutex_);
    signed_in_ = user;
  }
  return std::nullopt;
}

WebResponse RpPersona::resource_page(const std::string& note) const {
  std::string html = "<html><body><h1>Signing you in at " + profile_.host() +
                     "</h1><p>" + note + "</p>\n";
  int index = 0;
  for (const auto& host : profile_.third_party_resources) {
    html += "<img src=\"https://" + host + "/r/" + std::to_string(index++) +
            ".gif\" width=\"1\" height=\"1\"/>\n";
  }
  html += "<a href=\"/welcome\">continue</a></body></html>";
  return WebResponse::page(html);
}

WebResponse RpPersona::handle_callback(const WebRequest& request) {
  if (profile_.fragment_delivery()) {
    // Tokens sit in the URI fragment; the page script extracts them and
    // submits to the sign-in endpoint.
    return WebResponse::page(
        "<html><body><script>/* extracts tokens from the fragment and "
        "submits them to /google/signin */</script>signing in…"
        "</body></html>");
  }
  ParamMap params = request.params();
  if (auto failure = complete_sign_in(params)) return *failure;
  if (!profile_.third_party_resources.empty()) {
    // page rendered straight on the token-bearing URL
    return resource_page("almost there");
  }
  return WebResponse::redirect("/welcome");
}

WebResponse RpPersona::handle_submit(const WebRequest& request) {
  ParamMap params = request.params();
  if (auto failure = complete_sign_in(params)) return *failure;
  if (!profile_.third_party_resources.empty()) {
    return resource_page("almost there");
  }
  return WebResponse::redirect("/welcome");
}

WebResponse RpPersona::handle_welcome(const WebRequest&) const {
  std::optional<IdpUser> user;
  {
    std::lock_guard lock(mutex_);
    user = signed_in_;
  }
  if (!user) return WebResponse::failure(403, "not signed in");
  return WebResponse::page("<html><body><h1>Welcome " + user->email +
                           "</h1><p>Signed in with Google at " +
                           profile_.host() + ".</p></body></html>");
}

WebResponse RpPersona::handle(const WebRequest& request) {
  if (request.path == "/" || request.path.empty()) {
    return WebResponse::page(
        "<html><body><h1>" + profile_.host() +
        "</h1><a href=\"/signin/start\">Sign in with Google</a>"
        "</body></html>");
  }
  if (request.path == "/signin/start") {
    return WebResponse::redirect(make_authorize_url(false));
  }
  if (request.path == "/google/authcallback") {
    return handle_callback(request);
  }
  if (request.path == "/google/signin") {
    return handle_submit(request);
  }
  if (request.path == "/welcome") {
    return handle_welcome(request);
  }
  return WebResponse::failure(404, "no such page");
}

std::optional<IdpUser> RpPersona::last_sign_in() const {
  std::lock_guard lock(mutex_);
  return signed_in_;
}

void RpPersona::reset_sign_in() {
  std::lock_guard lock(mutex_);
  signed_in_.reset();
}

}  // namespace oauthguard::harness
