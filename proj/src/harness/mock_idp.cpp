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

#include "oauthguard/harness/mock_idp.hpp"

#include <algorithm>
#include <sstream>

namespace oauthguard::harness {

namespace {

constexpr std::chrono::minutes kCodeLifetime{10};

std::string base64url(std::string_view data) {
  static const char* kAlphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 2 < data.size()) {
    unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                 (static_cast<unsigned char>(data[i + 1]) << 8) |
                 static_cast<unsigned char>(data[i + 2]);
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back(kAlphabet[v & 63]);
    i += 3;
  }
  if (i + 1 == data.size()) {
    unsigned v = static_cast<unsigned char>(data[i]) << 16;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
  } else if (i + 2 == data.size()) {
    unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                 (static_cast<unsigned char>(data[i + 1]) << 8);
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
  }
  return out;
}

std::vector<std::string> split_response_type(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string piece;
  while (in >> piece) out.push_back(piece);
  return out;
}

std::optional<std::string> get(const ParamMap& params, const char* name) {
  auto it = params.find(name);
  if (it == params.end()) return std::nullopt;
  return it->second;
}

}  // namespace

MockIdp::MockIdp(std::string host)
    : host_(std::move(host)), rng_(std::random_device{}()) {
  users_[default_user_.email] = default_user_;
}

void MockIdp::register_client(const std::string& client_id,
                              const std::string& redirect_uri,
                              std::optional<std::string> client_secret) {
  std::lock_guard lock(mutex_);
  clients_[client_id] = {redirect_uri, std::move(client_secret)};
}

void MockIdp::set_default_user(IdpUser user) {
  users_[user.email] = user;
  default_user_ = std::move(user);
}

void MockIdp::add_user(IdpUser user) { users_[user.email] = user; }

std::string MockIdp::random_token(std::size_t length) {
  static const char* kAlphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
  std::string out;
  out.reserve(length);
  std::uniform_int_distribution<std::size_t> pick(0, 61);
  for (std::size_t i = 0; i < length; ++i) out.push_back(kAlphabet[pick(rng_)]);
  return out;
}

std::string MockIdp::make_id_token(const IdpUser& user,
                                   const std::string& client_id) {
  // unsigned claims blob; the analysis only tests for presence
  nlohmann::json header = {{"alg", "none"}, {"typ", "JWT"}};
  nlohmann::json claims = {{"iss", origin()},
                           {"sub", user.sub},
                           {"aud", client_id},
                           {"email", user.email}};
  return base64url(header.dump()) + "." + base64url(claims.dump()) + ".";
}

void MockIdp::log_event(const std::string& event) {
  events_.push_back(event);
}

MockIdp::AuthorizeOutcome MockIdp::authorize(const ParamMap& params) {
  std::lock_guard lock(mutex_);
  log_event("authorize");

  auto client_id = get(params, "client_id");
  auto redirect_uri = get(params, "redirect_uri");
  auto response_type = get(params, "response_type");
  if (!client_id || !redirect_uri || !response_type) {
    return {400, "", "missing client_id, redirect_uri or response_type"};
  }
  auto registration = clients_.find(*client_id);
  if (registration == clients_.end()) {
    return {400, "", "unknown client_id"};
  }
  if (registration->second.redirect_uri != *redirect_uri) {
    // registered value comparison failed: the process terminates
    return {400, "", "redirect_uri does not match the registered value"};
  }

  PendingAuth pending;
  pending.client_id = *client_id;
  pending.redirect_uri = *redirect_uri;
  pending.response_types = split_response_type(*response_type);
  if (pending.response_types.empty()) {
    return {400, "", "empty response_type"};
  }
  for (const auto& rt : pending.response_types) {
    if (rt != "code" && rt != "token" && rt != "id_token") {
      return {400, "", "unsupported response_type '" + rt + "'"};
    }
  }
  pending.scope = get(params, "scope").value_or("");
  pending.state = get(params, "state");
  pending.query_mode = get(params, "response_mode").value_or("") == "query";

  if (get(params, "prompt").value_or("") == "none") {
    // user already authenticated: skip the chooser
    return {302, issue_artifacts(pending, default_user_), ""};
  }

  std::string rid = "rid-" + random_token(16);
  pending_[rid] = pending;
  return {302, origin() + chooser_path() + "?rid=" + rid, ""};
}

MockIdp::AuthorizeOutcome MockIdp::approve(const std::string& request_id,
                                           const std::string& user_email) {
  std::lock_guard lock(mutex_);
  auto it = pending_.find(request_id);
  if (it == pending_.end()) return {400, "", "unknown authorization request"};
  PendingAuth pending = it->second;
  pending_.erase(it);

  auto user = users_.find(user_email.empty() ? default_user_.email
                                             : user_email);
  if (user == users_.end()) return {400, "", "unknown user"};
  return {302, issue_artifacts(pending, user->second), ""};
}

std::string MockIdp::issue_artifacts(const PendingAuth& pending,
                                     const IdpUser& user) {
  std::vector<std::pair<std::string, std::string>> artifacts;
  bool wants_code =
      std::find(pending.response_types.begin(), pending.response_types.end(),
                "code") != pending.response_types.end();
  bool wants_token =
      std::find(pending.response_types.begin(), pending.response_types.end(),
                "token") != pending.response_types.end();
  bool wants_id_token =
      std::find(pending.response_types.begin(), pending.response_types.end(),
                "id_token") != pending.response_types.end();

  if (wants_code) {
    std::string code = "4/" + random_token(43);
    codes_[code] = {pending.client_id, pending.redirect_uri, user.sub,
                    pending.scope, false, std::chrono::steady_clock::now()};
    artifacts.emplace_back("code", code);
  }
  if (wants_token) {
    std::string token = "ya29." + random_token(40);
    tokens_[token] = {user.sub, pending.scope};
    artifacts.emplace_back("access_token", token);
    artifacts.emplace_back("token_type", "Bearer");
    artifacts.emplace_back("expires_in", "3600");
  }
  if (wants_id_token) {
    artifacts.emplace_back("id_token",
                           make_id_token(user, pending.client_id));
  }
  if (pending.state) artifacts.emplace_back("state", *pending.state);

  // Implicit-style grants land in the URI fragment; response_mode=query
  // forces the query (how several real sign-in endpoints take delivery).
  bool fragment = (wants_token || wants_id_token) && !pending.query_mode;
  std::string location = pending.redirect_uri;
  location += fragment ? '#' : (location.find('?') == std::string::npos
                                    ? '?'
                                    : '&');
  location += serialize_query(artifacts);
  return location;
}

MockIdp::JsonResult MockIdp::token(const ParamMap& params) {
  std::lock_guard lock(mutex_);
  log_event("token");

  if (get(params, "grant_type").value_or("") != "authorization_code") {
    return {400, {{"error", "unsupported_grant_type"}}};
  }
  auto client_id = get(params, "client_id");
  auto code = get(params, "code");
  auto redirect_uri = get(params, "redirect_uri");
  if (!client_id || !code || !redirect_uri) {
    return {400, {{"error", "invalid_request"}}};
  }
  auto registration = clients_.find(*client_id);
  if (registration == clients_.end()) {
    return {401, {{"error", "invalid_client"}}};
  }
  if (registration->second.secret &&
      get(params, "client_secret").value_or("") !=
          *registration->second.secret) {
    return {401, {{"error", "invalid_client"}}};
  }
  auto info = codes_.find(*code);
  if (info == codes_.end() || info->second.consumed ||
      info->second.client_id != *client_id ||
      info->second.redirect_uri != *redirect_uri ||
      std::chrono::steady_clock::now() - info->second.issued_at >
          kCodeLifetime) {
    return {400, {{"error", "invalid_grant"}}};
  }
  info->second.consumed = true;

  std::string access_token = "ya29." + random_token(40);
  tokens_[access_token] = {info->second.subject, info->second.scope};
  return {200,
          {{"access_token", access_token},
           {"token_type", "Bearer"},
           {"expires_in", 3600},
           {"scope", info->second.scope}}};
}

MockIdp::JsonResult MockIdp::userinfo(const std::string& access_token) {
  std::lock_guard lock(mutex_);
  log_event("userinfo");

  auto it = tokens_.find(access_token);
  if (access_token.empty() || it == tokens_.end()) {
    return {401, {{"error", "invalid_token"}}};
  }
  for (const auto& [email, user] : users_) {
    if (user.sub == it->second.subject) {
      return {200,
              {{"sub", user.sub}, {"email", user.email}, {"name", user.name}}};
    }
  }
  return {401, {{"error", "invalid_token"}}};
}

WebResponse MockIdp::handle(const WebRequest& request) {
  if (request.path == authorize_path()) {
    auto outcome = authorize(request.params());
    if (outcome.status == 302) return WebResponse::redirect(outcome.location);
    return WebResponse::failure(outcome.status, outcome.error);
  }
  if (request.path == chooser_path()) {
    auto params = request.params();
    auto rid = params.find("rid");
    if (rid == params.end()) {
      return WebResponse::failure(400, "missing rid");
    }
    std::string html =
        "<html><body><h1>Choose an account</h1>"
        "<form method=\"post\" action=\"/signin/oauth/approve\">"
        "<input type=\"hidden\" name=\"rid\" value=\"" +
        rid->second +
        "\"/>"
        "<input type=\"text\" name=\"user\" value=\"" +
        default_user_.email +
        "\"/>"
        "<button type=\"submit\">Continue</button></form></body></html>";
    return WebResponse::page(html);
  }
  if (request.path == "/signin/oauth/approve" && request.method == "POST") {
    auto params = request.params();
    auto rid = params.find("rid");
    if (rid == params.end()) return WebResponse::failure(400, "missing rid");
    std::string user;
    if (auto it = params.find("user"); it != params.end()) user = it->second;
    auto outcome = approve(rid->second, user);
    if (outcome.status == 302) return WebResponse::redirect(outcome.location);
    return WebResponse::failure(outcome.status, outcome.error);
  }
  if (request.path == "/o/oauth2/token" && request.method == "POST") {
    auto result = token(request.params());
    return WebResponse::json(result.body.dump(), result.status);
  }
  if (request.path == "/oauth2/v3/userinfo") {
    std::string token_value;
    if (auto auth = request.header("Authorization")) {
      if (auth->rfind("Bearer ", 0) == 0) token_value = auth->substr(7);
    }
    if (token_value.empty()) {
      auto params = request.params();
      if (auto it = params.find("access_token"); it != params.end()) {
        token_value = it->second;
      }
    }
    auto result = userinfo(token_value);
    return WebResponse::json(result.body.dump(), result.status);
  }
  return WebResponse::failure(404, "no such endpoint");
}

bool MockIdp::code_known(const std::string& code) const {
  std::lock_guard lock(mutex_);
  return codes_.count(code) > 0;
}

bool MockIdp::code_consumed(const std::string& code) const {
  std::lock_guard lock(mutex_);
  auto it = codes_.find(code);
  return it != codes_.end() && it->second.consumed;
}

std::vector<std::string> MockIdp::event_log() const {
  std::lock_guard lock(mutex_);
  return events_;
}

void MockIdp::clear_events() {
  std::lock_guard lock(mutex_);
  events_.clear();
}

}  // namespace oauthguard::harness
