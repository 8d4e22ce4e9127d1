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

#include "oauthguard/harness/user_agent.hpp"

#include <httplib.h>

namespace oauthguard::harness {

namespace {

const char* kUserAgentString = "Mozilla/5.0 (compatible; SimulatedUA/1.0)";

bool suppress_referer(const std::string& referer, const UrlParts& target) {
  // downgrade rule: an https page never reveals itself to an http target
  auto ref = try_parse_url(referer);
  if (!ref) return false;
  return ref->scheme == Scheme::kHttps && target.scheme == Scheme::kHttp;
}

}  // namespace

UserAgent::UserAgent(UaOptions options) : options_(std::move(options)) {}

UserAgent::NavResult UserAgent::fetch(const std::string& method,
                                      const UrlParts& url,
                                      const std::optional<std::string>& referer,
                                      const std::optional<Form>& form) {
  NavResult result;

  std::string dial_host = url.host;
  int dial_port = url.port;
  if (!options_.proxy) {
    if (auto mapped = options_.resolver.lookup(url.host, url.port)) {
      dial_host = mapped->first;
      dial_port = mapped->second;
    }
  }

  httplib::Client client(to_string(url.scheme) + "://" + dial_host + ':' +
                         std::to_string(dial_port));
  if (options_.proxy) {
    client.set_proxy(options_.proxy->first, options_.proxy->second);
  }
  if (url.scheme == Scheme::kHttps) {
    if (options_.proxy && !options_.proxy_ca_bundle.empty()) {
      client.set_ca_cert_path(options_.proxy_ca_bundle);
      client.enable_server_certificate_verification(true);
    } else {
      client.enable_server_certificate_verification(false);
    }
  }
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(10, 0);
  client.set_keep_alive(false);

  // wire-faithful record: the fragment stays in the client
  HttpTransaction tx;
  tx.method = method;
  tx.url = url;
  tx.url.fragment.reset();
  tx.observed_at = std::chrono::steady_clock::now();
  tx.headers.emplace("Host", url.authority());
  tx.headers.emplace("User-Agent", kUserAgentString);
  tx.headers.emplace("Accept", "*/*");
  bool send_referer =
      referer && !referer->empty() && !suppress_referer(*referer, url);
  if (send_referer) tx.headers.emplace("Referer", *referer);
  if (form) {
    tx.headers.emplace("Content-Type", form->content_type);
    tx.body = HttpBody{form->body, form->content_type};
  }

  httplib::Request req;
  req.method = method;
  req.path = tx.url.path;
  if (!tx.url.query.empty()) {
    req.path += '?';
    req.path += serialize_query(tx.url.query);
  }
  for (const auto& [name, value] : tx.headers) {
    if (name == "Content-Type") continue;  // carried via req body fields
    req.headers.emplace(name, value);
  }
  if (form) {
    req.body = form->body;
    req.headers.emplace("Content-Type", form->content_type);
  }

  httplib::Response res;
  httplib::Error err = httplib::Error::Success;
  bool ok = client.send(req, res, err);

  if (options_.record) {
    recorded_.emplace_back(tx, ok ? res.status : 0);
  }
  if (!ok) {
    result.error = httplib::to_string(err);
    return result;
  }
  result.ok = true;
  result.status = res.status;
  result.body = res.body;
  result.final_url = url;
  result.blocked =
      res.status == 403 && res.has_header("X-OAuthGuard-Blocked");
  if (res.has_header("Location")) {
    result.location = res.get_header_value("Location");
  }
  return result;
}

UserAgent::NavResult UserAgent::request(
    const std::string& method, const UrlParts& url,
    const std::optional<std::string>& referer,
    const std::optional<Form>& form) {
  return fetch(method, url, referer, form);
}

UserAgent::NavResult UserAgent::navigate(
    const std::string& method, const UrlParts& url,
    const std::optional<std::string>& referer, const std::optional<Form>& form,
    StopPredicate stop, int max_hops) {
  std::string current_method = method;
  UrlParts current = url;
  std::optional<Form> current_form = form;
  ParamMap fragments;

  for (int hop = 0; hop < max_hops; ++hop) {
    if (current.fragment) {
      for (const auto& [k, v] : parse_query_string(*current.fragment)) {
        fragments.emplace(k, v);
      }
      current.fragment.reset();
    }

    NavResult r = fetch(current_method, current, referer, current_form);
    r.fragment_params = fragments;
    if (!r.ok) return r;

    bool redirect = (r.status == 301 || r.status == 302 || r.status == 303 ||
                     r.status == 307 || r.status == 308) &&
                    !r.location.empty();
    if (!redirect) {
      r.final_url = current;
      return r;
    }
    std::string location = r.location;
    UrlParts next;
    if (auto parsed = try_parse_url(location)) {
      next = *parsed;
    } else if (!location.empty() && location.front() == '/') {
      // relative redirect within the same site
      UrlParts base = current;
      std::string absolute = base.origin() + location;
      auto reparsed = try_parse_url(absolute);
      if (!reparsed) {
        r.error = "unparseable redirect location: " + location;
        return r;
      }
      next = *reparsed;
    } else {
      r.error = "unparseable redirect location: " + location;
      return r;
    }

    if (stop && stop(next)) {
      r.stopped = true;
      r.pending_url = next;
      r.fragment_params = fragments;
      return r;
    }
    if (r.status != 307 && r.status != 308) {
      current_method = "GET";
      current_form.reset();
    }
    current = next;
    // the original referer rides along across redirects
  }

  NavResult r;
  r.error = "redirect loop";
  return r;
}

std::vector<HttpTransaction> UserAgent::transactions() const {
  std::vector<HttpTransaction> out;
  out.reserve(recorded_.size());
  for (const auto& [tx, status] : recorded_) out.push_back(tx);
  return out;
}

HarWriter UserAgent::har() const {
  HarWriter writer;
  for (const auto& [tx, status] : recorded_) writer.add(tx, status);
  return writer;
}

}  // namespace oauthguard::harness
