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

#include "oauthguard/harness/web.hpp"

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include <httplib.h>

namespace oauthguard::harness {

namespace {

std::string strip_port(const std::string& host_header) {
  std::size_t colon = host_header.rfind(':');
  if (colon == std::string::npos) return host_header;
  return host_header.substr(0, colon);
}

}  // namespace

std::optional<std::string> WebRequest::header(std::string_view name) const {
  auto it = headers.find(std::string(name));
  if (it == headers.end()) return std::nullopt;
  return it->second;
}

ParamMap WebRequest::params() const {
  ParamMap out = query;
  if (content_type.rfind("application/x-www-form-urlencoded", 0) == 0) {
    for (const auto& [k, v] : parse_query_string(body)) out.emplace(k, v);
  }
  return out;
}

WebResponse WebResponse::page(std::string html) {
  WebResponse r;
  r.body = std::move(html);
  return r;
}

WebResponse WebResponse::redirect(const std::string& location) {
  WebResponse r;
  r.status = 302;
  r.extra_headers.emplace_back("Location", location);
  r.body = "<html><body>redirecting</body></html>";
  return r;
}

WebResponse WebResponse::json(std::string payload, int status) {
  WebResponse r;
  r.status = status;
  r.content_type = "application/json";
  r.body = std::move(payload);
  return r;
}

WebResponse WebResponse::failure(int status, const std::string& text) {
  WebResponse r;
  r.status = status;
  r.body = "<html><body><h1>error</h1><p>" + text + "</p></body></html>";
  return r;
}

struct HarnessWeb::Impl {
  std::unique_ptr<httplib::Server> plain;
  std::unique_ptr<httplib::SSLServer> tls;
  std::thread plain_thread;
  std::thread tls_thread;
  CertKeyPair leaf;
};

HarnessWeb::HarnessWeb()
    : impl_(std::make_unique<Impl>()),
      ca_(std::make_shared<CertAuthority>(
          CertAuthority::create("harness-root"))) {}

HarnessWeb::~HarnessWeb() { stop(); }

void HarnessWeb::add_host(const std::string& host, WebHandler handler,
                          bool serve_https, bool serve_http) {
  if (running_) throw std::logic_error("add_host after start");
  hosts_[host] = HostEntry{std::move(handler), serve_https, serve_http};
}

void HarnessWeb::dispatch(Scheme scheme, const std::string& host_header,
                          const WebRequest& request, WebResponse* response) {
  std::string host = strip_port(host_header);
  {
    std::lock_guard lock(log_mutex_);
    log_.push_back({host, request.method, request.path, scheme});
  }
  auto it = hosts_.find(host);
  if (it == hosts_.end()) {
    *response = WebResponse::failure(404, "unknown host " + host);
    return;
  }
  if ((scheme == Scheme::kHttps && !it->second.https) ||
      (scheme == Scheme::kHttp && !it->second.http)) {
    *response = WebResponse::failure(421, "host not served on this scheme");
    return;
  }
  *response = it->second.handler(request);
}

void HarnessWeb::start() {
  if (running_) return;

  std::vector<std::string> tls_hosts;
  for (const auto& [host, entry] : hosts_) {
    if (entry.https) tls_hosts.push_back(host);
  }

  impl_->plain = std::make_unique<httplib::Server>();
  if (!tls_hosts.empty()) {
    impl_->leaf = ca_->mint_leaf(tls_hosts);
    impl_->tls = std::make_unique<httplib::SSLServer>(impl_->leaf.cert(),
                                                      impl_->leaf.key());
    if (!impl_->tls->is_valid()) {
      throw std::runtime_error("harness TLS server failed to initialize");
    }
  }

  auto install = [this](httplib::Server& server, Scheme scheme) {
    auto handle = [this, scheme](const httplib::Request& req,
                                 httplib::Response& res) {
      WebRequest request;
      request.method = req.method;
      request.scheme = scheme;
      request.host = strip_port(req.get_header_value("Host"));
      request.path = req.path;
      for (const auto& [k, v] : req.params) request.query.emplace(k, v);
      for (const auto& [k, v] : req.headers) request.headers.emplace(k, v);
      request.body = req.body;
      request.content_type = req.get_header_value("Content-Type");

      WebResponse response;
      dispatch(scheme, req.get_header_value("Host"), request, &response);
      res.status = response.status;
      for (const auto& [k, v] : response.extra_headers) res.set_header(k, v);
      res.set_content(response.body, response.content_type);
    };
    server.Get(".*", handle);
    server.Post(".*", handle);
    server.set_keep_alive_max_count(1);
  };

  install(*impl_->plain, Scheme::kHttp);
  http_port_ = impl_->plain->bind_to_any_port("127.0.0.1");
  if (http_port_ <= 0) throw std::runtime_error("cannot bind harness http");
  impl_->plain_thread =
      std::thread([this] { impl_->plain->listen_after_bind(); });

  if (impl_->tls) {
    install(*impl_->tls, Scheme::kHttps);
    https_port_ = impl_->tls->bind_to_any_port("127.0.0.1");
    if (https_port_ <= 0) throw std::runtime_error("cannot bind harness tls");
    impl_->tls_thread =
        std::thread([this] { impl_->tls->listen_after_bind(); });
  }

  impl_->plain->wait_until_ready();
  if (impl_->tls) impl_->tls->wait_until_ready();
  running_ = true;
}

void HarnessWeb::stop() {
  if (!running_) return;
  running_ = false;
  impl_->plain->stop();
  if (impl_->tls) impl_->tls->stop();
  if (impl_->plain_thread.joinable()) impl_->plain_thread.join();
  if (impl_->tls_thread.joinable()) impl_->tls_thread.join();
  if (!ca_path_.empty()) std::remove(ca_path_.c_str());
}

std::string HarnessWeb::ca_bundle_path() const {
  if (!ca_path_.empty()) return ca_path_;
  char name[] = "/tmp/harness-ca-XXXXXX";
  int fd = ::mkstemp(name);
  if (fd < 0) throw std::runtime_error("cannot create CA bundle temp file");
  ::close(fd);
  std::ofstream out(name, std::ios::binary);
  out << ca_->cert_pem();
  ca_path_ = name;
  return ca_path_;
}

HostResolver HarnessWeb::resolver() const {
  HostResolver resolver;
  for (const auto& [host, entry] : hosts_) {
    if (entry.http) resolver.add(host, 80, "127.0.0.1", http_port_);
    if (entry.https) resolver.add(host, 443, "127.0.0.1", https_port_);
  }
  return resolver;
}

std::vector<HarnessWeb::LogEntry> HarnessWeb::log() const {
  std::lock_guard lock(log_mutex_);
  return log_;
}

std::size_t HarnessWeb::request_count(const std::string& host) const {
  std::lock_guard lock(log_mutex_);
  std::size_t count = 0;
  for (const auto& entry : log_) {
    if (entry.host == host) ++count;
  }
  return count;
}

void HarnessWeb::clear_log() {
  std::lock_guard lock(log_mutex_);
  log_.clear();
}

}  // namespace oauthguard::harness
