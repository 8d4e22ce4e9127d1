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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "oauthguard/http_model.hpp"
#include "oauthguard/resolver.hpp"
#include "oauthguard/tls.hpp"

namespace oauthguard::harness {

/// Request as seen by a simulated site handler.
struct WebRequest {
  std::string method;
  std::string host;  // Host header, port stripped
  Scheme scheme = Scheme::kHttps;
  std::string path;
  ParamMap query;  // percent-decoded
  HeaderMap headers;
  std::string body;
  std::string content_type;

  std::optional<std::string> header(std::string_view name) const;
  /// query plus form-encoded body members (query wins on duplicates)
  ParamMap params() const;
};

struct WebResponse {
  int status = 200;
  std::string content_type = "text/html";
  std::string body;
  std::vector<std::pair<std::string, std::string>> extra_headers;

  static WebResponse page(std::string html);
  static WebResponse redirect(const std::string& location);
  static WebResponse json(std::string payload, int status = 200);
  static WebResponse failure(int status, const std::string& text);
};

using WebHandler = std::function<WebResponse(const WebRequest&)>;

/// One plain and one TLS listener on loopback, dispatching on the Host
/// header to registered per-host handlers. All registered hosts share a
/// single SAN certificate minted from the harness CA at start(). Sites
/// live on default ports from the simulated browser's point of view; the
/// resolver maps (host, 80/443) onto the loopback listeners.
class HarnessWeb {
 public:
  HarnessWeb();
  ~HarnessWeb();

  HarnessWeb(const HarnessWeb&) = delete;
  HarnessWeb& operator=(const HarnessWeb&) = delete;

  void add_host(const std::string& host, WebHandler handler, bool serve_https,
                bool serve_http);

  void start();
  void stop();
  bool running() const { return running_; }

  int http_port() const { return http_port_; }
  int https_port() const { return https_port_; }

  const CertAuthority& ca() const { return *ca_; }
  /// Path of a PEM file holding the harness CA (written lazily to a temp
  /// file, for TLS clients that verify).
  std::string ca_bundle_path() const;

  /// Browser-view mapping: (host, 80) and (host, 443) onto the listeners,
  /// according to which listeners the host registered.
  HostResolver resolver() const;

  struct LogEntry {
    std::string host;
    std::string method;
    std::string path;
    Scheme scheme;
  };
  std::vector<LogEntry> log() const;
  std::size_t request_count(const std::string& host) const;
  void clear_log();

 private:
  struct HostEntry {
    WebHandler handler;
    bool https = false;
    bool http = false;
  };
  struct Impl;  // holds the httplib servers

  void dispatch(Scheme scheme, const std::string& host_header,
                const WebRequest& request, WebResponse* response);

  std::unique_ptr<Impl> impl_;
  std::shared_ptr<CertAuthority> ca_;
  std::map<std::string, HostEntry> hosts_;
  int http_port_ = 0;
  int https_port_ = 0;
  bool running_ = false;

  mutable std::mutex log_mutex_;
  std::vector<LogEntry> log_;
  mutable std::string ca_path_;
};

}  // namespace oauthguard::harness
