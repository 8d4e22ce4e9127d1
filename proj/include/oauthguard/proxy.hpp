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

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "oauthguard/pipeline.hpp"
#include "oauthguard/resolver.hpp"
#include "oauthguard/tls.hpp"

// opaque OpenSSL context handle
typedef struct ssl_ctx_st SSL_CTX;

namespace oauthguard {

struct ProxyConfig {
  std::string listen_host = "127.0.0.1";
  int listen_port = 0;  // 0 picks an ephemeral port

  /// With interception on, CONNECT tunnels are terminated with per-host
  /// leaf certificates minted from the authority; without it they are
  /// piped opaquely and their contents stay unobservable.
  bool tls_interception = false;
  std::shared_ptr<CertAuthority> authority;

  HostResolver resolver;

  /// PEM bundle for verifying upstream TLS; unset skips verification
  /// (the usual posture for an interception proxy).
  std::optional<std::string> upstream_ca_path;
};

/// Forward proxy feeding every observed request through the pipeline and
/// enforcing the returned mitigation before anything reaches upstream.
class Proxy {
 public:
  Proxy(ProxyConfig cfg, std::shared_ptr<Pipeline> pipeline);
  ~Proxy();

  Proxy(const Proxy&) = delete;
  Proxy& operator=(const Proxy&) = delete;

  /// Binds and starts serving; throws std::runtime_error when the listen
  /// address is not bindable.
  void start();

  /// Stops accepting, shuts active connections down and drains them.
  void stop();

  int port() const { return port_; }
  bool running() const { return running_; }

  /// Tunnels piped without interception (contents unobservable).
  std::uint64_t opaque_tunnels() const { return opaque_tunnels_; }

 private:
  struct Stream;

  void accept_loop();
  void serve_connection(int fd);
  void serve_mitm_tunnel(int fd, const std::string& host, int port);
  void pipe_opaque_tunnel(int client_fd, const std::string& host, int port);
  bool handle_transaction(Stream& stream, const HttpTransaction& tx);
  bool forward_upstream(Stream& stream, const HttpTransaction& tx,
                        const std::string& warn_message);
  SSL_CTX* leaf_context(const std::string& host);
  int connect_upstream(const std::string& host, int port);

  void track(int fd);
  void untrack(int fd);

  ProxyConfig cfg_;
  std::shared_ptr<Pipeline> pipeline_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> opaque_tunnels_{0};
  std::thread accept_thread_;

  std::mutex conn_mutex_;
  std::condition_variable conn_cv_;
  std::map<int, int> open_fds_;  // fd -> 1, for shutdown on stop
  int active_connections_ = 0;

  std::mutex ctx_mutex_;
  std::map<std::string, SSL_CTX*> leaf_contexts_;
};

}  // namespace oauthguard
