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

#include "oauthguard/proxy.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/err.h>
#include <openssl/ssl.h>

#include <cctype>
#include <cstdlib>
#include <cstring>

#include <httplib.h>

namespace oauthguard {

namespace {

constexpr std::size_t kMaxHeaderBytes = 64 * 1024;
constexpr std::size_t kMaxBodyBytes = 16 * 1024 * 1024;
constexpr int kIoTimeoutSeconds = 15;

struct RawRequest {
  std::string method;
  std::string target;
  std::string version;
  HeaderMap headers;
  std::string body;
};

const char* reason_phrase(int status) {
  switch (status) {
    case 200: return "OK";
    case 302: return "Found";
    case 307: return "Temporary Redirect";
    case 400: return "Bad Request";
    case 403: return "Forbidden";
    case 502: return "Bad Gateway";
    default: return "OK";
  }
}

std::string html_page(const std::string& title, const std::string& text) {
  return "<!DOCTYPE html><html><head><title>" + title +
         "</title></head><body><h1>" + title + "</h1><p>" + text +
         "</p></body></html>\n";
}

bool is_hop_by_hop(const std::string& name) {
  static const char* kNames[] = {
      "connection",        "proxy-connection", "keep-alive",
      "transfer-encoding", "te",               "trailer",
      "upgrade",           "proxy-authorization", "proxy-authenticate",
  };
  std::string lower;
  lower.reserve(name.size());
  for (char c : name) {
    lower.push_back(
        static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (const char* candidate : kNames) {
    if (lower == candidate) return true;
  }
  return false;
}

std::optional<std::pair<std::string, int>> parse_authority(
    const std::string& text, int default_port) {
  std::size_t colon = text.rfind(':');
  if (colon == std::string::npos) {
    return std::make_pair(text, default_port);
  }
  int port = 0;
  for (std::size_t i = colon + 1; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      return std::nullopt;
    }
    port = port * 10 + (text[i] - '0');
    if (port > 65535) return std::nullopt;
  }
  if (port == 0) return std::nullopt;
  return std::make_pair(text.substr(0, colon), port);
}

}  // namespace

// Byte stream over a raw fd or an established SSL session.
struct Proxy::Stream {
  int fd = -1;
  SSL* ssl = nullptr;
  std::string buffer;  // bytes read past the last request head

  ssize_t read_some(char* out, std::size_t len) {
    if (ssl) return SSL_read(ssl, out, static_cast<int>(len));
    return ::recv(fd, out, len, 0);
  }

  bool write_all(std::string_view data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
      ssize_t n;
      if (ssl) {
        n = SSL_write(ssl, data.data() + sent,
                      static_cast<int>(data.size() - sent));
      } else {
        n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      }
      if (n <= 0) return false;
      sent += static_cast<std::size_t>(n);
    }
    return true;
  }

  // Reads one request head plus its Content-Length body.
  bool read_request(RawRequest* request) {
    std::size_t head_end;
    while ((head_end = buffer.find("\r\n\r\n")) == std::string::npos) {
      if (buffer.size() > kMaxHeaderBytes) return false;
      char chunk[8192];
      ssize_t n = read_some(chunk, sizeof(chunk));
      if (n <= 0) return false;
      buffer.append(chunk, static_cast<std::size_t>(n));
    }
    std::string head = buffer.substr(0, head_end);
    buffer.erase(0, head_end + 4);

    std::size_t line_end = head.find("\r\n");
    std::string request_line =
        line_end == std::string::npos ? head : head.substr(0, line_end);
    std::size_t sp1 = request_line.find(' ');
    std::size_t sp2 =
        sp1 == std::string::npos ? std::string::npos
                                 : request_line.find(' ', sp1 + 1);
    if (sp1 == std::string::npos || sp2 == std::string::npos) return false;
    request->method = request_line.substr(0, sp1);
    request->target = request_line.substr(sp1 + 1, sp2 - sp1 - 1);
    request->version = request_line.substr(sp2 + 1);

    std::size_t pos = line_end == std::string::npos ? head.size()
                                                    : line_end + 2;
    while (pos < head.size()) {
      std::size_t eol = head.find("\r\n", pos);
      if (eol == std::string::npos) eol = head.size();
      std::string line = head.substr(pos, eol - pos);
      pos = eol + 2;
      std::size_t colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string name = line.substr(0, colon);
      std::size_t value_start = line.find_first_not_of(" \t", colon + 1);
      std::string value =
          value_start == std::string::npos ? "" : line.substr(value_start);
      request->headers.emplace(std::move(name), std::move(value));
    }

    std::size_t content_length = 0;
    if (auto it = request->headers.find("Content-Length");
        it != request->headers.end()) {
      content_length = static_cast<std::size_t>(
          std::strtoull(it->second.c_str(), nullptr, 10));
      if (content_length > kMaxBodyBytes) return false;
    }
    while (buffer.size() < content_length) {
      char chunk[8192];
      ssize_t n = read_some(chunk, sizeof(chunk));
      if (n <= 0) return false;
      buffer.append(chunk, static_cast<std::size_t>(n));
    }
    request->body = buffer.substr(0, content_length);
    buffer.erase(0, content_length);
    return true;
  }

  bool write_response(int status, const std::vector<std::pair<std::string,
                          std::string>>& headers,
                      std::string_view body) {
    std::string head = "HTTP/1.1 " + std::to_string(status) + ' ' +
                       reason_phrase(status) + "\r\n";
    for (const auto& [name, value] : headers) {
      head += name + ": " + value + "\r\n";
    }
    head += "Content-Length: " + std::to_string(body.size()) + "\r\n";
    head += "Connection: close\r\n\r\n";
    return write_all(head) && write_all(body);
  }

  bool write_error(int status, const std::string& title,
                   const std::string& text) {
    return write_response(status, {{"Content-Type", "text/html"}},
                          html_page(title, text));
  }
};

Proxy::Proxy(ProxyConfig cfg, std::shared_ptr<Pipeline> pipeline)
    : cfg_(std::move(cfg)), pipeline_(std::move(pipeline)) {}

Proxy::~Proxy() {
  stop();
  std::lock_guard lock(ctx_mutex_);
  for (auto& [host, ctx] : leaf_contexts_) SSL_CTX_free(ctx);
  leaf_contexts_.clear();
}

void Proxy::start() {
  if (running_) return;
  if (cfg_.tls_interception && !cfg_.authority) {
    throw std::runtime_error("TLS interception requires a CA");
  }

  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error("cannot create proxy socket");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<uint16_t>(cfg_.listen_port));
  if (::inet_pton(AF_INET, cfg_.listen_host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::runtime_error("invalid proxy listen address: " +
                             cfg_.listen_host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) <
          0 ||
      ::listen(listen_fd_, 64) < 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::runtime_error("cannot bind proxy to " + cfg_.listen_host + ":" +
                             std::to_string(cfg_.listen_port));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);

  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void Proxy::stop() {
  if (!running_) return;
  running_ = false;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  listen_fd_ = -1;
  if (accept_thread_.joinable()) accept_thread_.join();

  std::unique_lock lock(conn_mutex_);
  for (const auto& [fd, unused] : open_fds_) ::shutdown(fd, SHUT_RDWR);
  conn_cv_.wait_for(lock, std::chrono::seconds(10),
                    [this] { return active_connections_ == 0; });
}

void Proxy::track(int fd) {
  std::lock_guard lock(conn_mutex_);
  open_fds_.emplace(fd, 1);
  ++active_connections_;
}

void Proxy::untrack(int fd) {
  std::lock_guard lock(conn_mutex_);
  open_fds_.erase(fd);
  --active_connections_;
  conn_cv_.notify_all();
}

void Proxy::accept_loop() {
  while (running_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (!running_) break;
      continue;
    }
    timeval tv{kIoTimeoutSeconds, 0};
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
    track(fd);
    std::thread([this, fd] {
      serve_connection(fd);
      ::close(fd);
      untrack(fd);
    }).detach();
  }
}

int Proxy::connect_upstream(const std::string& host, int port) {
  std::string target_host = host;
  int target_port = port;
  if (auto mapped = cfg_.resolver.lookup(host, port)) {
    target_host = mapped->first;
    target_port = mapped->second;
  }

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  if (::getaddrinfo(target_host.c_str(), std::to_string(target_port).c_str(),
                    &hints, &result) != 0) {
    return -1;
  }
  int fd = -1;
  for (addrinfo* entry = result; entry; entry = entry->ai_next) {
    fd = ::socket(entry->ai_family, entry->ai_socktype, entry->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, entry->ai_addr, entry->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(result);
  return fd;
}

void Proxy::serve_connection(int fd) {
  Stream stream;
  stream.fd = fd;
  RawRequest request;
  if (!stream.read_request(&request)) return;

  if (request.method == "CONNECT") {
    auto authority = parse_authority(request.target, 443);
    if (!authority) {
      stream.write_error(400, "Bad Request", "malformed CONNECT target");
      return;
    }
    if (cfg_.tls_interception) {
      serve_mitm_tunnel(fd, authority->first, authority->second);
    } else {
      pipe_opaque_tunnel(fd, authority->first, authority->second);
    }
    return;
  }

  // Absolute-form target (plain forward proxying), or origin-form with a
  // Host header.
  HttpTransaction tx;
  tx.method = request.method;
  tx.observed_at = std::chrono::steady_clock::now();
  if (request.target.rfind("http://", 0) == 0 ||
      request.target.rfind("https://", 0) == 0) {
    auto url = try_parse_url(request.target);
    if (!url) {
      stream.write_error(400, "Bad Request", "unparseable request target");
      return;
    }
    tx.url = std::move(*url);
  } else {
    auto host_header = request.headers.find("Host");
    if (host_header == request.headers.end()) {
      stream.write_error(400, "Bad Request",
                         "origin-form request without Host header");
      return;
    }
    auto authority = parse_authority(host_header->second, 80);
    if (!authority) {
      stream.write_error(400, "Bad Request", "malformed Host header");
      return;
    }
    auto url = try_parse_url("http://" + host_header->second + request.target);
    if (!url) {
      stream.write_error(400, "Bad Request", "unparseable request target");
      return;
    }
    tx.url = std::move(*url);
  }
  tx.url.port_specified = !tx.url.is_default_port();
  tx.headers = std::move(request.headers);
  if (!request.body.empty() || tx.headers.count("Content-Length") > 0) {
    HttpBody body;
    body.bytes = std::move(request.body);
    if (auto it = tx.headers.find("Content-Type"); it != tx.headers.end()) {
      body.content_type = it->second;
    }
    tx.body = std::move(body);
  }
  handle_transaction(stream, tx);
}

SSL_CTX* Proxy::leaf_context(const std::string& host) {
  std::lock_guard lock(ctx_mutex_);
  auto it = leaf_contexts_.find(host);
  if (it != leaf_contexts_.end()) return it->second;

  CertKeyPair leaf = cfg_.authority->mint_leaf({host});
  SSL_CTX* ctx = SSL_CTX_new(TLS_server_method());
  if (!ctx) return nullptr;
  if (SSL_CTX_use_certificate(ctx, leaf.cert()) != 1 ||
      SSL_CTX_use_PrivateKey(ctx, leaf.key()) != 1) {
    SSL_CTX_free(ctx);
    return nullptr;
  }
  leaf_contexts_[host] = ctx;
  return ctx;
}

void Proxy::serve_mitm_tunnel(int fd, const std::string& host, int port) {
  SSL_CTX* ctx = nullptr;
  try {
    ctx = leaf_context(host);
  } catch (const TlsError&) {
    ctx = nullptr;
  }
  if (!ctx) {
    // cannot mint a certificate for this host: fall back to a blind pipe
    pipe_opaque_tunnel(fd, host, port);
    return;
  }

  Stream plain;
  plain.fd = fd;
  if (!plain.write_all("HTTP/1.1 200 Connection Established\r\n\r\n")) return;

  SSL* ssl = SSL_new(ctx);
  SSL_set_fd(ssl, fd);
  if (SSL_accept(ssl) != 1) {
    // client refused our certificate; the tunnel stays unobservable
    ++opaque_tunnels_;
    SSL_free(ssl);
    return;
  }

  Stream stream;
  stream.fd = fd;
  stream.ssl = ssl;
  RawRequest request;
  while (stream.read_request(&request)) {
    HttpTransaction tx;
    tx.method = request.method;
    tx.observed_at = std::chrono::steady_clock::now();

    std::string authority_text = host + ':' + std::to_string(port);
    if (auto it = request.headers.find("Host"); it != request.headers.end()) {
      authority_text = it->second;
      if (authority_text.find(':') == std::string::npos) {
        authority_text += ':' + std::to_string(port);
      }
    }
    auto url = try_parse_url("https://" + authority_text + request.target);
    if (!url) {
      stream.write_error(400, "Bad Request", "unparseable request target");
      break;
    }
    tx.url = std::move(*url);
    tx.url.port_specified = !tx.url.is_default_port();
    tx.headers = std::move(request.headers);
    if (!request.body.empty() ||
        tx.headers.count("Content-Length") > 0) {
      HttpBody body;
      body.bytes = std::move(request.body);
      if (auto it = tx.headers.find("Content-Type"); it != tx.headers.end()) {
        body.content_type = it->second;
      }
      tx.body = std::move(body);
    }
    if (!handle_transaction(stream, tx)) break;
    break;  // responses carry Connection: close
  }
  SSL_shutdown(ssl);
  SSL_free(ssl);
}

void Proxy::pipe_opaque_tunnel(int client_fd, const std::string& host,
                               int port) {
  int upstream_fd = connect_upstream(host, port);
  Stream client;
  client.fd = client_fd;
  if (upstream_fd < 0) {
    client.write_error(502, "Bad Gateway",
                       "cannot reach upstream host " + host);
    return;
  }
  if (!client.write_all("HTTP/1.1 200 Connection Established\r\n\r\n")) {
    ::close(upstream_fd);
    return;
  }
  ++opaque_tunnels_;

  pollfd fds[2];
  fds[0] = {client_fd, POLLIN, 0};
  fds[1] = {upstream_fd, POLLIN, 0};
  char chunk[16 * 1024];
  while (running_) {
    fds[0].revents = fds[1].revents = 0;
    int ready = ::poll(fds, 2, 1000);
    if (ready < 0) break;
    if (ready == 0) continue;
    bool closed = false;
    for (int i = 0; i < 2; ++i) {
      if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      ssize_t n = ::recv(fds[i].fd, chunk, sizeof(chunk), 0);
      if (n <= 0) {
        closed = true;
        break;
      }
      int peer = (i == 0) ? upstream_fd : client_fd;
      std::size_t sent = 0;
      while (sent < static_cast<std::size_t>(n)) {
        ssize_t m = ::send(peer, chunk + sent, n - sent, MSG_NOSIGNAL);
        if (m <= 0) {
          closed = true;
          break;
        }
        sent += static_cast<std::size_t>(m);
      }
      if (closed) break;
    }
    if (closed) break;
  }
  ::close(upstream_fd);
}

bool Proxy::handle_transaction(Stream& stream, const HttpTransaction& tx) {
  MitigationAction action = pipeline_->process(tx);

  switch (action.verdict) {
    case Verdict::kBlock: {
      std::string klass =
          action.reason_class ? to_string(*action.reason_class) : "policy";
      stream.write_response(
          403,
          {{"Content-Type", "text/html"}, {"X-OAuthGuard-Blocked", klass}},
          html_page("Request blocked (" + klass + ")", action.message));
      return false;
    }
    case Verdict::kUpgradeToHttps:
      stream.write_response(
          307,
          {{"Content-Type", "text/html"}, {"Location", action.rewritten_url}},
          html_page("Redirecting to HTTPS", action.message));
      return false;
    case Verdict::kWarn:
      return forward_upstream(stream, tx, action.message);
    case Verdict::kAllow:
      return forward_upstream(stream, tx, "");
  }
  return false;
}

bool Proxy::forward_upstream(Stream& stream, const HttpTransaction& tx,
                             const std::string& warn_message) {
  std::string target_host = tx.url.host;
  int target_port = tx.url.port;
  if (auto mapped = cfg_.resolver.lookup(tx.url.host, tx.url.port)) {
    target_host = mapped->first;
    target_port = mapped->second;
  }

  httplib::Client client(to_string(tx.scheme()) + "://" + target_host + ':' +
                         std::to_string(target_port));
  if (tx.scheme() == Scheme::kHttps) {
    if (cfg_.upstream_ca_path) {
      client.set_ca_cert_path(*cfg_.upstream_ca_path);
      client.enable_server_certificate_verification(true);
    } else {
      client.enable_server_certificate_verification(false);
    }
  }
  client.set_connection_timeout(kIoTimeoutSeconds, 0);
  client.set_read_timeout(kIoTimeoutSeconds, 0);
  client.set_keep_alive(false);

  httplib::Request upstream;
  upstream.method = tx.method;
  upstream.path = tx.url.path;
  if (!tx.url.query.empty()) {
    upstream.path += '?';
    upstream.path += serialize_query(tx.url.query);
  }
  for (const auto& [name, value] : tx.headers) {
    if (is_hop_by_hop(name)) continue;
    upstream.headers.emplace(name, value);
  }
  if (tx.body) upstream.body = tx.body->bytes;

  httplib::Response response;
  httplib::Error error = httplib::Error::Success;
  if (!client.send(upstream, response, error)) {
    std::string text = "upstream request to " + tx.url.authority() +
                       " failed";
    if (tx.scheme() == Scheme::kHttps) {
      text += "; the site may not support HTTPS";
    }
    stream.write_error(502, "Bad Gateway", text);
    return false;
  }

  std::vector<std::pair<std::string, std::string>> headers;
  for (const auto& [name, value] : response.headers) {
    if (is_hop_by_hop(name)) continue;
    std::string lower;
    for (char c : name) {
      lower.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (lower == "content-length") continue;  // recomputed
    headers.emplace_back(name, value);
  }
  if (!warn_message.empty()) {
    headers.emplace_back("X-OAuthGuard-Warning", warn_message);
  }
  stream.write_response(response.status, headers, response.body);
  return false;  // Connection: close
}

}  // namespace oauthguard
