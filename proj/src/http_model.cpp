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

#include "oauthguard/http_model.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

namespace oauthguard {

namespace {

char ascii_lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
  return out;
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

bool is_unreserved(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ||
         c == '_' || c == '~';
}

}  // namespace

std::string to_string(Scheme scheme) {
  return scheme == Scheme::kHttps ? "https" : "http";
}

std::string scheme_label(Scheme scheme) {
  return scheme == Scheme::kHttps ? "https:" : "http:";
}

std::optional<Scheme> scheme_from_string(std::string_view text) {
  std::string s = to_lower(text);
  if (!s.empty() && s.back() == ':') s.pop_back();
  if (s == "http") return Scheme::kHttp;
  if (s == "https") return Scheme::kHttps;
  return std::nullopt;
}

int default_port(Scheme scheme) {
  return scheme == Scheme::kHttps ? 443 : 80;
}

std::string UrlParts::origin() const {
  return to_string(scheme) + "://" + authority();
}

std::string UrlParts::authority() const {
  std::string out = host;
  if (port_specified || !is_default_port()) {
    out += ':';
    out += std::to_string(port);
  }
  return out;
}

std::string UrlParts::serialize() const {
  std::string out = serialize_without_fragment();
  if (fragment) {
    out += '#';
    out += *fragment;
  }
  return out;
}

std::string UrlParts::serialize_without_fragment() const {
  std::string out = origin();
  out += path.empty() ? "/" : path;
  if (!query.empty()) {
    out += '?';
    out += serialize_query(query);
  }
  return out;
}

std::optional<std::string> UrlParts::query_value(std::string_view name) const {
  for (const auto& [k, v] : query) {
    if (k == name) return v;
  }
  return std::nullopt;
}

std::string percent_decode(std::string_view text, bool plus_as_space) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '%' && i + 2 < text.size()) {
      int hi = hex_digit(text[i + 1]);
      int lo = hex_digit(text[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>((hi << 4) | lo));
        i += 2;
        continue;
      }
    }
    if (c == '+' && plus_as_space) {
      out.push_back(' ');
      continue;
    }
    out.push_back(c);
  }
  return out;
}

std::string percent_encode_component(std::string_view text) {
  static const char* kHex = "0123456789ABCDEF";
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (is_unreserved(c)) {
      out.push_back(c);
    } else {
      auto byte = static_cast<unsigned char>(c);
      out.push_back('%');
      out.push_back(kHex[byte >> 4]);
      out.push_back(kHex[byte & 0xF]);
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_query_string(
    std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t amp = text.find('&', pos);
    std::string_view piece = text.substr(
        pos, amp == std::string_view::npos ? std::string_view::npos
                                           : amp - pos);
    if (!piece.empty()) {
      std::size_t eq = piece.find('=');
      if (eq == std::string_view::npos) {
        out.emplace_back(percent_decode(piece, true), "");
      } else {
        out.emplace_back(percent_decode(piece.substr(0, eq), true),
                         percent_decode(piece.substr(eq + 1), true));
      }
    }
    if (amp == std::string_view::npos) break;
    pos = amp + 1;
  }
  return out;
}

std::string serialize_query(
    const std::vector<std::pair<std::string, std::string>>& query) {
  std::string out;
  for (const auto& [k, v] : query) {
    if (!out.empty()) out += '&';
    out += percent_encode_component(k);
    out += '=';
    out += percent_encode_component(v);
  }
  return out;
}

UrlParts parse_url(std::string_view raw) {
  if (raw.empty()) throw UrlParseError("url", "empty string");

  UrlParts parts;
  std::size_t scheme_end = raw.find("://");
  if (scheme_end == std::string_view::npos) {
    throw UrlParseError("scheme", "missing '://' in '" + std::string(raw) + "'");
  }
  auto scheme = scheme_from_string(raw.substr(0, scheme_end));
  if (!scheme) {
    throw UrlParseError("scheme",
                        "unsupported scheme '" +
                            std::string(raw.substr(0, scheme_end)) + "'");
  }
  parts.scheme = *scheme;
  parts.port = default_port(parts.scheme);

  std::string_view rest = raw.substr(scheme_end + 3);
  std::size_t authority_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, authority_end);
  rest = authority_end == std::string_view::npos ? std::string_view{}
                                                 : rest.substr(authority_end);

  if (authority.empty()) throw UrlParseError("host", "empty authority");
  if (authority.find('@') != std::string_view::npos) {
    throw UrlParseError("authority", "userinfo not supported");
  }

  std::string_view host = authority;
  std::string_view port_text;
  if (!authority.empty() && authority.front() == '[') {
    // bracketed IPv6 literal
    std::size_t close = authority.find(']');
    if (close == std::string_view::npos) {
      throw UrlParseError("host", "unterminated IPv6 literal");
    }
    host = authority.substr(0, close + 1);
    if (close + 1 < authority.size()) {
      if (authority[close + 1] != ':') {
        throw UrlParseError("port", "junk after IPv6 literal");
      }
      port_text = authority.substr(close + 2);
    }
  } else {
    std::size_t colon = authority.rfind(':');
    if (colon != std::string_view::npos) {
      host = authority.substr(0, colon);
      port_text = authority.substr(colon + 1);
    }
  }
  if (host.empty()) throw UrlParseError("host", "empty host");
  parts.host = to_lower(host);

  if (!port_text.empty()) {
    int port = 0;
    for (char c : port_text) {
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        throw UrlParseError("port", "non-numeric port '" +
                                        std::string(port_text) + "'");
      }
      port = port * 10 + (c - '0');
      if (port > 65535) throw UrlParseError("port", "port out of range");
    }
    if (port == 0) throw UrlParseError("port", "port out of range");
    parts.port = port;
    parts.port_specified = true;
  }

  // path / query / fragment
  std::size_t frag_pos = rest.find('#');
  if (frag_pos != std::string_view::npos) {
    parts.fragment = std::string(rest.substr(frag_pos + 1));
    rest = rest.substr(0, frag_pos);
  }
  std::size_t query_pos = rest.find('?');
  if (query_pos != std::string_view::npos) {
    parts.query = parse_query_string(rest.substr(query_pos + 1));
    rest = rest.substr(0, query_pos);
  }
  parts.path = rest.empty() ? "/" : std::string(rest);
  return parts;
}

std::optional<UrlParts> try_parse_url(std::string_view raw) {
  try {
    return parse_url(raw);
  } catch (const UrlParseError&) {
    return std::nullopt;
  }
}

bool CaseInsensitiveLess::operator()(std::string_view a,
                                     std::string_view b) const {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(),
      [](char x, char y) { return ascii_lower(x) < ascii_lower(y); });
}

std::optional<std::string> HttpTransaction::header(
    std::string_view name) const {
  auto it = headers.find(std::string(name));
  if (it == headers.end()) return std::nullopt;
  return it->second;
}

namespace {

bool content_type_is(const HttpBody& body, std::string_view wanted) {
  std::string ct = to_lower(body.content_type);
  std::size_t semi = ct.find(';');
  if (semi != std::string::npos) ct.resize(semi);
  // trim
  while (!ct.empty() && ct.back() == ' ') ct.pop_back();
  std::size_t start = ct.find_first_not_of(' ');
  if (start != std::string::npos && start > 0) ct.erase(0, start);
  return ct == wanted;
}

}  // namespace

ParamMap extract_params(const HttpTransaction& tx) {
  ParamMap out;
  auto merge = [&out](const std::vector<std::pair<std::string, std::string>>&
                          pairs) {
    // first occurrence wins within a source; earlier sources win overall
    for (const auto& [k, v] : pairs) out.emplace(k, v);
  };

  merge(tx.url.query);
  if (tx.url.fragment) merge(parse_query_string(*tx.url.fragment));
  if (tx.body) {
    if (content_type_is(*tx.body, "application/x-www-form-urlencoded")) {
      merge(parse_query_string(tx.body->bytes));
    } else if (content_type_is(*tx.body, "application/json")) {
      auto doc = nlohmann::json::parse(tx.body->bytes, nullptr,
                                       /*allow_exceptions=*/false);
      if (doc.is_object()) {
        for (const auto& [k, v] : doc.items()) {
          if (v.is_string()) out.emplace(k, v.get<std::string>());
        }
      }
    }
  }
  return out;
}

}  // namespace oauthguard
