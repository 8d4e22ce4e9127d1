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

#include <chrono>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace oauthguard {

enum class Scheme { kHttp, kHttps };

/// "http" / "https".
std::string to_string(Scheme scheme);

/// Listing-style label with trailing colon: "http:" / "https:".
std::string scheme_label(Scheme scheme);

std::optional<Scheme> scheme_from_string(std::string_view text);

int default_port(Scheme scheme);

/// Decomposed URL. Query parameters are stored percent-decoded, in
/// appearance order; the fragment is kept verbatim.
struct UrlParts {
  Scheme scheme = Scheme::kHttp;
  std::string host;  // lowercase
  int port = 80;
  bool port_specified = false;
  std::string path = "/";
  std::vector<std::pair<std::string, std::string>> query;
  std::optional<std::string> fragment;

  bool is_default_port() const { return port == default_port(scheme); }

  /// scheme://host[:port]
  std::string origin() const;

  /// host[:port] with the port included only when nonstandard or explicit.
  std::string authority() const;

  /// Reserializes to an equivalent URL (query re-encoded canonically).
  std::string serialize() const;

  /// serialize() without the fragment, as the URL travels on the wire.
  std::string serialize_without_fragment() const;

  std::optional<std::string> query_value(std::string_view name) const;
};

struct UrlParseError : std::runtime_error {
  UrlParseError(const std::string& component, const std::string& detail)
      : std::runtime_error("malformed URL (" + component + "): " + detail),
        component(component) {}
  std::string component;
};

/// Splits an absolute http(s) URL. Throws UrlParseError naming the
/// offending component.
UrlParts parse_url(std::string_view raw);

/// parse_url that reports failure as nullopt (used for headers that may
/// hold arbitrary junk, e.g. Referer).
std::optional<UrlParts> try_parse_url(std::string_view raw);

/// Percent-decoding; '+' decodes to space when plus_as_space is set
/// (query-string convention).
std::string percent_decode(std::string_view text, bool plus_as_space);

/// Encodes a query name/value: unreserved characters pass through,
/// everything else becomes %XX.
std::string percent_encode_component(std::string_view text);

/// "a=1&b=two" -> [("a","1"),("b","two")], percent-decoded. Tolerant of
/// empty segments and missing '='.
std::vector<std::pair<std::string, std::string>> parse_query_string(
    std::string_view text);

std::string serialize_query(
    const std::vector<std::pair<std::string, std::string>>& query);

/// Case-insensitive ordering for header names.
struct CaseInsensitiveLess {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const;
};

/// Header multimap; repeated names keep insertion order.
using HeaderMap = std::multimap<std::string, std::string, CaseInsensitiveLess>;

struct HttpBody {
  std::string bytes;
  std::string content_type;
};

/// One observed HTTP request, the unit of analysis.
struct HttpTransaction {
  std::string method;
  UrlParts url;
  HeaderMap headers;
  std::optional<HttpBody> body;
  std::chrono::steady_clock::time_point observed_at{};

  Scheme scheme() const { return url.scheme; }

  /// First value for a header name (case-insensitive), if present.
  std::optional<std::string> header(std::string_view name) const;
};

using ParamMap = std::map<std::string, std::string>;

/// Merges parameters from URL query, fragment-as-query-string, form body
/// and top-level JSON string members, in that priority order. Never
/// throws; unparseable sections contribute nothing.
ParamMap extract_params(const HttpTransaction& tx);

}  // namespace oauthguard
