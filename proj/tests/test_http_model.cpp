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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oauthguard/http_model.hpp"

using namespace oauthguard;

namespace {

// Reference percent-decoder, deliberately written the slow, obvious way
// and kept independent of the implementation under test.
std::string reference_decode(const std::string& in, bool plus_as_space) {
  std::string out;
  std::size_t i = 0;
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return 10 + (c - 'a');
    if (c >= 'A' && c <= 'F') return 10 + (c - 'A');
    return -1;
  };
  while (i < in.size()) {
    if (in[i] == '%' && i + 2 < in.size() && hex(in[i + 1]) >= 0 &&
        hex(in[i + 2]) >= 0) {
      out.push_back(static_cast<char>(hex(in[i + 1]) * 16 + hex(in[i + 2])));
      i += 3;
    } else if (plus_as_space && in[i] == '+') {
      out.push_back(' ');
      i += 1;
    } else {
      out.push_back(in[i]);
      i += 1;
    }
  }
  return out;
}

std::string random_token(std::mt19937_64& rng, std::size_t max_len) {
  static const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
      "-._~ /:?#[]@!$&'()*+,;=%";
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string out;
  for (std::size_t i = 0, n = len(rng); i < n; ++i) {
    out.push_back(alphabet[pick(rng)]);
  }
  return out;
}

}  // namespace

TEST_CASE("parse_url splits an authorization endpoint") {
  UrlParts u = parse_url("https://accounts.google.com/o/oauth2/auth");
  CHECK(u.scheme == Scheme::kHttps);
  CHECK(u.host == "accounts.google.com");
  CHECK(u.port == 443);
  CHECK_FALSE(u.port_specified);
  CHECK(u.path == "/o/oauth2/auth");
  CHECK(u.query.empty());
  CHECK_FALSE(u.fragment.has_value());
}

TEST_CASE("parse_url applies scheme default ports") {
  UrlParts u = parse_url("http://rp.test/cb");
  CHECK(u.scheme == Scheme::kHttp);
  CHECK(u.host == "rp.test");
  CHECK(u.port == 80);
  CHECK(u.path == "/cb");
}

TEST_CASE("parse_url percent-decodes query values") {
  UrlParts u = parse_url("https://rp.test/cb?code=a%2Fb");
  REQUIRE(u.query.size() == 1);
  CHECK(u.query[0].first == "code");
  CHECK(u.query[0].second == "a/b");
}

TEST_CASE("parse_url keeps the fragment verbatim") {
  UrlParts u = parse_url("https://rp.test/cb?x=1#access_token=T&k=%20v");
  REQUIRE(u.fragment.has_value());
  CHECK(*u.fragment == "access_token=T&k=%20v");
}

TEST_CASE("parse_url normalizes host case and handles explicit ports") {
  UrlParts u = parse_url("HTTP://RP.Test:8080/Cb");
  CHECK(u.scheme == Scheme::kHttp);
  CHECK(u.host == "rp.test");
  CHECK(u.port == 8080);
  CHECK(u.port_specified);
  CHECK(u.path == "/Cb");  // paths stay case-sensitive
}

TEST_CASE("parse_url rejects malformed input naming the component") {
  CHECK_THROWS_AS(parse_url(""), UrlParseError);
  CHECK_THROWS_WITH_AS(parse_url("ftp://host/x"),
                       doctest::Contains("scheme"), UrlParseError);
  CHECK_THROWS_WITH_AS(parse_url("https://"), doctest::Contains("host"),
                       UrlParseError);
  CHECK_THROWS_WITH_AS(parse_url("https://host:99999/"),
                       doctest::Contains("port"), UrlParseError);
  CHECK_THROWS_WITH_AS(parse_url("https://user@host/"),
                       doctest::Contains("authority"), UrlParseError);
  CHECK_FALSE(try_parse_url("not a url").has_value());
}

TEST_CASE("percent decoding agrees with the reference on random inputs") {
  std::mt19937_64 rng(20260401);
  static const std::string alphabet =
      "abcXYZ019%2F+%ZZ%%41 ~%20%7e&=#";
  std::uniform_int_distribution<std::size_t> len(0, 40);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int i = 0; i < 100; ++i) {
    std::string sample;
    for (std::size_t k = 0, n = len(rng); k < n; ++k) {
      sample.push_back(alphabet[pick(rng)]);
    }
    CHECK(percent_decode(sample, true) == reference_decode(sample, true));
    CHECK(percent_decode(sample, false) == reference_decode(sample, false));
  }
}

TEST_CASE("serialize round-trips UrlParts") {
  std::mt19937_64 rng(20260402);
  for (int i = 0; i < 200; ++i) {
    UrlParts original;
    original.scheme = (rng() & 1) ? Scheme::kHttps : Scheme::kHttp;
    original.host = "host" + std::to_string(rng() % 50) + ".example.test";
    if (rng() % 3 == 0) {
      original.port = 1024 + static_cast<int>(rng() % 40000);
      original.port_specified = true;
    } else {
      original.port = default_port(original.scheme);
    }
    original.path = "/p" + std::to_string(rng() % 100);
    std::uniform_int_distribution<int> params(0, 4);
    for (int p = params(rng); p > 0; --p) {
      original.query.emplace_back(random_token(rng, 8),
                                  random_token(rng, 16));
    }
    if (rng() % 4 == 0) original.fragment = "frag=" + std::to_string(rng() % 9);

    UrlParts reparsed = parse_url(original.serialize());
    CHECK(reparsed.scheme == original.scheme);
    CHECK(reparsed.host == original.host);
    CHECK(reparsed.port == original.port);
    CHECK(reparsed.path == original.path);
    CHECK(reparsed.query == original.query);
    CHECK(reparsed.fragment == original.fragment);
  }
}

TEST_CASE("header lookup is case-insensitive") {
  HttpTransaction tx;
  tx.headers.emplace("Referer", "https://a.test/");
  tx.headers.emplace("X-Custom", "1");
  CHECK(tx.header("referer") == "https://a.test/");
  CHECK(tx.header("REFERER") == "https://a.test/");
  CHECK(tx.header("x-custom") == "1");
  CHECK_FALSE(tx.header("cookie").has_value());
}

TEST_CASE("extract_params merges query parameters") {
  HttpTransaction tx;
  tx.method = "GET";
  tx.url = parse_url(
      "https://www.dropbox.com/google/authcallback"
      "?code=4%2FgKfVUfaN5n-9tmo3RYnYActwrYWIXAwnsXRA7fcUl6E"
      "&state=ABAm_Lg53XmdhkeMTOmFKH5RULv2egJHsRXl9KHhp6Tazub");
  ParamMap params = extract_params(tx);
  CHECK(params.at("code") == "4/gKfVUfaN5n-9tmo3RYnYActwrYWIXAwnsXRA7fcUl6E");
  CHECK(params.at("state") ==
        "ABAm_Lg53XmdhkeMTOmFKH5RULv2egJHsRXl9KHhp6Tazub");
}

TEST_CASE("extract_params of an empty request is empty") {
  HttpTransaction tx;
  tx.method = "GET";
  tx.url = parse_url("https://example.test/index.html");
  CHECK(extract_params(tx).empty());
}

TEST_CASE("extract_params reads fragments as query strings") {
  HttpTransaction tx;
  tx.method = "GET";
  tx.url = parse_url("https://rp.test/cb#access_token=T&token_type=bearer");
  ParamMap params = extract_params(tx);
  CHECK(params.at("access_token") == "T");
  CHECK(params.at("token_type") == "bearer");
}

TEST_CASE("fragment parsing matches the query-string routine") {
  std::mt19937_64 rng(20260403);
  for (int i = 0; i < 50; ++i) {
    std::string raw;
    std::uniform_int_distribution<int> pairs(1, 5);
    for (int p = pairs(rng); p > 0; --p) {
      if (!raw.empty()) raw += '&';
      raw += percent_encode_component(random_token(rng, 6)) + "=" +
             percent_encode_component(random_token(rng, 12));
    }
    HttpTransaction with_fragment;
    with_fragment.method = "GET";
    with_fragment.url = parse_url("https://rp.test/cb#" + raw);
    HttpTransaction with_query;
    with_query.method = "GET";
    with_query.url = parse_url("https://rp.test/cb?" + raw);
    CHECK(extract_params(with_fragment) == extract_params(with_query));
  }
}

TEST_CASE("extract_params priority: query over fragment over body") {
  HttpTransaction tx;
  tx.method = "POST";
  tx.url = parse_url("https://rp.test/cb?code=from-query#code=from-fragment");
  tx.body = HttpBody{"code=from-body&extra=b",
                     "application/x-www-form-urlencoded"};
  ParamMap params = extract_params(tx);
  CHECK(params.at("code") == "from-query");
  CHECK(params.at("extra") == "b");

  tx.url = parse_url("https://rp.test/cb#code=from-fragment");
  CHECK(extract_params(tx).at("code") == "from-fragment");

  tx.url = parse_url("https://rp.test/cb");
  CHECK(extract_params(tx).at("code") == "from-body");
}

TEST_CASE("extract_params reads top-level JSON string members") {
  HttpTransaction tx;
  tx.method = "POST";
  tx.url = parse_url("https://rp.test/session");
  tx.body = HttpBody{R"({"id_token":"abc","n":3,"nested":{"code":"x"}})",
                     "application/json; charset=utf-8"};
  ParamMap params = extract_params(tx);
  CHECK(params.at("id_token") == "abc");
  CHECK(params.count("n") == 0);       // non-string members skipped
  CHECK(params.count("code") == 0);    // nested members skipped
}

TEST_CASE("extract_params never throws on arbitrary bodies") {
  std::mt19937_64 rng(20260404);
  for (int i = 0; i < 100; ++i) {
    HttpTransaction tx;
    tx.method = "POST";
    tx.url = parse_url("https://rp.test/x");
    std::string junk;
    std::uniform_int_distribution<int> len(0, 64);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int k = len(rng); k > 0; --k) {
      junk.push_back(static_cast<char>(byte(rng)));
    }
    const char* types[] = {"application/json",
                           "application/x-www-form-urlencoded",
                           "application/octet-stream", ""};
    tx.body = HttpBody{junk, types[i % 4]};
    CHECK_NOTHROW(extract_params(tx));
  }
}
