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

#include "oauthguard/har.hpp"

#include <fstream>
#include <sstream>

namespace oauthguard {

namespace {

bool parse_entry(const nlohmann::json& entry, HttpTransaction* tx,
                 int* status) {
  if (!entry.is_object() || !entry.contains("request")) return false;
  const auto& request = entry.at("request");
  if (!request.is_object() || !request.contains("method") ||
      !request.contains("url")) {
    return false;
  }
  if (!request.at("method").is_string() || !request.at("url").is_string()) {
    return false;
  }
  auto url = try_parse_url(request.at("url").get<std::string>());
  if (!url) return false;

  tx->method = request.at("method").get<std::string>();
  tx->url = std::move(*url);
  if (request.contains("headers") && request.at("headers").is_array()) {
    for (const auto& header : request.at("headers")) {
      if (!header.is_object() || !header.contains("name") ||
          !header.contains("value") || !header.at("name").is_string() ||
          !header.at("value").is_string()) {
        continue;
      }
      tx->headers.emplace(header.at("name").get<std::string>(),
                          header.at("value").get<std::string>());
    }
  }
  if (request.contains("postData") && request.at("postData").is_object()) {
    const auto& post = request.at("postData");
    HttpBody body;
    if (post.contains("text") && post.at("text").is_string()) {
      body.bytes = post.at("text").get<std::string>();
    }
    if (post.contains("mimeType") && post.at("mimeType").is_string()) {
      body.content_type = post.at("mimeType").get<std::string>();
    }
    tx->body = std::move(body);
  }
  *status = 0;
  if (entry.contains("response") && entry.at("response").is_object()) {
    const auto& response = entry.at("response");
    if (response.contains("status") &&
        response.at("status").is_number_integer()) {
      *status = response.at("status").get<int>();
    }
  }
  return true;
}

}  // namespace

HarLoadResult load_har_from_string(const std::string& text) {
  nlohmann::json doc =
      nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("log") ||
      !doc.at("log").is_object() || !doc.at("log").contains("entries") ||
      !doc.at("log").at("entries").is_array()) {
    throw HarError("not a HAR document (missing log.entries)");
  }

  HarLoadResult result;
  for (const auto& entry : doc.at("log").at("entries")) {
    HttpTransaction tx;
    int status = 0;
    if (!parse_entry(entry, &tx, &status)) {
      ++result.skipped_entries;
      continue;
    }
    result.transactions.push_back(std::move(tx));
    result.response_status.push_back(status);
  }
  return result;
}

HarLoadResult load_har(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HarError("cannot open HAR file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_har_from_string(buffer.str());
}

void HarWriter::add(const HttpTransaction& tx, int response_status) {
  entries_.push_back({tx, response_status});
}

nlohmann::json HarWriter::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  int counter = 0;
  for (const auto& entry : entries_) {
    nlohmann::json headers = nlohmann::json::array();
    for (const auto& [name, value] : entry.tx.headers) {
      headers.push_back({{"name", name}, {"value", value}});
    }
    nlohmann::json query = nlohmann::json::array();
    for (const auto& [name, value] : entry.tx.url.query) {
      query.push_back({{"name", name}, {"value", value}});
    }
    nlohmann::json request = {
        {"method", entry.tx.method},
        {"url", entry.tx.url.serialize()},
        {"httpVersion", "HTTP/1.1"},
        {"headers", headers},
        {"queryString", query},
        {"headersSize", -1},
        {"bodySize", -1},
    };
    if (entry.tx.body) {
      request["postData"] = {{"mimeType", entry.tx.body->content_type},
                             {"text", entry.tx.body->bytes}};
    }
    // synthetic, strictly increasing timestamps keep output deterministic
    char when[64];
    std::snprintf(when, sizeof(when), "2026-01-01T00:00:%02d.%03dZ",
                  counter / 1000 % 60, counter % 1000);
    ++counter;
    entries.push_back({
        {"startedDateTime", when},
        {"time", 1},
        {"request", request},
        {"response",
         {{"status", entry.status},
          {"statusText", ""},
          {"httpVersion", "HTTP/1.1"},
          {"headers", nlohmann::json::array()},
          {"content", {{"size", 0}, {"mimeType", ""}}},
          {"redirectURL", ""},
          {"headersSize", -1},
          {"bodySize", -1}}},
        {"cache", nlohmann::json::object()},
        {"timings", {{"send", 0}, {"wait", 1}, {"receive", 0}}},
    });
  }
  return {{"log",
           {{"version", "1.2"},
            {"creator", {{"name", "oauthguard"}, {"version", "1.0"}}},
            {"entries", entries}}}};
}

void HarWriter::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw HarError("cannot write HAR file: " + path);
  out << to_string();
}

}  // namespace oauthguard
