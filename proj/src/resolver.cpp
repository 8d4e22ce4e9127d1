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

#include "oauthguard/resolver.hpp"

#include <algorithm>
#include <cctype>

namespace oauthguard {

namespace {

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  });
  return s;
}

std::optional<std::pair<std::string, int>> split_host_port(
    const std::string& text) {
  std::size_t colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= text.size()) {
    return std::nullopt;
  }
  int port = 0;
  for (std::size_t i = colon + 1; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
    port = port * 10 + (text[i] - '0');
    if (port > 65535) return std::nullopt;
  }
  return std::make_pair(to_lower(text.substr(0, colon)), port);
}

}  // namespace

void HostResolver::add(const std::string& host, int port,
                       const std::string& target_host, int target_port) {
  mappings_[{to_lower(host), port}] = {target_host, target_port};
}

bool HostResolver::add_rule(const std::string& rule) {
  std::size_t eq = rule.find('=');
  if (eq == std::string::npos) return false;
  auto from = split_host_port(rule.substr(0, eq));
  auto to = split_host_port(rule.substr(eq + 1));
  if (!from || !to) return false;
  add(from->first, from->second, to->first, to->second);
  return true;
}

std::optional<std::pair<std::string, int>> HostResolver::lookup(
    const std::string& host, int port) const {
  auto it = mappings_.find({to_lower(host), port});
  if (it == mappings_.end()) return std::nullopt;
  return it->second;
}

}  // namespace oauthguard
