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

#include <map>
#include <optional>
#include <string>
#include <utility>

namespace oauthguard {

/// Static host:port mapping consulted before system DNS, in the style of
/// curl --resolve. Built before the proxy starts; read-only afterwards.
class HostResolver {
 public:
  void add(const std::string& host, int port, const std::string& target_host,
           int target_port);

  /// "host:port=addr:port"; returns false on a malformed rule.
  bool add_rule(const std::string& rule);

  std::optional<std::pair<std::string, int>> lookup(const std::string& host,
                                                    int port) const;

  bool empty() const { return mappings_.empty(); }
  std::size_t size() const { return mappings_.size(); }

 private:
  std::map<std::pair<std::string, int>, std::pair<std::string, int>>
      mappings_;
};

}  // namespace oauthguard
