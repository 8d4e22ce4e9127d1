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

#include <set>
#include <string>
#include <string_view>

namespace oauthguard {

/// Host plus its registrable domain (public suffix + one label).
struct DomainName {
  std::string host;
  std::string registrable;
};

/// Public-suffix rule set. Matching follows the usual algorithm:
/// the prevailing rule is the exception rule if one matches, otherwise
/// the matching rule with the most labels, otherwise the implicit "*".
/// Wildcard labels match exactly one host label.
class PublicSuffixList {
 public:
  static PublicSuffixList from_string(std::string_view data);
  static PublicSuffixList from_file(const std::string& path);

  /// The snapshot compiled into the binary (mirrors
  /// data/public_suffix_list.dat).
  static const PublicSuffixList& bundled();

  /// Longest matching public suffix of host; for unlisted TLDs this is
  /// the final label.
  std::string public_suffix(std::string_view host) const;

  /// Registrable domain. IP literals map to themselves, as does a host
  /// that is itself a public suffix. Throws std::invalid_argument on an
  /// empty host.
  DomainName registrable_domain(std::string_view host) const;

  std::size_t rule_count() const {
    return exact_.size() + wildcard_.size() + exception_.size();
  }

 private:
  std::set<std::string> exact_;
  std::set<std::string> wildcard_;   // "*.ck" stored as "ck"
  std::set<std::string> exception_;  // "!www.ck" stored as "www.ck"
};

/// Numeric IPv4 or bracketed/contains-colon IPv6 literal.
bool is_ip_literal(std::string_view host);

}  // namespace oauthguard
