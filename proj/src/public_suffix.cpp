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

#include "oauthguard/public_suffix.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "bundled_data.inc"

namespace oauthguard {

namespace {

std::string normalize_host(std::string_view host) {
  std::string out(host);
  std::transform(out.begin(), out.end(), out.begin(), [](char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  });
  if (!out.empty() && out.back() == '.') out.pop_back();
  return out;
}

std::vector<std::string> split_labels(const std::string& host) {
  std::vector<std::string> labels;
  std::size_t pos = 0;
  while (pos <= host.size()) {
    std::size_t dot = host.find('.', pos);
    if (dot == std::string::npos) {
      labels.push_back(host.substr(pos));
      break;
    }
    labels.push_back(host.substr(pos, dot - pos));
    pos = dot + 1;
  }
  return labels;
}

std::string join_from(const std::vector<std::string>& labels,
                      std::size_t start) {
  std::string out;
  for (std::size_t i = start; i < labels.size(); ++i) {
    if (!out.empty()) out += '.';
    out += labels[i];
  }
  return out;
}

}  // namespace

bool is_ip_literal(std::string_view host) {
  if (host.empty()) return false;
  if (host.front() == '[' || host.find(':') != std::string_view::npos) {
    return true;  // IPv6
  }
  int dots = 0;
  int digits = 0;
  int value = 0;
  for (char c : host) {
    if (c == '.') {
      if (digits == 0) return false;
      ++dots;
      digits = 0;
      value = 0;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      ++digits;
      value = value * 10 + (c - '0');
      if (digits > 3 || value > 255) return false;
    } else {
      return false;
    }
  }
  return dots == 3 && digits > 0;
}

PublicSuffixList PublicSuffixList::from_string(std::string_view data) {
  PublicSuffixList list;
  std::istringstream in{std::string(data)};
  std::string line;
  while (std::getline(in, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    // trim whitespace
    auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    auto end = line.find_last_not_of(" \t\r");
    std::string rule = normalize_host(line.substr(begin, end - begin + 1));
    if (rule.empty()) continue;
    if (rule.front() == '!') {
      list.exception_.insert(rule.substr(1));
    } else if (rule.rfind("*.", 0) == 0) {
      list.wildcard_.insert(rule.substr(2));
    } else {
      list.exact_.insert(rule);
    }
  }
  return list;
}

PublicSuffixList PublicSuffixList::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open public suffix file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str());
}

const PublicSuffixList& PublicSuffixList::bundled() {
  static const PublicSuffixList list =
      PublicSuffixList::from_string(kBundledPublicSuffixData);
  return list;
}

std::string PublicSuffixList::public_suffix(std::string_view host) const {
  std::string h = normalize_host(host);
  auto labels = split_labels(h);

  // Walk candidate suffixes from longest to shortest; record the longest
  // match per rule kind. An exception rule's public suffix drops the
  // rule's leftmost label.
  std::size_t best_start = labels.size() - 1;  // implicit "*": final label
  bool matched = false;
  for (std::size_t start = 0; start < labels.size(); ++start) {
    std::string candidate = join_from(labels, start);
    if (exception_.count(candidate)) {
      return join_from(labels, start + 1);
    }
    if (!matched && exact_.count(candidate)) {
      best_start = start;
      matched = true;
    }
    // "*.X" matches labels[start..] when labels[start+1..] equals X
    if (!matched && start + 1 < labels.size() &&
        wildcard_.count(join_from(labels, start + 1))) {
      best_start = start;
      matched = true;
    }
  }
  return join_from(labels, best_start);
}

DomainName PublicSuffixList::registrable_domain(std::string_view host) const {
  std::string h = normalize_host(host);
  if (h.empty()) throw std::invalid_argument("empty host");
  if (is_ip_literal(h)) return {h, h};

  std::string suffix = public_suffix(h);
  if (suffix.size() >= h.size()) return {h, h};  // host is itself a suffix

  // one label to the left of the public suffix
  std::size_t cut = h.size() - suffix.size() - 1;  // index of '.' before suffix
  std::size_t label_start = h.rfind('.', cut == 0 ? 0 : cut - 1);
  std::string registrable =
      label_start == std::string::npos ? h : h.substr(label_start + 1);
  return {h, registrable};
}

}  // namespace oauthguard
