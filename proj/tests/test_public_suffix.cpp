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

#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "oauthguard/public_suffix.hpp"

using namespace oauthguard;

namespace {

const char* kSnapshotPath = TEST_DATA_DIR "/public_suffix_list.dat";

// Direct-lookup oracle over the snapshot file: scans every rule per host
// with plain label comparison. Independent of the production matcher.
struct SuffixOracle {
  struct Rule {
    std::vector<std::string> labels;
    bool exception = false;
  };
  std::vector<Rule> rules;

  static std::vector<std::string> split(const std::string& host) {
    std::vector<std::string> labels;
    std::stringstream in(host);
    std::string label;
    while (std::getline(in, label, '.')) labels.push_back(label);
    return labels;
  }

  explicit SuffixOracle(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      while (!line.empty() && (line.back() == ' ' || line.back() == '\r' ||
                               line.back() == '\t')) {
        line.pop_back();
      }
      std::size_t start = line.find_first_not_of(" \t");
      if (start == std::string::npos) continue;
      line = line.substr(start);
      Rule rule;
      if (line[0] == '!') {
        rule.exception = true;
        line = line.substr(1);
      }
      rule.labels = split(line);
      rules.push_back(rule);
    }
  }

  static bool matches(const Rule& rule, const std::vector<std::string>& host) {
    if (rule.labels.size() > host.size()) return false;
    for (std::size_t i = 0; i < rule.labels.size(); ++i) {
      const std::string& rule_label = rule.labels[rule.labels.size() - 1 - i];
      const std::string& host_label = host[host.size() - 1 - i];
      if (rule_label != "*" && rule_label != host_label) return false;
    }
    return true;
  }

  std::string registrable(const std::string& host) const {
    auto labels = SuffixOracle::split(host);
    std::size_t suffix_len = 1;  // implicit "*"
    bool exception_found = false;
    for (const auto& rule : rules) {
      if (!matches(rule, labels)) continue;
      if (rule.exception) {
        suffix_len = rule.labels.size() - 1;
        exception_found = true;
        break;
      }
      if (rule.labels.size() > suffix_len) suffix_len = rule.labels.size();
    }
    (void)exception_found;
    std::size_t want = suffix_len + 1;
    if (want > labels.size()) want = labels.size();
    std::string out;
    for (std::size_t i = labels.size() - want; i < labels.size(); ++i) {
      if (!out.empty()) out += '.';
      out += labels[i];
    }
    return out;
  }
};

}  // namespace

TEST_CASE("registrable domain of a www host") {
  auto d = PublicSuffixList::bundled().registrable_domain("www.dropbox.com");
  CHECK(d.host == "www.dropbox.com");
  CHECK(d.registrable == "dropbox.com");
}

TEST_CASE("registrable domain of a sign-in subdomain") {
  auto d = PublicSuffixList::bundled().registrable_domain(
      "signin.chicagotribune.com");
  CHECK(d.registrable == "chicagotribune.com");
}

TEST_CASE("multi-label public suffixes") {
  const auto& psl = PublicSuffixList::bundled();
  CHECK(psl.registrable_domain("foo.example.co.uk").registrable ==
        "example.co.uk");
  CHECK(psl.registrable_domain("example.co.uk").registrable ==
        "example.co.uk");
}

TEST_CASE("wildcard and exception rules") {
  const auto& psl = PublicSuffixList::bundled();
  // *.ck makes foo.ck a public suffix; !www.ck carves www.ck back out
  CHECK(psl.registrable_domain("a.b.foo.ck").registrable == "b.foo.ck");
  CHECK(psl.registrable_domain("www.ck").registrable == "www.ck");
  CHECK(psl.registrable_domain("sub.www.ck").registrable == "www.ck");
}

TEST_CASE("unlisted TLDs fall back to the implicit rule") {
  const auto& psl = PublicSuffixList::bundled();
  CHECK(psl.registrable_domain("rp0.test").registrable == "rp0.test");
  CHECK(psl.registrable_domain("a.b.rp0.test").registrable == "rp0.test");
}

TEST_CASE("IP literals map to themselves") {
  const auto& psl = PublicSuffixList::bundled();
  CHECK(psl.registrable_domain("127.0.0.1").registrable == "127.0.0.1");
  CHECK(psl.registrable_domain("[::1]").registrable == "[::1]");
  CHECK_FALSE(is_ip_literal("10.0.0.999"));
  CHECK_FALSE(is_ip_literal("a.1.2.3"));
}

TEST_CASE("empty host is rejected") {
  CHECK_THROWS_AS(PublicSuffixList::bundled().registrable_domain(""),
                  std::invalid_argument);
}

TEST_CASE("normalization lowercases and strips the trailing dot") {
  auto d = PublicSuffixList::bundled().registrable_domain("WWW.DropBox.COM.");
  CHECK(d.registrable == "dropbox.com");
}

TEST_CASE("registrable_domain is idempotent") {
  const auto& psl = PublicSuffixList::bundled();
  for (const char* host :
       {"www.dropbox.com", "foo.example.co.uk", "a.b.c.d.appspot.com",
        "x.github.io", "rp0.test", "www.ck", "deep.a.b.foo.ck"}) {
    std::string once = psl.registrable_domain(host).registrable;
    CHECK(psl.registrable_domain(once).registrable == once);
  }
}

TEST_CASE("bundled snapshot matches the repository data file") {
  PublicSuffixList from_file = PublicSuffixList::from_file(kSnapshotPath);
  CHECK(from_file.rule_count() == PublicSuffixList::bundled().rule_count());
}

TEST_CASE("matches the direct-lookup oracle on 1000 randomized hosts") {
  SuffixOracle oracle(kSnapshotPath);
  PublicSuffixList psl = PublicSuffixList::from_file(kSnapshotPath);

  std::vector<std::string> suffix_samples = {
      "com",  "co.uk", "org.uk", "co.jp", "com.au", "test", "io",
      "github.io", "appspot.com", "ck", "foo.ck", "www.ck", "bd", "x.bd",
      "unknowntld"};
  std::vector<std::string> words = {"alpha", "beta",  "signin", "www",
                                    "api",   "cdn",   "shop",   "x",
                                    "login", "auth0", "mail",   "a1"};

  std::mt19937_64 rng(20260409);
  std::uniform_int_distribution<std::size_t> pick_suffix(
      0, suffix_samples.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_word(0, words.size() - 1);
  std::uniform_int_distribution<int> extra_labels(0, 3);

  for (int i = 0; i < 1000; ++i) {
    std::string host;
    for (int k = extra_labels(rng); k >= 0; --k) {
      host += words[pick_word(rng)];
      host += '.';
    }
    host += suffix_samples[pick_suffix(rng)];
    INFO("host = " << host);
    CHECK(psl.registrable_domain(host).registrable == oracle.registrable(host));
  }
}
