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

#include "oauthguard/harness/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace oauthguard::harness {

namespace {

// Third-party hosts embedded by referer-leaking personas.
const char* kThirdPartyPool[] = {"optimizely.test", "bing.test", "licdn.test",
                                 "quantserver.test"};
const char* kTrackerHost = "tracker.test";

struct ClassPlan {
  bool csrf = false;
  bool impersonation = false;
  bool flow_misuse = false;
  bool http = false;
  bool referer_leak = false;
  bool intentional_leak = false;

  int memberships() const {
    // csrf / misuse / leaks / http, matching the per-class tallies
    return (csrf ? 1 : 0) + (impersonation || flow_misuse ? 1 : 0) +
           (referer_leak || intentional_leak ? 1 : 0) + (http ? 1 : 0);
  }
};

}  // namespace

nlohmann::json CorpusSpec::to_json() const {
  return nlohmann::json{
      {"total", total},
      {"csrf", csrf},
      {"misuse", misuse},
      {"impersonation", impersonation},
      {"leaks", leaks},
      {"intentional", intentional},
      {"http", http},
      {"vulnerable", vulnerable},
      {"httpsAvailable", https_available},
      {"leakRequests", leak_requests},
  };
}

CorpusSpec CorpusSpec::from_json(const nlohmann::json& j) {
  CorpusSpec spec;
  spec.total = j.at("total").get<int>();
  spec.csrf = j.value("csrf", 0);
  spec.misuse = j.value("misuse", 0);
  spec.impersonation = j.value("impersonation", 0);
  spec.leaks = j.value("leaks", 0);
  spec.intentional = j.value("intentional", 0);
  spec.http = j.value("http", 0);
  spec.vulnerable = j.value("vulnerable", 0);
  spec.https_available = j.value("httpsAvailable", 0);
  spec.leak_requests = j.value("leakRequests", 0);
  return spec;
}

CorpusSpec reference_corpus_spec() {
  CorpusSpec spec;
  spec.total = 137;
  spec.csrf = 53;
  spec.misuse = 21;
  spec.impersonation = 13;
  spec.leaks = 9;
  spec.intentional = 2;
  spec.http = 13;
  spec.vulnerable = 69;
  spec.https_available = 8;
  spec.leak_requests = 75;
  return spec;
}

std::vector<RpProfile> generate_corpus(const CorpusSpec& spec,
                                       std::uint64_t seed) {
  const int flow_misuse = spec.misuse - spec.impersonation;
  const int referer_leaks = spec.leaks - spec.intentional;

  if (spec.total < 0 || spec.csrf < 0 || spec.misuse < 0 ||
      spec.impersonation < 0 || spec.leaks < 0 || spec.intentional < 0 ||
      spec.http < 0 || spec.vulnerable < 0) {
    throw CorpusError("corpus counts must be non-negative");
  }
  if (spec.impersonation > spec.misuse) {
    throw CorpusError(
        "impersonation exceeds the misuse total it is counted within");
  }
  if (spec.intentional > spec.leaks) {
    throw CorpusError("intentional exceeds the leaks total");
  }
  if (spec.vulnerable > spec.total) {
    throw CorpusError("vulnerable exceeds total");
  }
  for (int count : {spec.csrf, spec.misuse, spec.leaks, spec.http}) {
    if (count > spec.vulnerable) {
      throw CorpusError("a class count exceeds vulnerable");
    }
  }
  if (spec.https_available > spec.http) {
    throw CorpusError("httpsAvailable exceeds the http persona count");
  }
  if (spec.leaks > 0 && spec.leak_requests > 0 &&
      spec.leak_requests < spec.leaks) {
    throw CorpusError("leakRequests cannot cover every leak persona");
  }

  const int memberships = spec.csrf + spec.misuse + spec.leaks + spec.http;
  int budget = memberships - spec.vulnerable;  // overlaps to place
  if (budget < 0) {
    throw CorpusError("class counts cannot reach the vulnerable total");
  }

  // Overlap layout. Forged-response delivery is only observable for
  // query-delivery personas, so only those may share a slot with csrf:
  //   1. flow-misuse personas (query-mode hybrids) into csrf
  //   2. leak personas (code flow) into csrf
  //   3/4. the rest split between http-into-csrf and impersonation-onto-http
  std::vector<ClassPlan> plans(static_cast<std::size_t>(spec.vulnerable));
  int cursor = 0;  // next fresh vulnerable slot

  for (int i = 0; i < spec.csrf; ++i) plans[cursor + i].csrf = true;
  int csrf_free = spec.csrf;
  cursor += spec.csrf;

  auto overlap_csrf = [&](int want) {
    int take = std::min({want, csrf_free, budget});
    budget -= take;
    return take;
  };

  const int fm_in_csrf = overlap_csrf(flow_misuse);
  int fm_slot = spec.csrf - csrf_free;
  csrf_free -= fm_in_csrf;
  for (int i = 0; i < fm_in_csrf; ++i) plans[fm_slot + i].flow_misuse = true;

  const int leaks_in_csrf = overlap_csrf(spec.leaks);
  int leak_slot = spec.csrf - csrf_free;
  csrf_free -= leaks_in_csrf;
  for (int i = 0; i < leaks_in_csrf; ++i) {
    // intentional personas first, then referer-leaking ones
    if (i < spec.intentional) {
      plans[leak_slot + i].intentional_leak = true;
    } else {
      plans[leak_slot + i].referer_leak = true;
    }
  }

  // Remaining budget splits evenly between http-in-csrf and
  // impersonation-on-http; the odd unit goes to the http side.
  int http_in_csrf = std::min({(budget + 1) / 2, csrf_free, spec.http});
  int imp_on_http = budget - http_in_csrf;
  if (imp_on_http > std::min(spec.impersonation, spec.http - http_in_csrf)) {
    // rebalance when impersonation cannot absorb its half
    imp_on_http = std::min(spec.impersonation, spec.http - http_in_csrf);
    http_in_csrf = budget - imp_on_http;
  }
  if (http_in_csrf > std::min(csrf_free, spec.http) ||
      http_in_csrf + imp_on_http != budget) {
    throw CorpusError(
        "class counts cannot reach the vulnerable total with observable "
        "overlaps");
  }
  int http_slot = spec.csrf - csrf_free;
  csrf_free -= http_in_csrf;
  for (int i = 0; i < http_in_csrf; ++i) plans[http_slot + i].http = true;

  // fresh slots: leftover leaks, flow misuse, impersonation, http
  auto fresh = [&](int count, auto mark) {
    for (int i = 0; i < count; ++i) {
      if (cursor >= spec.vulnerable) {
        throw CorpusError("class counts overflow the vulnerable total");
      }
      mark(plans[cursor++]);
    }
  };
  {
    int remaining_intentional = spec.intentional - std::min(leaks_in_csrf,
                                                            spec.intentional);
    int placed_referer =
        std::max(0, leaks_in_csrf - spec.intentional);
    fresh(remaining_intentional,
          [](ClassPlan& p) { p.intentional_leak = true; });
    fresh(referer_leaks - placed_referer,
          [](ClassPlan& p) { p.referer_leak = true; });
  }
  fresh(flow_misuse - fm_in_csrf, [](ClassPlan& p) { p.flow_misuse = true; });
  {
    // impersonation personas; the first imp_on_http of them are also http
    int placed = 0;
    for (int i = 0; i < spec.impersonation; ++i) {
      if (cursor >= spec.vulnerable) {
        throw CorpusError("class counts overflow the vulnerable total");
      }
      plans[cursor].impersonation = true;
      if (placed < imp_on_http) {
        plans[cursor].http = true;
        ++placed;
      }
      ++cursor;
    }
  }
  fresh(spec.http - http_in_csrf - imp_on_http,
        [](ClassPlan& p) { p.http = true; });

  if (cursor != spec.vulnerable) {
    throw CorpusError("class counts cannot fill the vulnerable total");
  }
  {
    int check = 0;
    for (const auto& plan : plans) check += plan.memberships();
    if (check != memberships) {
      throw CorpusError("internal overlap accounting error");
    }
  }

  // leak request distribution: as even as possible across leak personas
  std::vector<int> leak_counts;
  if (spec.leaks > 0) {
    int total_requests =
        spec.leak_requests > 0 ? spec.leak_requests : 4 * spec.leaks;
    int base = total_requests / spec.leaks;
    int extra = total_requests % spec.leaks;
    for (int i = 0; i < spec.leaks; ++i) {
      leak_counts.push_back(base + (i < extra ? 1 : 0));
    }
  }

  // https availability: the first httpsAvailable http personas (by plan
  // order) get a TLS listener
  std::mt19937_64 rng(seed);
  std::vector<int> slot_order(static_cast<std::size_t>(spec.total));
  std::iota(slot_order.begin(), slot_order.end(), 0);
  std::shuffle(slot_order.begin(), slot_order.end(), rng);

  std::vector<RpProfile> profiles(static_cast<std::size_t>(spec.total));
  int leak_index = 0;
  int https_left = spec.https_available;
  int misuse_variant = 0;
  const std::vector<std::vector<std::string>> kMisuseCombos = {
      {"code", "id_token"},
      {"code", "access_token"},
      {"code", "access_token", "id_token"},
  };

  for (int slot = 0; slot < spec.total; ++slot) {
    RpProfile profile;
    char name[16];
    std::snprintf(name, sizeof(name), "rp%03d", slot_order[slot]);
    profile.name = name;

    if (slot < spec.vulnerable) {
      const ClassPlan& plan = plans[slot];
      profile.sends_state = !plan.csrf;
      profile.uses_https = !plan.http;
      if (plan.http) {
        profile.https_available = https_left > 0;
        if (https_left > 0) --https_left;
      }
      if (plan.impersonation) {
        profile.flow = Flow::kImplicit;
        profile.tokens_submitted = {"access_token"};
      } else if (plan.flow_misuse) {
        profile.tokens_submitted = kMisuseCombos[misuse_variant++ %
                                                 kMisuseCombos.size()];
      } else {
        profile.tokens_submitted = {"code"};
      }
      if (plan.referer_leak) {
        int requests = leak_counts[leak_index++];
        for (int r = 0; r < requests; ++r) {
          profile.third_party_resources.push_back(
              kThirdPartyPool[r % std::size(kThirdPartyPool)]);
        }
      } else if (plan.intentional_leak) {
        profile.intentional_leak_target = kTrackerHost;
        profile.intentional_leak_requests = leak_counts[leak_index++];
      }
    }
    profile.validate();
    profiles[static_cast<std::size_t>(slot)] = std::move(profile);
  }
  return profiles;
}

}  // namespace oauthguard::harness
