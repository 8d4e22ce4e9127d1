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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oauthguard/http_model.hpp"

namespace oauthguard {

struct HarError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HarLoadResult {
  std::vector<HttpTransaction> transactions;  // entry order
  std::vector<int> response_status;           // parallel to transactions
  std::size_t skipped_entries = 0;            // malformed entries
};

/// Reads a HAR 1.2 capture (the request subset plus response.status).
/// A missing or garbled file throws HarError; individually malformed
/// entries are skipped and counted.
HarLoadResult load_har(const std::string& path);
HarLoadResult load_har_from_string(const std::string& text);

/// Builds a HAR 1.2 document from recorded transactions.
class HarWriter {
 public:
  void add(const HttpTransaction& tx, int response_status);
  nlohmann::json to_json() const;
  std::string to_string() const { return to_json().dump(2) + "\n"; }
  void write(const std::string& path) const;
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    HttpTransaction tx;
    int status = 0;
  };
  std::vector<Entry> entries_;
};

}  // namespace oauthguard
