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

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

// forward declarations keep OpenSSL out of most translation units
typedef struct x509_st X509;
typedef struct evp_pkey_st EVP_PKEY;

namespace oauthguard {

struct TlsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An X509 certificate plus its private key, held as PEM with lazily
/// parsed handles.
class CertKeyPair {
 public:
  CertKeyPair() = default;
  CertKeyPair(std::string cert_pem, std::string key_pem);

  const std::string& cert_pem() const { return cert_pem_; }
  const std::string& key_pem() const { return key_pem_; }

  X509* cert() const;        // owned by this object
  EVP_PKEY* key() const;     // owned by this object

  bool valid() const { return !cert_pem_.empty() && !key_pem_.empty(); }

  void write(const std::string& cert_path, const std::string& key_path) const;

 private:
  std::string cert_pem_;
  std::string key_pem_;
  std::shared_ptr<X509> cert_;
  std::shared_ptr<EVP_PKEY> key_;
};

/// Local certificate authority minting per-host leaf certificates, used
/// by the interception proxy and the test harness servers. Keys are
/// EC P-256 to keep minting fast.
class CertAuthority {
 public:
  static CertAuthority create(const std::string& common_name);
  static CertAuthority load(const std::string& cert_path,
                            const std::string& key_path);

  /// Server certificate covering the given DNS names.
  CertKeyPair mint_leaf(const std::vector<std::string>& hosts) const;

  const CertKeyPair& pair() const { return pair_; }
  const std::string& cert_pem() const { return pair_.cert_pem(); }

 private:
  explicit CertAuthority(CertKeyPair pair) : pair_(std::move(pair)) {}
  CertKeyPair pair_;
};

}  // namespace oauthguard
