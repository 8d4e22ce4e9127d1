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

#include "oauthguard/tls.hpp"

#include <openssl/bio.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/rand.h>
#include <openssl/x509.h>
#include <openssl/x509v3.h>

#include <fstream>

namespace oauthguard {

namespace {

std::string last_openssl_error(const std::string& what) {
  char buf[256] = {0};
  ERR_error_string_n(ERR_get_error(), buf, sizeof(buf));
  return what + ": " + buf;
}

using BioPtr = std::unique_ptr<BIO, decltype(&BIO_free)>;

std::string bio_to_string(BIO* bio) {
  char* data = nullptr;
  long len = BIO_get_mem_data(bio, &data);
  return std::string(data, static_cast<std::size_t>(len));
}

std::shared_ptr<EVP_PKEY> generate_ec_key() {
  EVP_PKEY* key = EVP_EC_gen("P-256");
  if (!key) throw TlsError(last_openssl_error("EC key generation failed"));
  return {key, EVP_PKEY_free};
}

std::string key_to_pem(EVP_PKEY* key) {
  BioPtr bio(BIO_new(BIO_s_mem()), BIO_free);
  if (!PEM_write_bio_PrivateKey(bio.get(), key, nullptr, nullptr, 0, nullptr,
                                nullptr)) {
    throw TlsError(last_openssl_error("cannot serialize private key"));
  }
  return bio_to_string(bio.get());
}

std::string cert_to_pem(X509* cert) {
  BioPtr bio(BIO_new(BIO_s_mem()), BIO_free);
  if (!PEM_write_bio_X509(bio.get(), cert)) {
    throw TlsError(last_openssl_error("cannot serialize certificate"));
  }
  return bio_to_string(bio.get());
}

std::shared_ptr<X509> pem_to_cert(const std::string& pem) {
  BioPtr bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())),
             BIO_free);
  X509* cert = PEM_read_bio_X509(bio.get(), nullptr, nullptr, nullptr);
  if (!cert) throw TlsError(last_openssl_error("cannot parse certificate PEM"));
  return {cert, X509_free};
}

std::shared_ptr<EVP_PKEY> pem_to_key(const std::string& pem) {
  BioPtr bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())),
             BIO_free);
  EVP_PKEY* key = PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr);
  if (!key) throw TlsError(last_openssl_error("cannot parse key PEM"));
  return {key, EVP_PKEY_free};
}

void set_random_serial(X509* cert) {
  unsigned char bytes[16];
  RAND_bytes(bytes, sizeof(bytes));
  bytes[0] &= 0x7F;  // keep it positive
  BIGNUM* bn = BN_bin2bn(bytes, sizeof(bytes), nullptr);
  BN_to_ASN1_INTEGER(bn, X509_get_serialNumber(cert));
  BN_free(bn);
}

void add_extension(X509* cert, X509* issuer, int nid, const char* value) {
  X509V3_CTX ctx;
  X509V3_set_ctx_nodb(&ctx);
  X509V3_set_ctx(&ctx, issuer, cert, nullptr, nullptr, 0);
  X509_EXTENSION* ext = X509V3_EXT_conf_nid(nullptr, &ctx, nid,
                                            const_cast<char*>(value));
  if (!ext) throw TlsError(last_openssl_error("cannot build extension"));
  X509_add_ext(cert, ext, -1);
  X509_EXTENSION_free(ext);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TlsError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

CertKeyPair::CertKeyPair(std::string cert_pem, std::string key_pem)
    : cert_pem_(std::move(cert_pem)), key_pem_(std::move(key_pem)) {
  cert_ = pem_to_cert(cert_pem_);
  key_ = pem_to_key(key_pem_);
}

X509* CertKeyPair::cert() const { return cert_.get(); }
EVP_PKEY* CertKeyPair::key() const { return key_.get(); }

void CertKeyPair::write(const std::string& cert_path,
                        const std::string& key_path) const {
  std::ofstream cert_out(cert_path, std::ios::binary);
  std::ofstream key_out(key_path, std::ios::binary);
  if (!cert_out || !key_out) {
    throw TlsError("cannot write certificate files");
  }
  cert_out << cert_pem_;
  key_out << key_pem_;
}

CertAuthority CertAuthority::create(const std::string& common_name) {
  auto key = generate_ec_key();
  std::unique_ptr<X509, decltype(&X509_free)> cert(X509_new(), X509_free);
  X509_set_version(cert.get(), 2);
  set_random_serial(cert.get());
  X509_gmtime_adj(X509_getm_notBefore(cert.get()), -3600);
  X509_gmtime_adj(X509_getm_notAfter(cert.get()), 10L * 365 * 24 * 3600);
  X509_set_pubkey(cert.get(), key.get());

  X509_NAME* name = X509_get_subject_name(cert.get());
  X509_NAME_add_entry_by_txt(name, "CN", MBSTRING_ASC,
                             reinterpret_cast<const unsigned char*>(
                                 common_name.c_str()),
                             -1, -1, 0);
  X509_set_issuer_name(cert.get(), name);

  add_extension(cert.get(), cert.get(), NID_basic_constraints,
                "critical,CA:TRUE");
  add_extension(cert.get(), cert.get(), NID_key_usage,
                "critical,keyCertSign,cRLSign");
  add_extension(cert.get(), cert.get(), NID_subject_key_identifier, "hash");

  if (!X509_sign(cert.get(), key.get(), EVP_sha256())) {
    throw TlsError(last_openssl_error("cannot self-sign CA certificate"));
  }
  return CertAuthority(
      CertKeyPair(cert_to_pem(cert.get()), key_to_pem(key.get())));
}

CertAuthority CertAuthority::load(const std::string& cert_path,
                                  const std::string& key_path) {
  return CertAuthority(CertKeyPair(read_file(cert_path), read_file(key_path)));
}

CertKeyPair CertAuthority::mint_leaf(
    const std::vector<std::string>& hosts) const {
  if (hosts.empty()) throw TlsError("mint_leaf needs at least one host");

  auto key = generate_ec_key();
  std::unique_ptr<X509, decltype(&X509_free)> cert(X509_new(), X509_free);
  X509_set_version(cert.get(), 2);
  set_random_serial(cert.get());
  X509_gmtime_adj(X509_getm_notBefore(cert.get()), -3600);
  X509_gmtime_adj(X509_getm_notAfter(cert.get()), 365L * 24 * 3600);
  X509_set_pubkey(cert.get(), key.get());

  X509_NAME* subject = X509_get_subject_name(cert.get());
  X509_NAME_add_entry_by_txt(
      subject, "CN", MBSTRING_ASC,
      reinterpret_cast<const unsigned char*>(hosts.front().c_str()), -1, -1,
      0);
  X509_set_issuer_name(cert.get(), X509_get_subject_name(pair_.cert()));

  std::string san;
  for (const auto& host : hosts) {
    if (!san.empty()) san += ',';
    san += "DNS:" + host;
  }
  add_extension(cert.get(), pair_.cert(), NID_subject_alt_name, san.c_str());
  add_extension(cert.get(), pair_.cert(), NID_basic_constraints,
                "critical,CA:FALSE");
  add_extension(cert.get(), pair_.cert(), NID_ext_key_usage, "serverAuth");

  if (!X509_sign(cert.get(), pair_.key(), EVP_sha256())) {
    throw TlsError(last_openssl_error("cannot sign leaf certificate"));
  }
  return CertKeyPair(cert_to_pem(cert.get()), key_to_pem(key.get()));
}

}  // namespace oauthguard
