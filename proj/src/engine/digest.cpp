#include "crackmesh/engine/digest.hpp"

#include <openssl/evp.h>

#include <stdexcept>

#include "crackmesh/common/hex.hpp"

namespace crackmesh::engine {

struct Digester::Impl {
  EVP_MD* md = nullptr;
  EVP_MD_CTX* ctx = nullptr;

  explicit Impl(HashAlgorithm algorithm) {
    const char* name = "MD5";
    if (algorithm == HashAlgorithm::kSha1) name = "SHA1";
    if (algorithm == HashAlgorithm::kSha256) name = "SHA256";
    md = EVP_MD_fetch(nullptr, name, nullptr);
    ctx = EVP_MD_CTX_new();
    if (md == nullptr || ctx == nullptr) {
      EVP_MD_free(md);
      EVP_MD_CTX_free(ctx);
      throw std::runtime_error(std::string("digest unavailable: ") + name);
    }
  }
  ~Impl() {
    EVP_MD_CTX_free(ctx);
    EVP_MD_free(md);
  }
};

Digester::Digester(HashAlgorithm algorithm)
    : algorithm_(algorithm),
      size_(digest_hex_length(algorithm) / 2),
      impl_(std::make_unique<Impl>(algorithm)) {}

Digester::~Digester() = default;
Digester::Digester(Digester&&) noexcept = default;
Digester& Digester::operator=(Digester&&) noexcept = default;

RawDigest Digester::raw(std::string_view input) {
  RawDigest out{};
  unsigned int len = 0;
  EVP_DigestInit_ex2(impl_->ctx, impl_->md, nullptr);
  EVP_DigestUpdate(impl_->ctx, input.data(), input.size());
  EVP_DigestFinal_ex(impl_->ctx, out.data(), &len);
  return out;
}

HexDigest Digester::hex(std::string_view input) {
  auto bytes = raw(input);
  auto text = hex_encode(std::string_view(reinterpret_cast<const char*>(bytes.data()), size_));
  return *HexDigest::parse(text, algorithm_);
}

HexDigest digest(HashAlgorithm algorithm, std::string_view input) {
  Digester d(algorithm);
  return d.hex(input);
}

RawDigest to_raw(const HexDigest& digest) {
  RawDigest out{};
  auto bytes = hex_decode(digest.str());
  if (bytes) {
    for (std::size_t i = 0; i < bytes->size() && i < out.size(); ++i) {
      out[i] = static_cast<std::uint8_t>((*bytes)[i]);
    }
  }
  return out;
}

}  // namespace crackmesh::engine
