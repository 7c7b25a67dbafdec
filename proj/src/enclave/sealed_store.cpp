#include "ler/enclave.hpp"
#include "ler/error.hpp"

namespace ler::enclave {

SealedStore::SealedStore(Bytes key, std::shared_ptr<RandomSource> rng) : key_(std::move(key)), rng_(std::move(rng)) {
  if (key_.size() != secretbox::kKeySize) throw Error(Errc::InvalidKey, "sealing key must be 32 octets");
}

void SealedStore::seal(const std::string& label, std::span<const std::uint8_t> plaintext) {
  std::lock_guard lock(mutex_);
  blobs_[label] = secretbox::seal(key_, plaintext, *rng_);
}

Bytes SealedStore::unseal(const std::string& label) const {
  std::lock_guard lock(mutex_);
  auto it = blobs_.find(label);
  if (it == blobs_.end()) throw Error(Errc::NotFound, "sealed label " + label);
  return secretbox::open(key_, it->second);
}

bool SealedStore::contains(const std::string& label) const {
  std::lock_guard lock(mutex_);
  return blobs_.contains(label);
}

void SealedStore::erase(const std::string& label) {
  std::lock_guard lock(mutex_);
  blobs_.erase(label);
}

Bytes SealedStore::export_blob(const std::string& label) const {
  std::lock_guard lock(mutex_);
  auto it = blobs_.find(label);
  if (it == blobs_.end()) throw Error(Errc::NotFound, "sealed label " + label);
  return it->second;
}

void SealedStore::import_blob(const std::string& label, Bytes blob) {
  std::lock_guard lock(mutex_);
  blobs_[label] = std::move(blob);
}

} // namespace ler::enclave
