#include "ler/gateway.hpp"

namespace ler::gateway {

protocol::Wallet WalletStore::load() const {
  std::lock_guard lock(mutex_);
  if (!fs::exists(path_)) return {};
  return protocol::Wallet::from_json(read_document(path_));
}

void WalletStore::save(const protocol::Wallet& wallet) const {
  std::lock_guard lock(mutex_);
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  write_document_atomic(path_, wallet.to_json());
}

} // namespace ler::gateway
