#include "ler/error.hpp"
#include "ler/identity.hpp"

#include <mutex>

namespace ler::identity {

namespace fs = std::filesystem;

DidRegistry::DidRegistry(fs::path directory) : directory_(std::move(directory)) {
  fs::create_directories(*directory_);
}

fs::path DidRegistry::path_for(const Did& did) const {
  return *directory_ / did.method / (did.identifier + ".json");
}

std::optional<DidDocument> DidRegistry::load(const Did& did) const {
  if (!directory_) {
    auto it = documents_.find(did.str());
    if (it == documents_.end()) return std::nullopt;
    return it->second;
  }
  auto path = path_for(did);
  if (!fs::exists(path)) return std::nullopt;
  return DidDocument::from_json(read_document(path));
}

void DidRegistry::store(const DidDocument& doc) {
  if (!directory_) {
    documents_[doc.did.str()] = doc;
    return;
  }
  auto path = path_for(doc.did);
  fs::create_directories(path.parent_path());
  write_document_atomic(path, doc.to_json());
}

void DidRegistry::register_document(const DidDocument& doc) {
  doc.validate();
  std::unique_lock lock(mutex_);
  if (load(doc.did)) throw Error(Errc::InvalidArgument, doc.did.str() + " already registered");
  store(doc);
}

void DidRegistry::update_document(const DidDocument& doc) {
  doc.validate();
  std::unique_lock lock(mutex_);
  auto current = load(doc.did);
  if (!current) throw Error(Errc::NotFound, doc.did.str());
  if (doc.version <= current->version) {
    throw Error(Errc::StaleVersion, "version " + std::to_string(doc.version) + " is not newer than " +
                                        std::to_string(current->version));
  }
  store(doc);
}

DidDocument DidRegistry::resolve(const Did& did) const {
  std::shared_lock lock(mutex_);
  auto doc = load(did);
  if (!doc) throw Error(Errc::NotFound, did.str());
  return *doc;
}

bool DidRegistry::contains(const Did& did) const {
  std::shared_lock lock(mutex_);
  return load(did).has_value();
}

std::vector<Did> DidRegistry::list() const {
  std::shared_lock lock(mutex_);
  std::vector<Did> out;
  if (!directory_) {
    for (const auto& [_, doc] : documents_) out.push_back(doc.did);
    return out;
  }
  for (const auto& method_dir : fs::directory_iterator(*directory_)) {
    if (!method_dir.is_directory()) continue;
    for (const auto& entry : fs::directory_iterator(method_dir.path())) {
      if (entry.path().extension() != ".json") continue;
      out.push_back(Did{method_dir.path().filename().string(), entry.path().stem().string()});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace ler::identity
