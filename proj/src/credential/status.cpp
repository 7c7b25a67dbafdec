#include "ler/credential.hpp"
#include "ler/error.hpp"

#include <algorithm>

namespace ler::credential {

std::string_view to_string(ListKind k) noexcept {
  return k == ListKind::Institutional ? "institutional" : "derivative";
}

std::string_view to_string(CredentialStatus s) noexcept {
  switch (s) {
  case CredentialStatus::Valid: return "valid";
  case CredentialStatus::Revoked: return "revoked";
  case CredentialStatus::RevokedUnknown: return "revoked-unknown";
  }
  return "?";
}

namespace {

ListKind list_kind_from_string(std::string_view text) {
  if (text == "institutional") return ListKind::Institutional;
  if (text == "derivative") return ListKind::Derivative;
  throw Error(Errc::ParseError, "unknown list kind '" + std::string(text) + "'");
}

CredentialStatus status_from_string(std::string_view text) {
  for (auto s : {CredentialStatus::Valid, CredentialStatus::Revoked, CredentialStatus::RevokedUnknown}) {
    if (to_string(s) == text) return s;
  }
  throw Error(Errc::ParseError, "unknown status '" + std::string(text) + "'");
}

void require_owner(const StatusList& list, const KeyPair& owner_keys) {
  if (!std::ranges::equal(owner_keys.public_key, list.owner_key)) {
    throw Error(Errc::Unauthorized, "keys do not own status list " + list.locator);
  }
  if (!list.signature_valid()) throw Error(Errc::BadListSig, list.locator);
}

StatusList resign(StatusList list, const KeyPair& owner_keys, Timestamp now) {
  list.issued_at = now;
  list.signature = owner_keys.sign(canonical_serialize(list.signed_fields()));
  return list;
}

} // namespace

Json StatusList::signed_fields() const {
  Json e = Json::object();
  for (const auto& [id, state] : entries) e[id] = state == EntryState::Valid ? "valid" : "revoked";
  return Json{{"entries", e},
              {"issued_at", issued_at},
              {"list_kind", to_string(list_kind)},
              {"locator", locator},
              {"owner_did", owner_did.str()},
              {"owner_key", to_hex(owner_key)}};
}

Json StatusList::to_json() const {
  Json j = signed_fields();
  j["signature"] = to_hex(signature);
  return j;
}

StatusList StatusList::from_json(const Json& j) {
  StatusList l;
  l.owner_did = Did::parse(require_string(j, "owner_did"));
  l.owner_key = require_hex(j, "owner_key");
  l.list_kind = list_kind_from_string(require_string(j, "list_kind"));
  l.locator = require_string(j, "locator");
  for (const auto& [id, state] : require(j, "entries").items()) {
    if (state == "valid") {
      l.entries[id] = EntryState::Valid;
    } else if (state == "revoked") {
      l.entries[id] = EntryState::Revoked;
    } else {
      throw Error(Errc::ParseError, "bad status entry for " + id);
    }
  }
  l.issued_at = require_int(j, "issued_at");
  l.signature = require_hex(j, "signature");
  return l;
}

bool StatusList::signature_valid() const noexcept {
  try {
    return identity::verify_signature(owner_key, to_bytes(canonical_serialize(signed_fields())), signature);
  } catch (...) {
    return false;
  }
}

StatusList create_status_list(const KeyPair& owner_keys, const Did& owner_did, ListKind kind, std::string locator,
                              Timestamp now) {
  StatusList list;
  list.owner_did = owner_did;
  list.owner_key = owner_keys.public_key;
  list.list_kind = kind;
  list.locator = std::move(locator);
  return resign(std::move(list), owner_keys, now);
}

CredentialStatus status(const StatusList& list, std::string_view credential_id) {
  if (!list.signature_valid()) throw Error(Errc::BadListSig, list.locator);
  auto it = list.entries.find(std::string(credential_id));
  if (it == list.entries.end()) {
    return list.list_kind == ListKind::Institutional ? CredentialStatus::Valid : CredentialStatus::RevokedUnknown;
  }
  return it->second == EntryState::Valid ? CredentialStatus::Valid : CredentialStatus::Revoked;
}

CredentialStatus status(const StatusList& list, const DidDocument& owner_doc, std::string_view credential_id) {
  if (owner_doc.did != list.owner_did || owner_doc.find_key(list.owner_key) == nullptr) {
    throw Error(Errc::BadListSig, "list key is not a verification method of " + owner_doc.did.str());
  }
  return status(list, credential_id);
}

StatusList register_entry(const StatusList& list, std::string_view credential_id, const KeyPair& owner_keys,
                          Timestamp now) {
  require_owner(list, owner_keys);
  StatusList next = list;
  next.entries.try_emplace(std::string(credential_id), EntryState::Valid);
  return resign(std::move(next), owner_keys, now);
}

StatusList revoke(const StatusList& list, std::string_view credential_id, const KeyPair& owner_keys, Timestamp now) {
  require_owner(list, owner_keys);
  StatusList next = list;
  next.entries[std::string(credential_id)] = EntryState::Revoked;
  return resign(std::move(next), owner_keys, now);
}

Json StatusSnippet::signed_fields() const {
  return Json{{"credential_id", credential_id}, {"issued_at", issued_at},       {"list_kind", to_string(list_kind)},
              {"owner_did", owner_did.str()},   {"owner_key", to_hex(owner_key)}, {"status", to_string(status)}};
}

Json StatusSnippet::to_json() const {
  Json j = signed_fields();
  j["signature"] = to_hex(signature);
  return j;
}

StatusSnippet StatusSnippet::from_json(const Json& j) {
  StatusSnippet s;
  s.owner_did = Did::parse(require_string(j, "owner_did"));
  s.owner_key = require_hex(j, "owner_key");
  s.list_kind = list_kind_from_string(require_string(j, "list_kind"));
  s.credential_id = require_string(j, "credential_id");
  s.status = status_from_string(require_string(j, "status"));
  s.issued_at = require_int(j, "issued_at");
  s.signature = require_hex(j, "signature");
  return s;
}

bool StatusSnippet::signature_valid() const noexcept {
  try {
    return identity::verify_signature(owner_key, to_bytes(canonical_serialize(signed_fields())), signature);
  } catch (...) {
    return false;
  }
}

StatusSnippet staple(const StatusList& list, std::string_view credential_id, const KeyPair& owner_keys,
                     Timestamp now) {
  require_owner(list, owner_keys);
  StatusSnippet s;
  s.owner_did = list.owner_did;
  s.owner_key = list.owner_key;
  s.list_kind = list.list_kind;
  s.credential_id = std::string(credential_id);
  s.status = status(list, credential_id);
  s.issued_at = now;
  s.signature = owner_keys.sign(canonical_serialize(s.signed_fields()));
  return s;
}

} // namespace ler::credential
