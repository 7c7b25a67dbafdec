#include "ler/credential.hpp"
#include "ler/error.hpp"

#include <algorithm>

namespace ler::credential {

Json claim_value_to_json(const ClaimValue& value) {
  return std::visit([](const auto& v) { return Json(v); }, value);
}

ClaimValue claim_value_from_json(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  throw Error(Errc::ParseError, "claim value must be a string or number");
}

std::optional<double> numeric_value(const ClaimValue& value) noexcept {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&value)) return *d;
  return std::nullopt;
}

Digest claim_digest(std::span<const std::uint8_t> salt, std::string_view key, const ClaimValue& value) {
  ByteWriter w;
  w.put(salt).put(canonical_serialize(Json(key))).put(canonical_serialize(claim_value_to_json(value)));
  return sha256(w.bytes());
}

Json Claim::to_json() const {
  return Json{{"key", key}, {"salt", to_hex(salt)}, {"value", claim_value_to_json(value)}};
}

Claim Claim::from_json(const Json& j) {
  Claim c{require_string(j, "key"), claim_value_from_json(require(j, "value")), require_hex(j, "salt")};
  if (c.salt.size() != kSaltSize) throw Error(Errc::ParseError, "claim salt must be 16 octets");
  return c;
}

std::string_view to_string(Comparator c) noexcept {
  switch (c) {
  case Comparator::Lt: return "<";
  case Comparator::Le: return "<=";
  case Comparator::Eq: return "==";
  case Comparator::Ne: return "!=";
  case Comparator::Ge: return ">=";
  case Comparator::Gt: return ">";
  }
  return "?";
}

Comparator comparator_from_string(std::string_view text) {
  for (auto c : {Comparator::Lt, Comparator::Le, Comparator::Eq, Comparator::Ne, Comparator::Ge, Comparator::Gt}) {
    if (to_string(c) == text) return c;
  }
  throw Error(Errc::ParseError, "unknown comparator '" + std::string(text) + "'");
}

bool Predicate::evaluate(const ClaimValue& value) const {
  auto v = numeric_value(value);
  if (!v) throw Error(Errc::InvalidArgument, "predicate on non-numeric claim '" + key + "'");
  switch (op) {
  case Comparator::Lt: return *v < bound;
  case Comparator::Le: return *v <= bound;
  case Comparator::Eq: return *v == bound;
  case Comparator::Ne: return *v != bound;
  case Comparator::Ge: return *v >= bound;
  case Comparator::Gt: return *v > bound;
  }
  return false;
}

Json Predicate::to_json() const { return Json{{"bound", bound}, {"key", key}, {"op", to_string(op)}}; }

Predicate Predicate::from_json(const Json& j) {
  return {require_string(j, "key"), comparator_from_string(require_string(j, "op")), require_number(j, "bound")};
}

bool DisclosurePolicy::allows_claim(std::string_view key) const {
  return allowed_claims.contains(std::string(key));
}

bool DisclosurePolicy::allows_predicate(const Predicate& p) const {
  return std::ranges::find(allowed_predicates, p) != allowed_predicates.end();
}

Json DisclosurePolicy::to_json() const {
  Json preds = Json::array();
  for (const auto& p : allowed_predicates) preds.push_back(p.to_json());
  return Json{{"allowed_claims", allowed_claims},
              {"allowed_predicates", preds},
              {"default_deny", default_deny},
              {"policy_id", policy_id}};
}

DisclosurePolicy DisclosurePolicy::from_json(const Json& j) {
  DisclosurePolicy p;
  p.policy_id = require_string(j, "policy_id");
  for (const auto& k : require(j, "allowed_claims")) {
    if (!k.is_string()) throw Error(Errc::ParseError, "claim keys must be strings");
    p.allowed_claims.insert(k.get<std::string>());
  }
  for (const auto& pr : require(j, "allowed_predicates")) p.allowed_predicates.push_back(Predicate::from_json(pr));
  const Json& dd = require(j, "default_deny");
  if (!dd.is_boolean()) throw Error(Errc::ParseError, "default_deny must be a boolean");
  p.default_deny = dd.get<bool>();
  return p;
}

Json DisclosureRequest::to_json() const {
  Json preds = Json::array();
  for (const auto& p : predicates) preds.push_back(p.to_json());
  return Json{{"claims", claims}, {"predicates", preds}};
}

DisclosureRequest DisclosureRequest::from_json(const Json& j) {
  DisclosureRequest r;
  for (const auto& k : require(j, "claims")) {
    if (!k.is_string()) throw Error(Errc::ParseError, "claim keys must be strings");
    r.claims.insert(k.get<std::string>());
  }
  if (j.contains("predicates")) {
    for (const auto& p : j.at("predicates")) r.predicates.push_back(Predicate::from_json(p));
  }
  return r;
}

} // namespace ler::credential
