#include "ler/error.hpp"
#include "ler/policy.hpp"

#include <cmath>

namespace ler::protocol {

void VerifierPolicy::validate() const {
  if (freshness <= 0) throw Error(Errc::InvalidArgument, "freshness must be positive");
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(Errc::InvalidArgument, "tau must lie in [0,1]");
  if (nonce_ttl <= 0) throw Error(Errc::InvalidArgument, "nonce_ttl must be positive");
  if (attestation_max_age <= 0) throw Error(Errc::InvalidArgument, "attestation_max_age must be positive");
}

Json VerifierPolicy::to_json() const {
  Json allow = Json::array();
  for (const auto& m : measurement_allowlist) allow.push_back(m.hex());
  Json roots = Json::array();
  for (const auto& r : attestation_roots) roots.push_back(to_hex(r));
  return Json{{"attestation_max_age", attestation_max_age},
              {"attestation_roots", roots},
              {"expected_policy_digest", to_hex(expected_policy_digest)},
              {"freshness", freshness},
              {"measurement_allowlist", allow},
              {"nonce_ttl", nonce_ttl},
              {"tau", tau}};
}

VerifierPolicy VerifierPolicy::from_json(const Json& j) {
  VerifierPolicy p;
  for (const auto& m : require(j, "measurement_allowlist")) {
    if (!m.is_string()) throw Error(Errc::ParseError, "allowlist entries must be hex strings");
    p.measurement_allowlist.insert(enclave::EnclaveMeasurement::from_hex(m.get<std::string>()));
  }
  p.freshness = require_int(j, "freshness");
  p.tau = require_number(j, "tau");
  p.expected_policy_digest = require_digest(j, "expected_policy_digest");
  if (j.contains("nonce_ttl")) p.nonce_ttl = require_int(j, "nonce_ttl");
  if (j.contains("attestation_roots")) {
    for (const auto& r : j.at("attestation_roots")) {
      if (!r.is_string()) throw Error(Errc::ParseError, "attestation roots must be hex strings");
      p.attestation_roots.push_back(from_hex(r.get<std::string>()));
    }
  }
  if (j.contains("attestation_max_age")) p.attestation_max_age = require_int(j, "attestation_max_age");
  p.validate();
  return p;
}

void PipelinePolicy::validate() const {
  if (taxonomy_ref.empty()) throw Error(Errc::InvalidArgument, "policy without taxonomy_ref");
  if (embedding_id.empty()) throw Error(Errc::InvalidArgument, "policy without embedding_id");
  if (top_k < 1) throw Error(Errc::BadK, "top_k must be at least 1");
  if (!std::isfinite(claim_threshold)) throw Error(Errc::InvalidArgument, "claim_threshold must be finite");
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(Errc::InvalidArgument, "tau must lie in [0,1]");
  weights.validate();
}

Json PipelinePolicy::to_json() const {
  return Json{{"claim_threshold", claim_threshold},
              {"combiner", combiner.to_json()},
              {"embedding_id", embedding_id},
              {"tau", tau},
              {"taxonomy_ref", taxonomy_ref},
              {"top_k", top_k},
              {"weights", weights.to_json()}};
}

PipelinePolicy PipelinePolicy::from_json(const Json& j) {
  PipelinePolicy p;
  p.taxonomy_ref = require_string(j, "taxonomy_ref");
  p.embedding_id = require_string(j, "embedding_id");
  const auto k = require_int(j, "top_k");
  if (k < 1) throw Error(Errc::BadK, "top_k must be at least 1");
  p.top_k = static_cast<std::size_t>(k);
  p.weights = skills::WeightConfig::from_json(require(j, "weights"));
  p.claim_threshold = require_number(j, "claim_threshold");
  p.combiner = matching::Combiner::from_json(require(j, "combiner"));
  p.tau = require_number(j, "tau");
  p.validate();
  return p;
}

} // namespace ler::protocol
