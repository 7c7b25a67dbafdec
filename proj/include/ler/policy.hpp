#ifndef LER_POLICY_HPP
#define LER_POLICY_HPP

#include "ler/canonical.hpp"
#include "ler/matching.hpp"
#include "ler/skills.hpp"
#include "ler/verifier_policy.hpp"

#include <string>

namespace ler::protocol {

/// Everything that shapes a derivation and a matching decision. Its canonical
/// digest is h_policy in the attestation evidence.
struct PipelinePolicy {
  std::string taxonomy_ref;
  std::string embedding_id;
  std::size_t top_k = 10;
  skills::WeightConfig weights = skills::WeightConfig::defaults();
  /// Claims need a score strictly above this.
  double claim_threshold = 0.0;
  matching::Combiner combiner;
  double tau = 0.5;

  /// Throws Error(InvalidArgument) or Error(BadK).
  void validate() const;
  Json to_json() const;
  static PipelinePolicy from_json(const Json& j);
  Digest digest() const { return canonical_digest(to_json()); }

  bool operator==(const PipelinePolicy&) const = default;
};

} // namespace ler::protocol

#endif // LER_POLICY_HPP
