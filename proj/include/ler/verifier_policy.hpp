#ifndef LER_VERIFIER_POLICY_HPP
#define LER_VERIFIER_POLICY_HPP

#include "ler/attestation.hpp"
#include "ler/canonical.hpp"
#include "ler/clock.hpp"

#include <vector>

namespace ler::protocol {

inline constexpr Seconds kDefaultFreshness = 300;

/// Verifier acceptance rules.
struct VerifierPolicy {
  enclave::MeasurementAllowlist measurement_allowlist;
  Seconds freshness = kDefaultFreshness;  ///< Delta: max age of stapled status
  double tau = 0.5;
  Digest expected_policy_digest{};
  Seconds nonce_ttl = 600;
  /// Enclave attestation public keys accepted as roots of trust.
  std::vector<Bytes> attestation_roots;
  Seconds attestation_max_age = kDefaultFreshness;

  /// Throws Error(InvalidArgument) unless freshness > 0, tau in [0,1], nonce_ttl > 0.
  void validate() const;

  Json to_json() const;
  static VerifierPolicy from_json(const Json& j);
};

} // namespace ler::protocol

#endif // LER_VERIFIER_POLICY_HPP
