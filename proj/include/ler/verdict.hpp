#ifndef LER_VERDICT_HPP
#define LER_VERDICT_HPP

#include <string>
#include <string_view>

namespace ler {

/// Outcome of a verification. Every failed check has its own reason.
enum class Reason {
  Accept,
  Malformed,
  BadIssuerSig,
  DigestMismatch,
  BadHolderSig,
  BadNonce,
  BadStatusSig,
  StaleStatus,
  Revoked,
  Expired,
  BadAttestation,
  StaleAttestation,
  MeasurementNotAllowlisted,
  PolicyMismatch,
};

std::string_view to_string(Reason reason) noexcept;
/// Inverse of to_string; returns Reason::Malformed for unknown text.
Reason reason_from_string(std::string_view text) noexcept;

struct Verdict {
  Reason reason = Reason::Accept;
  std::string detail;

  bool accepted() const noexcept { return reason == Reason::Accept; }
  static Verdict accept() { return {}; }
  static Verdict reject(Reason r, std::string detail = {}) { return {r, std::move(detail)}; }
};

} // namespace ler

#endif // LER_VERDICT_HPP
