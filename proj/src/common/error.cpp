#include "ler/error.hpp"

namespace ler {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
  case Errc::InvalidArgument: return "InvalidArgument";
  case Errc::ParseError: return "ParseError";
  case Errc::IoError: return "IoError";
  case Errc::InvalidKey: return "InvalidKey";
  case Errc::NotFound: return "NotFound";
  case Errc::SigningError: return "SigningError";
  case Errc::StaleVersion: return "StaleVersion";
  case Errc::MissingProvenance: return "MissingProvenance";
  case Errc::EmptyClaims: return "EmptyClaims";
  case Errc::Expired: return "Expired";
  case Errc::EmptyDisclosure: return "EmptyDisclosure";
  case Errc::PolicyViolation: return "PolicyViolation";
  case Errc::BadListSig: return "BadListSig";
  case Errc::Unauthorized: return "Unauthorized";
  case Errc::NotDerivative: return "NotDerivative";
  case Errc::BadSalt: return "BadSalt";
  case Errc::SessionNotReady: return "SessionNotReady";
  case Errc::EmptyTaxonomy: return "EmptyTaxonomy";
  case Errc::NoEvidence: return "NoEvidence";
  case Errc::UnsealFailed: return "UnsealFailed";
  case Errc::ConfidentialityViolation: return "ConfidentialityViolation";
  case Errc::BadCredential: return "BadCredential";
  case Errc::UnknownWeightKey: return "UnknownWeightKey";
  case Errc::BadK: return "BadK";
  case Errc::ProviderUnavailable: return "ProviderUnavailable";
  case Errc::EmptyRequirement: return "EmptyRequirement";
  case Errc::NoCandidateSkills: return "NoCandidateSkills";
  case Errc::UnverifiedInput: return "UnverifiedInput";
  case Errc::SessionState: return "SessionState";
  case Errc::Rejected: return "Rejected";
  }
  return "Unknown";
}

} // namespace ler

#include "ler/verdict.hpp"

#include <array>
#include <utility>

namespace ler {

namespace {

constexpr std::array<std::pair<Reason, std::string_view>, 14> kReasonNames{{
    {Reason::Accept, "Accept"},
    {Reason::Malformed, "Malformed"},
    {Reason::BadIssuerSig, "BadIssuerSig"},
    {Reason::DigestMismatch, "DigestMismatch"},
    {Reason::BadHolderSig, "BadHolderSig"},
    {Reason::BadNonce, "BadNonce"},
    {Reason::BadStatusSig, "BadStatusSig"},
    {Reason::StaleStatus, "StaleStatus"},
    {Reason::Revoked, "Revoked"},
    {Reason::Expired, "Expired"},
    {Reason::BadAttestation, "BadAttestation"},
    {Reason::StaleAttestation, "StaleAttestation"},
    {Reason::MeasurementNotAllowlisted, "MeasurementNotAllowlisted"},
    {Reason::PolicyMismatch, "PolicyMismatch"},
}};

} // namespace

std::string_view to_string(Reason reason) noexcept {
  for (const auto& [r, name] : kReasonNames)
    if (r == reason) return name;
  return "Unknown";
}

Reason reason_from_string(std::string_view text) noexcept {
  for (const auto& [r, name] : kReasonNames)
    if (name == text) return r;
  return Reason::Malformed;
}

} // namespace ler
