#ifndef LER_ERROR_HPP
#define LER_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace ler {

/// Error categories raised by operations across the toolkit.
enum class Errc {
  InvalidArgument,
  ParseError,
  IoError,
  // identity
  InvalidKey,
  NotFound,
  SigningError,
  StaleVersion,
  // credential
  MissingProvenance,
  EmptyClaims,
  Expired,
  EmptyDisclosure,
  PolicyViolation,
  BadListSig,
  Unauthorized,
  NotDerivative,
  // enclave
  BadSalt,
  SessionNotReady,
  EmptyTaxonomy,
  NoEvidence,
  UnsealFailed,
  ConfidentialityViolation,
  BadCredential,
  // skills
  UnknownWeightKey,
  BadK,
  ProviderUnavailable,
  // matching
  EmptyRequirement,
  NoCandidateSkills,
  UnverifiedInput,
  // protocol
  SessionState,
  Rejected,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  explicit Error(Errc code) : std::runtime_error(std::string(to_string(code))), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

} // namespace ler

#endif // LER_ERROR_HPP
