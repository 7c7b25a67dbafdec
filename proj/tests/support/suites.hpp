#ifndef LER_TESTS_SUITES_HPP
#define LER_TESTS_SUITES_HPP

#include "world.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace ler::testing {

/// Outcome of a suite: counters plus one line per violated expectation.
struct SuiteReport {
  std::size_t trials = 0;
  std::size_t rejected = 0;
  std::size_t unparsable = 0;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
  void fail(std::string what) { failures.push_back(std::move(what)); }
};

/// A world with an institutional and a derived credential, both fully disclosable.
struct Fixture {
  World w;
  std::string inst_id;
  std::string derived_id;

  explicit Fixture(const std::string& seed);
};

/// 10^4 single-field mutations: presentations (outsider and re-signing holder),
/// delivered credentials, attestation evidence. Each must be rejected with the
/// reason its field maps to.
SuiteReport run_forgery_suite(std::uint64_t seed);

inline constexpr std::size_t kMinWindow = 8;
inline constexpr std::size_t kMaxWindow = 64;

std::vector<std::string> raw_inputs(const World& w);
/// Input windows of `len` bytes that occur in `output`.
std::set<std::string> leaked_windows(const std::vector<std::string>& inputs, const std::string& output,
                                     std::size_t len);

/// No input window of 8..64 bytes in the credential, evidence, status list,
/// presentation or decision/score release.
SuiteReport run_window_scan();
/// In a full release every atom sharing a window with the inputs is a public
/// skill name or job id.
SuiteReport run_full_release_scan();
/// Two inputs that derive the same claims differ only in digest-bound fields.
SuiteReport run_indistinguishability();
/// Sealed session blobs carry no input window and fail under a foreign enclave key.
SuiteReport run_sealing_check();

} // namespace ler::testing

#endif
