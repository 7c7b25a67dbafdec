#ifndef LER_GATEWAY_HPP
#define LER_GATEWAY_HPP

#include "ler/protocol.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace ler::gateway {

namespace fs = std::filesystem;

/// Deployment settings. Relative paths resolve against the config file's directory.
struct Config {
  fs::path home;                ///< wallet, enclave identity, status lists
  fs::path registry;            ///< DID documents
  fs::path taxonomy;
  fs::path aliases;             ///< optional; empty when absent
  fs::path allowlist;           ///< hex measurements, one per line
  fs::path trust_anchor;        ///< hex enclave attestation public key
  fs::path jobs;                ///< directory of job requirement documents
  fs::path issuer_key;
  fs::path holder_key;
  fs::path verifier_key;
  std::string institutional_status_locator = "status/institutional";
  std::string derivative_status_locator = "status/derivative";
  Seconds freshness = protocol::kDefaultFreshness;
  double tau = 0.5;
  std::size_t top_k = 10;
  skills::WeightConfig weights = skills::WeightConfig::defaults();
  std::string bind_host = "127.0.0.1";
  int bind_port = 8700;

  /// Layout under one home directory, with the sample taxonomy.
  static Config defaults(const fs::path& home);
  /// Throws Error(InvalidArgument) on bad bounds, Error(NotFound) for missing paths.
  void validate() const;

  Json to_json() const;
  static Config from_json(const Json& j, const fs::path& base_dir);
  static Config load(const fs::path& path);
  /// $LER_CONFIG when set, else `fallback`.
  static std::optional<fs::path> locate(const std::optional<fs::path>& fallback);

  protocol::PipelinePolicy pipeline_policy(const skills::SkillTaxonomy& taxonomy,
                                           const skills::EmbeddingProvider& provider) const;
};

/// Measurements listed in an allowlist file (hex, one per line, '#' comments).
enclave::MeasurementAllowlist load_allowlist(const fs::path& path);

/// One syllabus per regular file; the course id is the file stem.
std::vector<skills::SyllabusDocument> load_syllabi(const fs::path& dir);
/// Every *.json job requirement in `dir`, by job id.
std::map<std::string, matching::JobRequirement> load_jobs(const fs::path& dir);

/// Reference enclave build: the bundle measured into m_e.
enclave::ModelBundle reference_bundle(const skills::EmbeddingProvider& provider);
/// Verifier-side enclave build; differs from the derivation enclave's measurement.
enclave::ModelBundle verifier_bundle(const skills::EmbeddingProvider& provider);

/// Wallet persisted as one canonical document, replaced atomically.
class WalletStore {
public:
  explicit WalletStore(fs::path path) : path_(std::move(path)) {}

  const fs::path& path() const noexcept { return path_; }
  bool exists() const { return fs::exists(path_); }
  /// Empty wallet when the file does not exist yet.
  protocol::Wallet load() const;
  void save(const protocol::Wallet& wallet) const;

private:
  fs::path path_;
  mutable std::mutex mutex_;
};

struct HttpResult {
  int status = 200;
  Json body;
};

/// Request handling shared by the three roles. handle() never throws: malformed
/// input yields a 4xx result with a reason.
class Service {
public:
  virtual ~Service();

  HttpResult handle(const std::string& method, const std::string& path, const std::string& body);

  /// Binds and serves on a background thread; returns the bound port
  /// (an ephemeral one when `port` is 0). Throws Error(IoError) on bind failure.
  int start(const std::string& host, int port);
  void stop();

protected:
  virtual HttpResult route(const std::string& method, const std::string& path, const Json& body) = 0;

private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

class IssuerService final : public Service {
public:
  IssuerService(protocol::Issuer& issuer, identity::DidRegistry& registry,
                std::optional<fs::path> status_file = std::nullopt);

protected:
  HttpResult route(const std::string& method, const std::string& path, const Json& body) override;

private:
  protocol::Issuer& issuer_;
  identity::DidRegistry& registry_;
  std::optional<fs::path> status_file_;
  std::mutex mutex_;
};

class VerifierService final : public Service {
public:
  VerifierService(protocol::Verifier& verifier, const identity::DidRegistry& registry,
                  std::map<std::string, matching::JobRequirement> jobs, const skills::SkillTaxonomy& taxonomy,
                  matching::AliasTable aliases, protocol::Release release = protocol::Release::DecisionOnly);

protected:
  HttpResult route(const std::string& method, const std::string& path, const Json& body) override;

private:
  protocol::Verifier& verifier_;
  const identity::DidRegistry& registry_;
  std::map<std::string, matching::JobRequirement> jobs_;
  const skills::SkillTaxonomy& taxonomy_;
  matching::AliasTable aliases_;
  protocol::Release release_;
  std::map<std::string, std::string> session_jobs_;
  std::mutex mutex_;
};

/// Backs the wallet console: pending requests, approve/deny, inventory.
class HolderService final : public Service {
public:
  /// With `wallet_path`, every mutation is persisted there.
  HolderService(protocol::Holder& holder, enclave::Enclave* enclave, std::optional<fs::path> wallet_path,
                std::shared_ptr<Clock> clock);

  /// Fresh issuer status for a credential the holder does not staple itself.
  using StatusSource = std::function<credential::StatusSnippet(const std::string& credential_id)>;
  void set_status_source(StatusSource source);

protected:
  HttpResult route(const std::string& method, const std::string& path, const Json& body) override;

private:
  void persist();

  protocol::Holder& holder_;
  enclave::Enclave* enclave_;
  std::unique_ptr<WalletStore> store_;
  std::shared_ptr<Clock> clock_;
  StatusSource status_source_;
  std::mutex mutex_;
};

/// Entry point of the `ler` tool. Returns the process exit code:
/// 0 success, 1 operational error, 2 usage error.
int run_cli(int argc, char** argv);

} // namespace ler::gateway

#endif // LER_GATEWAY_HPP
