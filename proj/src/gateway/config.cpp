#include "ler/error.hpp"
#include "ler/gateway.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#ifndef LER_DATA_DIR
#define LER_DATA_DIR "data"
#endif

namespace ler::gateway {

Config Config::defaults(const fs::path& home) {
  Config c;
  c.home = home;
  c.registry = home / "registry";
  c.taxonomy = fs::path(LER_DATA_DIR) / "onet_sample.tsv";
  c.aliases = fs::path(LER_DATA_DIR) / "aliases.tsv";
  c.allowlist = home / "allowlist.txt";
  c.trust_anchor = home / "enclave.pub";
  c.jobs = fs::path(LER_DATA_DIR) / "jobs";
  c.issuer_key = home / "keys" / "issuer.json";
  c.holder_key = home / "keys" / "holder.json";
  c.verifier_key = home / "keys" / "verifier.json";
  return c;
}

void Config::validate() const {
  if (freshness <= 0) throw Error(Errc::InvalidArgument, "freshness must be positive");
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(Errc::InvalidArgument, "tau must lie in [0,1]");
  if (top_k < 1) throw Error(Errc::InvalidArgument, "top_k must be at least 1");
  if (bind_port < 0 || bind_port > 65535) throw Error(Errc::InvalidArgument, "bind port out of range");
  weights.validate();
  for (const auto* p : {&home, &registry, &taxonomy, &allowlist, &trust_anchor, &jobs}) {
    if (!fs::exists(*p)) throw Error(Errc::NotFound, "configured path " + p->string() + " does not exist");
  }
  if (!aliases.empty() && !fs::exists(aliases)) throw Error(Errc::NotFound, "aliases " + aliases.string());
}

Json Config::to_json() const {
  return Json{{"aliases", aliases.string()},
              {"allowlist", allowlist.string()},
              {"bind", bind_host + ":" + std::to_string(bind_port)},
              {"derivative_status_locator", derivative_status_locator},
              {"freshness", freshness},
              {"holder_key", holder_key.string()},
              {"home", home.string()},
              {"institutional_status_locator", institutional_status_locator},
              {"issuer_key", issuer_key.string()},
              {"jobs", jobs.string()},
              {"registry", registry.string()},
              {"tau", tau},
              {"taxonomy", taxonomy.string()},
              {"top_k", top_k},
              {"trust_anchor", trust_anchor.string()},
              {"verifier_key", verifier_key.string()},
              {"weights", weights.to_json()}};
}

Config Config::from_json(const Json& j, const fs::path& base_dir) {
  auto path = [&](std::string_view key) {
    fs::path p = require_string(j, key);
    return p.is_absolute() || p.empty() ? p : base_dir / p;
  };
  Config c;
  c.home = path("home");
  c.registry = path("registry");
  c.taxonomy = path("taxonomy");
  c.aliases = j.contains("aliases") ? path("aliases") : fs::path{};
  c.allowlist = path("allowlist");
  c.trust_anchor = path("trust_anchor");
  c.jobs = path("jobs");
  c.issuer_key = path("issuer_key");
  c.holder_key = path("holder_key");
  c.verifier_key = path("verifier_key");
  if (j.contains("institutional_status_locator")) {
    c.institutional_status_locator = require_string(j, "institutional_status_locator");
  }
  if (j.contains("derivative_status_locator")) c.derivative_status_locator = require_string(j, "derivative_status_locator");
  if (j.contains("freshness")) c.freshness = require_int(j, "freshness");
  if (j.contains("tau")) c.tau = require_number(j, "tau");
  if (j.contains("top_k")) {
    const auto k = require_int(j, "top_k");
    if (k < 1) throw Error(Errc::InvalidArgument, "top_k must be at least 1");
    c.top_k = static_cast<std::size_t>(k);
  }
  if (j.contains("weights")) c.weights = skills::WeightConfig::from_json(j.at("weights"));
  if (j.contains("bind")) {
    const std::string bind = require_string(j, "bind");
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos) throw Error(Errc::ParseError, "bind must be host:port");
    c.bind_host = bind.substr(0, colon);
    try {
      c.bind_port = std::stoi(bind.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(Errc::ParseError, "bind port must be numeric");
    }
  }
  return c;
}

Config Config::load(const fs::path& path) {
  Config c = from_json(read_document(path), fs::absolute(path).parent_path());
  c.validate();
  return c;
}

std::optional<fs::path> Config::locate(const std::optional<fs::path>& fallback) {
  if (const char* env = std::getenv("LER_CONFIG"); env != nullptr && *env != '\0') return fs::path(env);
  return fallback;
}

protocol::PipelinePolicy Config::pipeline_policy(const skills::SkillTaxonomy& taxonomy,
                                                 const skills::EmbeddingProvider& provider) const {
  protocol::PipelinePolicy p;
  p.taxonomy_ref = taxonomy.ref();
  p.embedding_id = provider.id();
  p.top_k = top_k;
  p.weights = weights;
  p.tau = tau;
  p.validate();
  return p;
}

enclave::MeasurementAllowlist load_allowlist(const fs::path& path) {
  enclave::MeasurementAllowlist out;
  std::istringstream in(read_text_file(path));
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    out.insert(enclave::EnclaveMeasurement::from_hex(line.substr(b, e - b + 1)));
  }
  return out;
}

std::vector<skills::SyllabusDocument> load_syllabi(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::NotFound, "syllabus directory " + dir.string());
  std::vector<skills::SyllabusDocument> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    out.push_back({entry.path().stem().string(), read_text_file(entry.path())});
  }
  std::ranges::sort(out, {}, &skills::SyllabusDocument::course_id);
  return out;
}

std::map<std::string, matching::JobRequirement> load_jobs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::NotFound, "jobs directory " + dir.string());
  std::map<std::string, matching::JobRequirement> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    auto job = matching::JobRequirement::from_json(read_document(entry.path()));
    out.emplace(job.job_id, std::move(job));
  }
  return out;
}

enclave::ModelBundle reference_bundle(const skills::EmbeddingProvider& provider) {
  return {"ler-derivation-enclave", to_bytes(provider.id()), "1.0.0"};
}

enclave::ModelBundle verifier_bundle(const skills::EmbeddingProvider& provider) {
  return {"ler-verifier-enclave", to_bytes(provider.id()), "1.0.0"};
}

} // namespace ler::gateway
