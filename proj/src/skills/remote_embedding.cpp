#include "ler/canonical.hpp"
#include "ler/embedding.hpp"
#include "ler/error.hpp"

#include <httplib.h>

#include <cmath>

namespace ler::skills {

RemoteEmbedding::RemoteEmbedding(std::string host, int port, std::size_t dimension, std::string path,
                                 int timeout_seconds)
    : host_(std::move(host)), port_(port), dimension_(dimension), path_(std::move(path)),
      timeout_seconds_(timeout_seconds) {
  if (dimension_ == 0) throw Error(Errc::InvalidArgument, "embedding dimension must be positive");
}

std::string RemoteEmbedding::id() const {
  return "remote:" + host_ + ":" + std::to_string(port_) + path_ + ":d" + std::to_string(dimension_);
}

Embedding RemoteEmbedding::embed(std::string_view text) const {
  httplib::Client client(host_, port_);
  client.set_connection_timeout(timeout_seconds_, 0);
  client.set_read_timeout(timeout_seconds_, 0);
  const std::string body = canonical_serialize(Json{{"text", std::string(text)}});
  auto res = client.Post(path_, body, "application/json");
  if (!res) throw Error(Errc::ProviderUnavailable, httplib::to_string(res.error()));
  if (res->status != 200) throw Error(Errc::ProviderUnavailable, "HTTP " + std::to_string(res->status));
  try {
    Json j = Json::parse(res->body);
    Embedding v = j.at("embedding").get<Embedding>();
    if (v.size() != dimension_) throw Error(Errc::ProviderUnavailable, "wrong embedding dimension");
    for (double x : v) {
      if (!std::isfinite(x)) throw Error(Errc::ProviderUnavailable, "non-finite embedding component");
    }
    l2_normalize(v);
    return v;
  } catch (const Json::exception& e) {
    throw Error(Errc::ProviderUnavailable, std::string("malformed response: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::ProviderUnavailable) throw;
    throw Error(Errc::ProviderUnavailable, e.what());
  }
}

} // namespace ler::skills
