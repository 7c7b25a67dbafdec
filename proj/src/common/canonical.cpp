#include "ler/canonical.hpp"

#include "ler/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace ler {

namespace {

void reject_non_finite(const Json& value) {
  switch (value.type()) {
  case Json::value_t::number_float:
    if (!std::isfinite(value.get<double>())) {
      throw Error(Errc::InvalidArgument, "non-finite number in protocol object");
    }
    break;
  case Json::value_t::object:
  case Json::value_t::array:
    for (const auto& item : value) reject_non_finite(item);
    break;
  default:
    break;
  }
}

} // namespace

std::string canonical_serialize(const Json& value) {
  reject_non_finite(value);
  try {
    return value.dump(-1, ' ', false, Json::error_handler_t::strict);
  } catch (const Json::exception& e) {
    throw Error(Errc::InvalidArgument, e.what());
  }
}

Digest canonical_digest(const Json& value) { return sha256(canonical_serialize(value)); }

Json parse_document(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(Errc::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::IoError, "rename to " + path.string() + ": " + ec.message());
}

Json read_document(const std::filesystem::path& path) { return parse_document(read_text_file(path)); }

void write_document_atomic(const std::filesystem::path& path, const Json& value) {
  write_text_file_atomic(path, canonical_serialize(value));
}

const Json& require(const Json& obj, std::string_view key) {
  if (!obj.is_object()) throw Error(Errc::ParseError, "expected object");
  auto it = obj.find(std::string(key));
  if (it == obj.end()) throw Error(Errc::ParseError, "missing field '" + std::string(key) + "'");
  return *it;
}

std::string require_string(const Json& obj, std::string_view key) {
  const Json& v = require(obj, key);
  if (!v.is_string()) throw Error(Errc::ParseError, "field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

std::int64_t require_int(const Json& obj, std::string_view key) {
  const Json& v = require(obj, key);
  if (!v.is_number_integer()) throw Error(Errc::ParseError, "field '" + std::string(key) + "' must be an integer");
  return v.get<std::int64_t>();
}

double require_number(const Json& obj, std::string_view key) {
  const Json& v = require(obj, key);
  if (!v.is_number()) throw Error(Errc::ParseError, "field '" + std::string(key) + "' must be a number");
  return v.get<double>();
}

Bytes require_hex(const Json& obj, std::string_view key) { return from_hex(require_string(obj, key)); }

Digest require_digest(const Json& obj, std::string_view key) {
  return digest_from_hex(require_string(obj, key));
}

} // namespace ler
