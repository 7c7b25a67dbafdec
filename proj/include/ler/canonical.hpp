#ifndef LER_CANONICAL_HPP
#define LER_CANONICAL_HPP

#include "ler/crypto.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace ler {

using Json = nlohmann::json;

/// Deterministic text form of a protocol object: object keys sorted bytewise,
/// UTF-8, no insignificant whitespace, integers exact, reals as the shortest
/// decimal that round-trips. Non-finite reals are rejected.
std::string canonical_serialize(const Json& value);

Digest canonical_digest(const Json& value);

/// Parses a canonical (or any JSON) document. Throws Error(ParseError).
Json parse_document(std::string_view text);

Json read_document(const std::filesystem::path& path);
/// Writes canonical text via a temporary file and rename.
void write_document_atomic(const std::filesystem::path& path, const Json& value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file_atomic(const std::filesystem::path& path, std::string_view text);

// Typed field accessors that raise ParseError instead of json exceptions.
const Json& require(const Json& obj, std::string_view key);
std::string require_string(const Json& obj, std::string_view key);
std::int64_t require_int(const Json& obj, std::string_view key);
double require_number(const Json& obj, std::string_view key);
Bytes require_hex(const Json& obj, std::string_view key);
Digest require_digest(const Json& obj, std::string_view key);

} // namespace ler

#endif // LER_CANONICAL_HPP
