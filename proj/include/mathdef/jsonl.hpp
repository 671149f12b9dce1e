#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mathdef::jsonl {

using json = nlohmann::json;

/// Parses every non-blank line of a JSONL file as an object. Throws DataError
/// naming the file and 1-based line on malformed input or invalid UTF-8.
std::vector<json> read_file(const std::filesystem::path& path);
std::vector<json> parse(std::string_view text, const std::string& source = "<memory>");

/// One compact object per line, "\n" terminated.
std::string serialize(const std::vector<json>& rows);

/// Writes via a sibling temp file and rename, so readers never observe a
/// partially written output.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_text(const std::filesystem::path& path);

// Field accessors that turn nlohmann's type errors into schema DataErrors.
std::string require_string(const json& row, const char* key, const std::string& where);
long long require_int(const json& row, const char* key, const std::string& where);
double require_number(const json& row, const char* key, const std::string& where);

}  // namespace mathdef::jsonl
