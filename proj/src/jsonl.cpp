#include "mathdef/jsonl.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "mathdef/error.hpp"
#include "mathdef/utf8.hpp"

namespace mathdef::jsonl {

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<json> parse(std::string_view text, const std::string& source) {
    if (auto bad = utf8::first_invalid(text)) {
        throw DataError(source + ": invalid UTF-8", *bad);
    }
    std::vector<json> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        json row = json::parse(line.begin(), line.end(), nullptr, false);
        if (row.is_discarded() || !row.is_object()) {
            throw DataError(source + ":" + std::to_string(line_no) + ": not a JSON object");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<json> read_file(const std::filesystem::path& path) {
    return parse(read_text(path), path.string());
}

std::string serialize(const std::vector<json>& rows) {
    std::string out;
    for (const auto& row : rows) {
        out += row.dump();
        out += '\n';
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw DataError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw DataError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

std::string require_string(const json& row, const char* key, const std::string& where) {
    auto it = row.find(key);
    if (it == row.end() || !it->is_string()) {
        throw DataError(where + ": missing string field \"" + key + "\"");
    }
    return it->get<std::string>();
}

long long require_int(const json& row, const char* key, const std::string& where) {
    auto it = row.find(key);
    if (it == row.end() || !it->is_number_integer()) {
        throw DataError(where + ": missing integer field \"" + key + "\"");
    }
    return it->get<long long>();
}

double require_number(const json& row, const char* key, const std::string& where) {
    auto it = row.find(key);
    if (it == row.end() || !it->is_number()) {
        throw DataError(where + ": missing numeric field \"" + key + "\"");
    }
    return it->get<double>();
}

}  // namespace mathdef::jsonl
