#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mathdef {

/// Flat key-value configuration.
///
/// Format, one entry per line:
///
///     # comment
///     key = value
///     strip.unwrap = textbf, textit, emph
///
/// Keys are trimmed and case-sensitive. Blank lines and lines whose first
/// non-blank character is `#` are ignored. A later duplicate key overrides an
/// earlier one. List-valued keys are comma separated.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig parse(std::string_view text);
    static KeyValueConfig load(const std::filesystem::path& path);

    std::optional<std::string> get(const std::string& key) const;
    std::optional<std::vector<std::string>> get_list(const std::string& key) const;
    bool contains(const std::string& key) const { return values_.count(key) != 0; }

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace mathdef
