#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

namespace mathdef::utf8 {

/// Byte offset of the first byte that does not start a well-formed UTF-8
/// sequence, or nullopt when the whole input is valid. Overlongs, surrogates
/// and code points above U+10FFFF are rejected.
std::optional<std::size_t> first_invalid(std::string_view bytes) noexcept;

inline bool is_valid(std::string_view bytes) noexcept { return !first_invalid(bytes); }

/// Number of code points. Assumes valid input.
std::size_t code_points(std::string_view s) noexcept;

}  // namespace mathdef::utf8
