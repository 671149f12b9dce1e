#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace mathdef {

/// Process exit codes shared by every CLI subcommand.
enum class ExitCode : int {
    ok = 0,
    usage = 1,
    data = 2,
    internal = 3,
};

/// Bad input: malformed text, schema violations, contract breaches by the caller.
/// When the problem has a position in some text, `offset()` carries the byte offset.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what, std::optional<std::size_t> offset = std::nullopt)
        : std::runtime_error(offset ? what + " at byte " + std::to_string(*offset) : what),
          offset_(offset) {}

    std::optional<std::size_t> offset() const noexcept { return offset_; }

    /// Same error, message prefixed with `context: `.
    DataError with_context(const std::string& context) const {
        DataError e(context + ": " + what());
        e.offset_ = offset_;
        return e;
    }

private:
    std::optional<std::size_t> offset_;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A postcondition we guarantee did not hold. Always a bug in this library.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace mathdef
