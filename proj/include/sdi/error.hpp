#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace sdi {

/// Broad failure class; the CLI maps these onto exit codes 1 and 2.
enum class ErrorKind { validation, computation };

/// Single exception type used across the library. Validation errors may carry
/// the file coordinates of the offending cell.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(message), kind_(kind) {}

  Error(ErrorKind kind, std::string message, std::string file,
        std::optional<std::size_t> row, std::optional<std::size_t> column)
      : std::runtime_error(std::move(message)),
        kind_(kind),
        file_(std::move(file)),
        row_(row),
        column_(column) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& file() const noexcept { return file_; }
  std::optional<std::size_t> row() const noexcept { return row_; }
  std::optional<std::size_t> column() const noexcept { return column_; }

 private:
  ErrorKind kind_;
  std::string file_;
  std::optional<std::size_t> row_;
  std::optional<std::size_t> column_;
};

[[noreturn]] inline void fail_validation(const std::string& message) {
  throw Error(ErrorKind::validation, message);
}

[[noreturn]] inline void fail_computation(const std::string& message) {
  throw Error(ErrorKind::computation, message);
}

}  // namespace sdi
