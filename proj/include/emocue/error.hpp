#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace emocue {

enum class Errc {
  FileNotFound,
  Io,
  InvalidArgument,
  InvalidUtf8,
  ParseError,
  DuplicateGlyph,
  InvalidChance,
  MultiGrapheme,
  SchemaViolation,
  InsufficientPosts,
  EmptySelection,
  MissingBody,
  MissingPrediction,
  InsufficientExemplars,
  EmptyExemplars,
  LengthMismatch,
  EmptyInput,
  EmptyText,
  ZeroVariance,
  EmbedderFailure,
  DegenerateDistribution,
  MisalignedIds,
  Timeout,
  HttpError,
  RetriesExhausted,
  Unparseable,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library. `line` is set for errors tied to a
/// position in an input file (1-based).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  /// The message without the code and line decoration.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::optional<std::size_t> line_;
  std::string detail_;
};

}  // namespace emocue
