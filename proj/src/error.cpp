#include "emocue/error.hpp"

namespace emocue {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::Io: return "Io";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidUtf8: return "InvalidUtf8";
    case Errc::ParseError: return "ParseError";
    case Errc::DuplicateGlyph: return "DuplicateGlyph";
    case Errc::InvalidChance: return "InvalidChance";
    case Errc::MultiGrapheme: return "MultiGrapheme";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::InsufficientPosts: return "InsufficientPosts";
    case Errc::EmptySelection: return "EmptySelection";
    case Errc::MissingBody: return "MissingBody";
    case Errc::MissingPrediction: return "MissingPrediction";
    case Errc::InsufficientExemplars: return "InsufficientExemplars";
    case Errc::EmptyExemplars: return "EmptyExemplars";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::EmptyText: return "EmptyText";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::EmbedderFailure: return "EmbedderFailure";
    case Errc::DegenerateDistribution: return "DegenerateDistribution";
    case Errc::MisalignedIds: return "MisalignedIds";
    case Errc::Timeout: return "Timeout";
    case Errc::HttpError: return "HttpError";
    case Errc::RetriesExhausted: return "RetriesExhausted";
    case Errc::Unparseable: return "Unparseable";
  }
  return "Unknown";
}

namespace {

std::string decorate(Errc code, const std::string& message,
                     std::optional<std::size_t> line) {
  std::string out(to_string(code));
  if (line) out += " (line " + std::to_string(*line) + ")";
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(Errc code, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(decorate(code, message, line)),
      code_(code),
      line_(line),
      detail_(message) {}

}  // namespace emocue
