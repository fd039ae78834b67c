#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uti {

/// Error categories surfaced by the library. The CLI prints the category name
/// as the first token of its one-line failure message.
enum class ErrorCategory {
  format,      // bad magic, unsupported version, malformed header
  corruption,  // truncated or inconsistent payload
  pairing,     // audio / ultrasound files disagree
  io,          // filesystem failures
  validation,  // invariant violated before a write
  index,       // out-of-range frame index
  size,        // dimension mismatch or too little data
  contract,    // wrong tag, wrong mode, empty input
  input,       // non-finite input values
  numeric,     // non-finite intermediate values
  training,    // divergence during training
  config,      // bad or missing configuration
};

inline std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::format: return "format";
    case ErrorCategory::corruption: return "corruption";
    case ErrorCategory::pairing: return "pairing";
    case ErrorCategory::io: return "io";
    case ErrorCategory::validation: return "validation";
    case ErrorCategory::index: return "index";
    case ErrorCategory::size: return "size";
    case ErrorCategory::contract: return "contract";
    case ErrorCategory::input: return "input";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::training: return "training";
    case ErrorCategory::config: return "config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define UTI_DEFINE_ERROR(Name, Cat)                                    \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(ErrorCategory::Cat, what) {} \
  };

UTI_DEFINE_ERROR(FormatError, format)
UTI_DEFINE_ERROR(CorruptionError, corruption)
UTI_DEFINE_ERROR(PairingError, pairing)
UTI_DEFINE_ERROR(IoError, io)
UTI_DEFINE_ERROR(ValidationError, validation)
UTI_DEFINE_ERROR(IndexError, index)
UTI_DEFINE_ERROR(SizeError, size)
UTI_DEFINE_ERROR(ContractError, contract)
UTI_DEFINE_ERROR(InputError, input)
UTI_DEFINE_ERROR(NumericError, numeric)
UTI_DEFINE_ERROR(TrainingError, training)
UTI_DEFINE_ERROR(ConfigError, config)

#undef UTI_DEFINE_ERROR

}  // namespace uti
