#pragma once

#include <stdexcept>
#include <string>

namespace lfd {

/// Base class for every error raised by the toolkit. The concrete type name
/// doubles as the machine-readable error code emitted by the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string type, const std::string& message)
      : std::runtime_error(message), type_(std::move(type)) {}
  const std::string& type() const { return type_; }

 private:
  std::string type_;
};

#define LFD_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

LFD_DEFINE_ERROR(InvalidArgument);
LFD_DEFINE_ERROR(DegenerateGeometry);
LFD_DEFINE_ERROR(EmptySequence);
LFD_DEFINE_ERROR(InvalidStateSequence);
LFD_DEFINE_ERROR(SingularComponent);
LFD_DEFINE_ERROR(TimestampMismatch);
LFD_DEFINE_ERROR(LengthMismatch);
LFD_DEFINE_ERROR(NonPsdCovariance);
LFD_DEFINE_ERROR(LogHorizonExceeded);
LFD_DEFINE_ERROR(TooFewSamples);
LFD_DEFINE_ERROR(SimDiverged);
LFD_DEFINE_ERROR(EmptyTrace);
LFD_DEFINE_ERROR(IoError);
LFD_DEFINE_ERROR(ConfigError);

#undef LFD_DEFINE_ERROR

}  // namespace lfd
