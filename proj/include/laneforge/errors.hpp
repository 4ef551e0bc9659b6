#pragma once

#include <stdexcept>
#include <string>

namespace laneforge {

// Base for every failure raised by the library. `name()` is the stable error
// identifier that the CLI prints on runtime failures.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& message)
      : std::runtime_error(name + ": " + message), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

#define LANEFORGE_DEFINE_ERROR(Type)                                 \
  class Type : public Error {                                        \
   public:                                                           \
    explicit Type(const std::string& message) : Error(#Type, message) {} \
  }

// sim
LANEFORGE_DEFINE_ERROR(ParseError);
LANEFORGE_DEFINE_ERROR(DisconnectedTrack);
LANEFORGE_DEFINE_ERROR(SteppedAfterDone);
LANEFORGE_DEFINE_ERROR(InvalidRange);
LANEFORGE_DEFINE_ERROR(NoMapsRegistered);
// render
LANEFORGE_DEFINE_ERROR(DimensionMismatch);
// expert
LANEFORGE_DEFINE_ERROR(OffRoad);
// nn
LANEFORGE_DEFINE_ERROR(NonFiniteActivation);
LANEFORGE_DEFINE_ERROR(NonFiniteGradient);
LANEFORGE_DEFINE_ERROR(ShapeMismatch);
LANEFORGE_DEFINE_ERROR(IoError);
LANEFORGE_DEFINE_ERROR(VersionMismatch);
LANEFORGE_DEFINE_ERROR(ChecksumMismatch);
// il
LANEFORGE_DEFINE_ERROR(ExpertFailure);
LANEFORGE_DEFINE_ERROR(TooFewRecords);
LANEFORGE_DEFINE_ERROR(BufferUnderflow);
// eval
LANEFORGE_DEFINE_ERROR(EmptyLog);
// app
LANEFORGE_DEFINE_ERROR(ConfigError);

#undef LANEFORGE_DEFINE_ERROR

}  // namespace laneforge
