#pragma once

#include <stdexcept>
#include <string>

namespace citysim {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    /// Stable machine-readable name, e.g. "CycleDetected". Sent verbatim over the wire.
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

#define CITYSIM_DEFINE_ERROR(Name)                                                   \
    class Name : public Error {                                                      \
    public:                                                                          \
        explicit Name(const std::string& what) : Error(#Name, what) {}               \
    }

// popgen
CITYSIM_DEFINE_ERROR(NetFormatError);
CITYSIM_DEFINE_ERROR(CptNotNormalized);
CITYSIM_DEFINE_ERROR(CycleDetected);
CITYSIM_DEFINE_ERROR(MissingCptRow);
CITYSIM_DEFINE_ERROR(UnknownParentId);

// agents / firms / epidemics
CITYSIM_DEFINE_ERROR(DeadPerson);
CITYSIM_DEFINE_ERROR(NotAProducer);
CITYSIM_DEFINE_ERROR(NotSick);

// markets
CITYSIM_DEFINE_ERROR(MarketEmpty);

// government
CITYSIM_DEFINE_ERROR(UnknownSector);

// config
CITYSIM_DEFINE_ERROR(ConfigError);

// engine / distribution
CITYSIM_DEFINE_ERROR(InvariantViolation);
CITYSIM_DEFINE_ERROR(WorkerTimeout);
CITYSIM_DEFINE_ERROR(WorkerLost);
CITYSIM_DEFINE_ERROR(ProtocolVersionMismatch);
CITYSIM_DEFINE_ERROR(ProtocolError);

// api
CITYSIM_DEFINE_ERROR(NoCitizensAvailable);
CITYSIM_DEFINE_ERROR(NotYourTurn);
CITYSIM_DEFINE_ERROR(MalformedLegislation);
CITYSIM_DEFINE_ERROR(BallotClosed);
CITYSIM_DEFINE_ERROR(AlreadyVoted);
CITYSIM_DEFINE_ERROR(UnknownSession);

#undef CITYSIM_DEFINE_ERROR

} // namespace citysim
