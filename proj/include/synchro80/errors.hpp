#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace synchro80
{
enum class ErrorCode
{
    BadDof,
    BadTarget,
    BadMode,
    BadConfig,
    TrajectoryTooLong,
    AlreadyExists,
    ResourceFailure,
    NotFound,
    VersionMismatch,
    CorruptHeader,
    RingFull,
    NotBurstingMode,
    WaitTimeout,
    PeerStopped,
    Evicted,
    NotYet,
    NoObservationYet,
    DriverFailure,
    SegmentFailure,
    FileNotFound,
    FormatError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what),
          code_(code)
    {
    }

    ErrorCode code() const noexcept
    {
        return code_;
    }

private:
    ErrorCode code_;
};

}  // namespace synchro80
