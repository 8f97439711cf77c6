#include <synchro80/core.hpp>
#include <synchro80/errors.hpp>

#include <cmath>

namespace synchro80
{
std::string_view to_string(ErrorCode code)
{
    switch (code)
    {
        case ErrorCode::BadDof:
            return "BadDof";
        case ErrorCode::BadTarget:
            return "BadTarget";
        case ErrorCode::BadMode:
            return "BadMode";
        case ErrorCode::BadConfig:
            return "BadConfig";
        case ErrorCode::TrajectoryTooLong:
            return "TrajectoryTooLong";
        case ErrorCode::AlreadyExists:
            return "AlreadyExists";
        case ErrorCode::ResourceFailure:
            return "ResourceFailure";
        case ErrorCode::NotFound:
            return "NotFound";
        case ErrorCode::VersionMismatch:
            return "VersionMismatch";
        case ErrorCode::CorruptHeader:
            return "CorruptHeader";
        case ErrorCode::RingFull:
            return "RingFull";
        case ErrorCode::NotBurstingMode:
            return "NotBurstingMode";
        case ErrorCode::WaitTimeout:
            return "WaitTimeout";
        case ErrorCode::PeerStopped:
            return "PeerStopped";
        case ErrorCode::Evicted:
            return "Evicted";
        case ErrorCode::NotYet:
            return "NotYet";
        case ErrorCode::NoObservationYet:
            return "NoObservationYet";
        case ErrorCode::DriverFailure:
            return "DriverFailure";
        case ErrorCode::SegmentFailure:
            return "SegmentFailure";
        case ErrorCode::FileNotFound:
            return "FileNotFound";
        case ErrorCode::FormatError:
            return "FormatError";
    }
    return "Unknown";
}

bool is_power_of_two(std::uint64_t value)
{
    return value != 0 && (value & (value - 1)) == 0;
}

std::uint64_t BackendConfig::frequency_uhz() const
{
    return static_cast<std::uint64_t>(std::llround(frequency_hz * 1e6));
}

std::int64_t BackendConfig::nominal_period_ns() const
{
    // 1e15 ns·µHz per cycle
    return static_cast<std::int64_t>(
        std::llround(1e15 / static_cast<double>(frequency_uhz())));
}

void validate_config(const BackendConfig &config)
{
    const auto &id = config.segment_id;
    if (id.empty() || id.size() > 64)
    {
        throw Error(ErrorCode::BadConfig,
                    "segment_id must have 1 to 64 characters");
    }
    for (char c : id)
    {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                  (c >= '0' && c <= '9') || c == '_' || c == '-';
        if (!ok)
        {
            throw Error(ErrorCode::BadConfig,
                        "segment_id contains invalid character '" +
                            std::string(1, c) + "'");
        }
    }
    if (config.ndof == 0)
    {
        throw Error(ErrorCode::BadConfig, "ndof must be positive");
    }
    if (!std::isfinite(config.frequency_hz) || config.frequency_hz <= 0.0 ||
        config.frequency_uhz() == 0)
    {
        throw Error(ErrorCode::BadConfig, "frequency_hz must be positive");
    }
    if (!is_power_of_two(config.history_capacity))
    {
        throw Error(ErrorCode::BadConfig,
                    "history_capacity must be a power of two");
    }
    if (!is_power_of_two(config.command_ring_capacity))
    {
        throw Error(ErrorCode::BadConfig,
                    "command_ring_capacity must be a power of two");
    }
}

namespace
{
struct ModeCheck
{
    bool operator()(const mode::Direct &) const
    {
        return true;
    }
    bool operator()(const mode::Duration &m) const
    {
        return m.duration_us >= 1;
    }
    bool operator()(const mode::Speed &m) const
    {
        return std::isfinite(m.speed) && m.speed > 0.0;
    }
    bool operator()(const mode::Iteration &m) const
    {
        return m.count >= 1;
    }
};
}  // namespace

void validate_command(const Command &cmd, std::uint32_t ndof)
{
    if (cmd.dof >= ndof)
    {
        throw Error(ErrorCode::BadDof, "dof " + std::to_string(cmd.dof) +
                                           " out of range (ndof " +
                                           std::to_string(ndof) + ")");
    }
    if (!std::isfinite(cmd.target))
    {
        throw Error(ErrorCode::BadTarget, "target is not finite");
    }
    if (!std::visit(ModeCheck{}, cmd.mode))
    {
        throw Error(ErrorCode::BadMode, "interpolation parameter out of range");
    }
    if (cmd.policy != QueuePolicy::APPEND &&
        cmd.policy != QueuePolicy::OVERWRITE)
    {
        throw Error(ErrorCode::BadMode, "unknown queue policy");
    }
}

const char *to_string(SyncMode mode)
{
    return mode == SyncMode::BURSTING ? "bursting" : "normal";
}

const char *to_string(Status status)
{
    switch (status)
    {
        case Status::INITIALIZING:
            return "INITIALIZING";
        case Status::RUNNING:
            return "RUNNING";
        case Status::STOPPED:
            return "STOPPED";
    }
    return "UNKNOWN";
}

}  // namespace synchro80
