#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace synchro80
{
/**
 * Interpolation modes. A command reaches its target immediately (Direct),
 * over a span of logical time (Duration), at a constant rate (Speed), or
 * over a number of backend iterations (Iteration).
 */
namespace mode
{
struct Direct
{
    bool operator==(const Direct &) const = default;
};

struct Duration
{
    std::uint64_t duration_us;
    bool operator==(const Duration &) const = default;
};

/// state units per second of logical time
struct Speed
{
    double speed;
    bool operator==(const Speed &) const = default;
};

struct Iteration
{
    std::uint64_t count;
    bool operator==(const Iteration &) const = default;
};
}  // namespace mode

using InterpolationMode =
    std::variant<mode::Direct, mode::Duration, mode::Speed, mode::Iteration>;

enum class QueuePolicy : std::uint8_t
{
    APPEND = 0,
    OVERWRITE = 1
};

enum class SyncMode : std::uint8_t
{
    NORMAL = 0,
    BURSTING = 1
};

enum class Status : std::uint8_t
{
    INITIALIZING = 0,
    RUNNING = 1,
    STOPPED = 2
};

struct QueueTicket
{
    std::uint32_t dof = 0;
    std::uint64_t position = 0;
    bool operator==(const QueueTicket &) const = default;
};

struct Command
{
    std::uint32_t dof = 0;
    double target = 0.0;
    InterpolationMode mode = mode::Direct{};
    QueuePolicy policy = QueuePolicy::APPEND;
    // assigned by the transport when the command is pushed
    std::uint64_t position = 0;

    bool operator==(const Command &) const = default;
};

struct Observation
{
    std::uint64_t iteration = 0;
    std::int64_t timestamp_ns = 0;
    std::int64_t logical_time_ns = 0;
    std::int64_t measured_period_ns = 0;
    std::vector<double> observed;
    std::vector<double> desired;
    std::vector<std::uint8_t> payload;

    bool operator==(const Observation &) const = default;
};

struct BackendConfig
{
    std::string segment_id;
    std::uint32_t ndof = 1;
    double frequency_hz = 500.0;
    SyncMode mode = SyncMode::NORMAL;
    std::uint32_t history_capacity = 4096;
    std::uint32_t payload_capacity = 0;
    std::uint32_t command_ring_capacity = 1024;

    /// Logical time step, derived from the frequency as stored in the header
    /// (micro-hertz resolution) so that owner and attachers agree.
    std::int64_t nominal_period_ns() const;
    std::uint64_t frequency_uhz() const;
};

/// Throws Error(BadConfig) naming the offending field.
void validate_config(const BackendConfig &config);

/// Throws Error(BadDof | BadTarget | BadMode).
void validate_command(const Command &cmd, std::uint32_t ndof);

bool is_power_of_two(std::uint64_t value);

const char *to_string(SyncMode mode);
const char *to_string(Status status);

}  // namespace synchro80
