#pragma once

#include <synchro80/core.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace synchro80
{
inline constexpr std::array<char, 8> segment_magic = {
    'S', 'Y', 'N', 'C', 'H', '8', '0', '\0'};
inline constexpr std::uint32_t segment_version = 1;
inline constexpr const char *segment_name_prefix = "synchro80.";

/// Fixed byte offsets inside the 128-byte segment header.
namespace header_offset
{
inline constexpr std::size_t magic = 0;
inline constexpr std::size_t version = 8;
inline constexpr std::size_t ndof = 12;
inline constexpr std::size_t frequency_uhz = 16;
inline constexpr std::size_t mode = 24;
inline constexpr std::size_t status = 25;
inline constexpr std::size_t history_capacity = 28;
inline constexpr std::size_t payload_capacity = 32;
inline constexpr std::size_t command_ring_capacity = 36;
inline constexpr std::size_t iteration = 40;
inline constexpr std::size_t burst_requested = 48;
inline constexpr std::size_t burst_completed = 56;
inline constexpr std::size_t producer_exclusion_word = 64;
inline constexpr std::size_t owner_pid = 68;
inline constexpr std::size_t ring_head = 72;
inline constexpr std::size_t ring_tail = 80;
inline constexpr std::size_t segment_bytes = 88;
inline constexpr std::size_t size = 128;
}  // namespace header_offset

/// Offsets inside one 48-byte command ring slot.
namespace command_offset
{
inline constexpr std::size_t seq = 0;
inline constexpr std::size_t dof = 8;
inline constexpr std::size_t policy = 12;
inline constexpr std::size_t mode_tag = 13;
inline constexpr std::size_t pad = 14;
inline constexpr std::size_t mode_param = 16;
inline constexpr std::size_t target = 24;
inline constexpr std::size_t position = 32;
inline constexpr std::size_t reserved = 40;
inline constexpr std::size_t slot_size = 48;
inline constexpr std::size_t payload_size = slot_size - dof;
}  // namespace command_offset

enum class ModeTag : std::uint8_t
{
    Direct = 0,
    Duration = 1,
    Speed = 2,
    Iteration = 3
};

using CommandBytes = std::array<std::byte, command_offset::payload_size>;

/// Wire form of a command: the 40 bytes of a ring slot following `seq`.
CommandBytes encode_command(const Command &cmd);
/// Throws Error(FormatError) on an unknown mode tag or policy.
Command decode_command(std::span<const std::byte, command_offset::payload_size> bytes);

/// Byte layout of a whole segment. A pure function of the config.
struct SegmentLayout
{
    std::uint32_t ndof = 0;
    std::uint32_t history_capacity = 0;
    std::uint32_t payload_capacity = 0;
    std::uint32_t command_ring_capacity = 0;

    std::size_t enqueue_counts = 0;
    std::size_t completed_counts = 0;
    std::size_t command_ring = 0;
    std::size_t observations = 0;
    std::size_t observation_slot_size = 0;
    std::size_t total_size = 0;

    // relative to the start of an observation slot
    std::size_t obs_seq_pre = 0;
    std::size_t obs_iteration = 0;
    std::size_t obs_timestamp = 0;
    std::size_t obs_logical_time = 0;
    std::size_t obs_measured_period = 0;
    std::size_t obs_desired = 0;
    std::size_t obs_observed = 0;
    std::size_t obs_payload = 0;
    std::size_t obs_seq_post = 0;

    std::size_t command_slot(std::uint64_t index) const
    {
        return command_ring + (index & (command_ring_capacity - 1)) *
                                  command_offset::slot_size;
    }
    std::size_t observation_slot(std::uint64_t iteration) const
    {
        return observations +
               (iteration & (history_capacity - 1)) * observation_slot_size;
    }

    static SegmentLayout compute(const BackendConfig &config);

    /// name/offset/size rows for every field, in address order
    struct Row
    {
        std::string name;
        std::size_t offset;
        std::size_t size;
    };
    std::vector<Row> offset_table() const;
};

std::string format_offset_table(const BackendConfig &config);

}  // namespace synchro80
