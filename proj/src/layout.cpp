#include <synchro80/errors.hpp>
#include <synchro80/layout.hpp>

#include <bit>
#include <cstring>
#include <sstream>
#include <type_traits>

static_assert(std::endian::native == std::endian::little,
              "the segment encoding is little-endian; big-endian hosts are "
              "not supported");

namespace synchro80
{
namespace
{
template <typename T>
void put(CommandBytes &out, std::size_t slot_offset, T value)
{
    std::memcpy(out.data() + slot_offset - command_offset::dof, &value,
                sizeof(T));
}

template <typename T>
T get(std::span<const std::byte, command_offset::payload_size> in,
      std::size_t slot_offset)
{
    T value;
    std::memcpy(&value, in.data() + slot_offset - command_offset::dof,
                sizeof(T));
    return value;
}

std::size_t round_up8(std::size_t n)
{
    return (n + 7) & ~std::size_t{7};
}
}  // namespace

CommandBytes encode_command(const Command &cmd)
{
    CommandBytes out{};
    auto [tag, param] = std::visit(
        [](const auto &m) -> std::pair<ModeTag, std::uint64_t> {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, mode::Direct>)
                return {ModeTag::Direct, 0};
            else if constexpr (std::is_same_v<M, mode::Duration>)
                return {ModeTag::Duration, m.duration_us};
            else if constexpr (std::is_same_v<M, mode::Speed>)
                return {ModeTag::Speed, std::bit_cast<std::uint64_t>(m.speed)};
            else
                return {ModeTag::Iteration, m.count};
        },
        cmd.mode);
    put<std::uint32_t>(out, command_offset::dof, cmd.dof);
    put<std::uint8_t>(out, command_offset::policy,
                      static_cast<std::uint8_t>(cmd.policy));
    put<std::uint8_t>(out, command_offset::mode_tag,
                      static_cast<std::uint8_t>(tag));
    put<std::uint64_t>(out, command_offset::mode_param, param);
    put<double>(out, command_offset::target, cmd.target);
    put<std::uint64_t>(out, command_offset::position, cmd.position);
    return out;
}

Command decode_command(
    std::span<const std::byte, command_offset::payload_size> bytes)
{
    Command cmd;
    cmd.dof = get<std::uint32_t>(bytes, command_offset::dof);
    const auto policy = get<std::uint8_t>(bytes, command_offset::policy);
    if (policy > 1)
    {
        throw Error(ErrorCode::FormatError, "unknown queue policy byte");
    }
    cmd.policy = static_cast<QueuePolicy>(policy);
    const auto param = get<std::uint64_t>(bytes, command_offset::mode_param);
    switch (static_cast<ModeTag>(get<std::uint8_t>(bytes, command_offset::mode_tag)))
    {
        case ModeTag::Direct:
            cmd.mode = mode::Direct{};
            break;
        case ModeTag::Duration:
            cmd.mode = mode::Duration{param};
            break;
        case ModeTag::Speed:
            cmd.mode = mode::Speed{std::bit_cast<double>(param)};
            break;
        case ModeTag::Iteration:
            cmd.mode = mode::Iteration{param};
            break;
        default:
            throw Error(ErrorCode::FormatError, "unknown mode tag");
    }
    cmd.target = get<double>(bytes, command_offset::target);
    cmd.position = get<std::uint64_t>(bytes, command_offset::position);
    return cmd;
}

SegmentLayout SegmentLayout::compute(const BackendConfig &config)
{
    SegmentLayout l;
    l.ndof = config.ndof;
    l.history_capacity = config.history_capacity;
    l.payload_capacity = config.payload_capacity;
    l.command_ring_capacity = config.command_ring_capacity;

    l.enqueue_counts = header_offset::size;
    l.completed_counts = l.enqueue_counts + 8 * std::size_t{l.ndof};
    l.command_ring = l.completed_counts + 8 * std::size_t{l.ndof};
    l.observations = l.command_ring + command_offset::slot_size *
                                          std::size_t{l.command_ring_capacity};

    l.obs_seq_pre = 0;
    l.obs_iteration = 8;
    l.obs_timestamp = 16;
    l.obs_logical_time = 24;
    l.obs_measured_period = 32;
    l.obs_desired = 40;
    l.obs_observed = l.obs_desired + 8 * std::size_t{l.ndof};
    l.obs_payload = l.obs_observed + 8 * std::size_t{l.ndof};
    l.obs_seq_post = round_up8(l.obs_payload + l.payload_capacity);
    l.observation_slot_size = l.obs_seq_post + 8;

    l.total_size = l.observations +
                   l.observation_slot_size * std::size_t{l.history_capacity};
    return l;
}

std::vector<SegmentLayout::Row> SegmentLayout::offset_table() const
{
    namespace h = header_offset;
    namespace c = command_offset;
    std::vector<Row> rows = {
        {"header.magic", h::magic, 8},
        {"header.version", h::version, 4},
        {"header.ndof", h::ndof, 4},
        {"header.frequency_uhz", h::frequency_uhz, 8},
        {"header.mode", h::mode, 1},
        {"header.status", h::status, 1},
        {"header.history_capacity", h::history_capacity, 4},
        {"header.payload_capacity", h::payload_capacity, 4},
        {"header.command_ring_capacity", h::command_ring_capacity, 4},
        {"header.iteration", h::iteration, 8},
        {"header.burst_requested", h::burst_requested, 8},
        {"header.burst_completed", h::burst_completed, 8},
        {"header.producer_exclusion_word", h::producer_exclusion_word, 4},
        {"header.owner_pid", h::owner_pid, 4},
        {"header.ring_head", h::ring_head, 8},
        {"header.ring_tail", h::ring_tail, 8},
        {"header.segment_bytes", h::segment_bytes, 8},
        {"enqueue_count", enqueue_counts, 8 * std::size_t{ndof}},
        {"completed_count", completed_counts, 8 * std::size_t{ndof}},
        {"command_ring", command_ring,
         c::slot_size * std::size_t{command_ring_capacity}},
        {"command_slot.seq", c::seq, 8},
        {"command_slot.dof", c::dof, 4},
        {"command_slot.policy", c::policy, 1},
        {"command_slot.mode_tag", c::mode_tag, 1},
        {"command_slot.pad", c::pad, 2},
        {"command_slot.mode_param", c::mode_param, 8},
        {"command_slot.target", c::target, 8},
        {"command_slot.position", c::position, 8},
        {"command_slot.reserved", c::reserved, 8},
        {"observations", observations,
         observation_slot_size * std::size_t{history_capacity}},
        {"observation_slot.seq_pre", obs_seq_pre, 8},
        {"observation_slot.iteration", obs_iteration, 8},
        {"observation_slot.timestamp_ns", obs_timestamp, 8},
        {"observation_slot.logical_time_ns", obs_logical_time, 8},
        {"observation_slot.measured_period_ns", obs_measured_period, 8},
        {"observation_slot.desired", obs_desired, 8 * std::size_t{ndof}},
        {"observation_slot.observed", obs_observed, 8 * std::size_t{ndof}},
        {"observation_slot.payload", obs_payload, payload_capacity},
        {"observation_slot.seq_post", obs_seq_post, 8},
    };
    return rows;
}

std::string format_offset_table(const BackendConfig &config)
{
    const SegmentLayout layout = SegmentLayout::compute(config);
    std::ostringstream out;
    out << "# field offset size\n";
    for (const auto &row : layout.offset_table())
    {
        out << row.name << ' ' << row.offset << ' ' << row.size << '\n';
    }
    out << "command_slot_size " << command_offset::slot_size << '\n';
    out << "observation_slot_size " << layout.observation_slot_size << '\n';
    out << "segment_size " << layout.total_size << '\n';
    return out.str();
}

}  // namespace synchro80
