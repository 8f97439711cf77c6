#pragma once

#include <synchro80/core.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace synchro80
{
/**
 * Recorded trajectory: `count` records of `record_len` reals each.
 *
 * File format (little-endian):
 *   8 bytes  magic "S80TRAJ\0"
 *   u32      version (1)
 *   u32      record_len
 *   u64      count
 *   count × record_len f64
 */
struct Trajectory
{
    std::uint32_t record_len = 0;
    std::vector<double> values;

    std::size_t count() const
    {
        return record_len == 0 ? 0 : values.size() / record_len;
    }
    std::span<const double> record(std::size_t k) const
    {
        return {values.data() + k * record_len, record_len};
    }
    bool operator==(const Trajectory &) const = default;
};

inline constexpr std::uint32_t trajectory_version = 1;
/// position (3) then velocity (3)
inline constexpr std::uint32_t ball_record_len = 6;

/// Throws FileNotFound or FormatError.
Trajectory replay_load(const std::filesystem::path &path);
void replay_save(const std::filesystem::path &path, const Trajectory &trajectory);
/// Stores the ball state carried in each observation's payload.
void replay_record(const std::vector<Observation> &observations,
                   const std::filesystem::path &path);

/// Ball under gravity g along -z, sampled at t = k·dt.
Trajectory projectile_arc(const std::array<double, 3> &p0,
                          const std::array<double, 3> &v0,
                          double g,
                          double dt,
                          std::size_t count);

std::vector<std::uint8_t> encode_ball(std::span<const double> state);
std::array<double, ball_record_len> decode_ball(std::span<const std::uint8_t> payload);

}  // namespace synchro80
