#include <synchro80/errors.hpp>
#include <synchro80/replay.hpp>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

namespace synchro80
{
namespace
{
constexpr char trajectory_magic[8] = {'S', '8', '0', 'T', 'R', 'A', 'J', '\0'};
constexpr std::size_t trajectory_header_size = 24;

template <typename T>
T read_le(const std::vector<char> &buf, std::size_t offset)
{
    T v;
    std::memcpy(&v, buf.data() + offset, sizeof(T));
    return v;
}

template <typename T>
void write_le(std::ostream &out, T v)
{
    out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}
}  // namespace

Trajectory replay_load(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw Error(ErrorCode::FileNotFound, path.string());
    }
    const std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
    if (buf.size() < trajectory_header_size ||
        std::memcmp(buf.data(), trajectory_magic, 8) != 0)
    {
        throw Error(ErrorCode::FormatError, path.string() + ": bad magic");
    }
    if (read_le<std::uint32_t>(buf, 8) != trajectory_version)
    {
        throw Error(ErrorCode::FormatError, path.string() + ": unknown version");
    }
    Trajectory t;
    t.record_len = read_le<std::uint32_t>(buf, 12);
    const auto count = read_le<std::uint64_t>(buf, 16);
    if (t.record_len == 0 && count != 0)
    {
        throw Error(ErrorCode::FormatError, path.string() + ": zero record length");
    }
    const std::uint64_t n = count * t.record_len;
    if (t.record_len != 0 && n / t.record_len != count)
    {
        throw Error(ErrorCode::FormatError, path.string() + ": bad count");
    }
    if (buf.size() != trajectory_header_size + 8 * n)
    {
        throw Error(ErrorCode::FormatError,
                    path.string() + ": length does not match header");
    }
    t.values.resize(n);
    std::memcpy(t.values.data(), buf.data() + trajectory_header_size, 8 * n);
    return t;
}

void replay_save(const std::filesystem::path &path, const Trajectory &trajectory)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
    }
    out.write(trajectory_magic, 8);
    write_le<std::uint32_t>(out, trajectory_version);
    write_le<std::uint32_t>(out, trajectory.record_len);
    write_le<std::uint64_t>(out, trajectory.count());
    out.write(reinterpret_cast<const char *>(trajectory.values.data()),
              static_cast<std::streamsize>(8 * trajectory.count() * trajectory.record_len));
    if (!out)
    {
        throw Error(ErrorCode::FileNotFound, "write failed: " + path.string());
    }
}

void replay_record(const std::vector<Observation> &observations,
                   const std::filesystem::path &path)
{
    Trajectory t;
    t.record_len = ball_record_len;
    for (const Observation &obs : observations)
    {
        const auto ball = decode_ball(obs.payload);
        t.values.insert(t.values.end(), ball.begin(), ball.end());
    }
    replay_save(path, t);
}

Trajectory projectile_arc(const std::array<double, 3> &p0,
                          const std::array<double, 3> &v0,
                          double g,
                          double dt,
                          std::size_t count)
{
    Trajectory t;
    t.record_len = ball_record_len;
    t.values.reserve(count * ball_record_len);
    for (std::size_t k = 0; k < count; ++k)
    {
        const double s = static_cast<double>(k) * dt;
        t.values.push_back(p0[0] + v0[0] * s);
        t.values.push_back(p0[1] + v0[1] * s);
        t.values.push_back(p0[2] + v0[2] * s - 0.5 * g * s * s);
        t.values.push_back(v0[0]);
        t.values.push_back(v0[1]);
        t.values.push_back(v0[2] - g * s);
    }
    return t;
}

std::vector<std::uint8_t> encode_ball(std::span<const double> state)
{
    std::vector<std::uint8_t> out(8 * ball_record_len, 0);
    std::memcpy(out.data(), state.data(), 8 * std::min<std::size_t>(state.size(), ball_record_len));
    return out;
}

std::array<double, ball_record_len> decode_ball(std::span<const std::uint8_t> payload)
{
    if (payload.size() < 8 * ball_record_len)
    {
        throw Error(ErrorCode::FormatError, "payload too short for a ball state");
    }
    std::array<double, ball_record_len> out{};
    std::memcpy(out.data(), payload.data(), 8 * ball_record_len);
    return out;
}

}  // namespace synchro80
