#pragma once

#include <synchro80/backend.hpp>
#include <synchro80/replay.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace synchro80
{
/// s += u·dt per iteration.
class IntegratorDriver : public Driver
{
public:
    IntegratorDriver(std::uint32_t ndof, double dt_s, double initial = 0.0);
    void set(std::span<const double> control) override;
    Sensed get() override;

private:
    double dt_;
    std::vector<double> state_;
};

/// First-order pressure response: p += (u − p)·dt/tau.
class MuscleDriver : public Driver
{
public:
    MuscleDriver(std::uint32_t ndof, double dt_s, double tau_s = 0.1, double initial = 0.0);
    void set(std::span<const double> control) override;
    Sensed get() override;

private:
    double gain_;
    std::vector<double> pressure_;
};

/**
 * Kinematic mirror of a robot plus a replayed ball. Joint positions are the
 * last control input verbatim; each set() advances the ball by one record,
 * wrapping at the end of the recording. The payload carries the ball state
 * as six little-endian f64.
 */
class MirrorSimDriver : public Driver
{
public:
    MirrorSimDriver(std::uint32_t ndof, Trajectory ball);
    /// The trajectory file is loaded by start().
    MirrorSimDriver(std::uint32_t ndof, std::filesystem::path trajectory_file);

    void start() override;
    void set(std::span<const double> control) override;
    Sensed get() override;

    std::uint64_t steps() const
    {
        return step_;
    }

private:
    std::vector<double> q_;
    std::optional<std::filesystem::path> file_;
    Trajectory ball_;
    std::uint64_t step_ = 0;
};

/// Default ball: a 0.6 s arc at 500 Hz.
Trajectory default_ball_trajectory();

/// Builds a demo driver by name ("integrator", "muscle", "mirror_sim").
/// Parameter values are strings as read from a config file. Throws
/// Error(BadConfig) for an unknown name or parameter.
std::shared_ptr<Driver> make_driver(
    const std::string &name,
    const std::vector<std::pair<std::string, std::string>> &params,
    const BackendConfig &config);

}  // namespace synchro80
