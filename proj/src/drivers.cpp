#include <synchro80/drivers.hpp>
#include <synchro80/errors.hpp>

#include <algorithm>
#include <cmath>

namespace synchro80
{
IntegratorDriver::IntegratorDriver(std::uint32_t ndof, double dt_s, double initial)
    : dt_(dt_s), state_(ndof, initial)
{
}

void IntegratorDriver::set(std::span<const double> control)
{
    for (std::size_t d = 0; d < state_.size(); ++d)
    {
        state_[d] += control[d] * dt_;
    }
}

Driver::Sensed IntegratorDriver::get()
{
    return {state_, {}};
}

MuscleDriver::MuscleDriver(std::uint32_t ndof, double dt_s, double tau_s, double initial)
    : gain_(std::min(dt_s / tau_s, 1.0)), pressure_(ndof, initial)
{
    if (!(tau_s > 0.0))
    {
        throw Error(ErrorCode::BadConfig, "muscle time constant must be positive");
    }
}

void MuscleDriver::set(std::span<const double> control)
{
    for (std::size_t d = 0; d < pressure_.size(); ++d)
    {
        pressure_[d] += (control[d] - pressure_[d]) * gain_;
    }
}

Driver::Sensed MuscleDriver::get()
{
    return {pressure_, {}};
}

MirrorSimDriver::MirrorSimDriver(std::uint32_t ndof, Trajectory ball)
    : q_(ndof, 0.0), ball_(std::move(ball))
{
}

MirrorSimDriver::MirrorSimDriver(std::uint32_t ndof, std::filesystem::path trajectory_file)
    : q_(ndof, 0.0), file_(std::move(trajectory_file))
{
}

void MirrorSimDriver::start()
{
    if (file_)
    {
        ball_ = replay_load(*file_);
    }
    if (ball_.record_len < ball_record_len || ball_.count() == 0)
    {
        throw Error(ErrorCode::FormatError,
                    "ball trajectory needs at least one record of 6 values");
    }
    step_ = 0;
}

void MirrorSimDriver::set(std::span<const double> control)
{
    q_.assign(control.begin(), control.end());
    ++step_;
}

Driver::Sensed MirrorSimDriver::get()
{
    const auto record = ball_.record(step_ % ball_.count());
    return {q_, encode_ball(record.first(ball_record_len))};
}

Trajectory default_ball_trajectory()
{
    return projectile_arc({0.0, 0.0, 1.0}, {2.0, 0.0, 3.0}, 9.81, 0.002, 300);
}

namespace
{
double parse_real(const std::string &key, const std::string &value)
{
    try
    {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used == value.size() && std::isfinite(v))
        {
            return v;
        }
    }
    catch (const std::exception &)
    {
    }
    throw Error(ErrorCode::BadConfig, "driver." + key + ": not a number: '" + value + "'");
}
}  // namespace

std::shared_ptr<Driver> make_driver(
    const std::string &name,
    const std::vector<std::pair<std::string, std::string>> &params,
    const BackendConfig &config)
{
    const double dt = static_cast<double>(config.nominal_period_ns()) * 1e-9;
    auto unknown = [&](const std::string &key) {
        return Error(ErrorCode::BadConfig,
                     "driver." + key + ": unknown parameter for driver '" + name + "'");
    };

    if (name == "integrator")
    {
        double initial = 0.0;
        for (const auto &[key, value] : params)
        {
            if (key != "initial")
                throw unknown(key);
            initial = parse_real(key, value);
        }
        return std::make_shared<IntegratorDriver>(config.ndof, dt, initial);
    }
    if (name == "muscle")
    {
        double tau = 0.1;
        double initial = 0.0;
        for (const auto &[key, value] : params)
        {
            if (key == "tau")
                tau = parse_real(key, value);
            else if (key == "initial")
                initial = parse_real(key, value);
            else
                throw unknown(key);
        }
        if (!(tau > 0.0))
        {
            throw Error(ErrorCode::BadConfig, "driver.tau: must be positive");
        }
        return std::make_shared<MuscleDriver>(config.ndof, dt, tau, initial);
    }
    if (name == "mirror_sim")
    {
        if (config.payload_capacity < 8 * ball_record_len)
        {
            throw Error(ErrorCode::BadConfig,
                        "payload_capacity: mirror_sim needs at least 48 bytes");
        }
        for (const auto &[key, value] : params)
        {
            if (key != "trajectory")
                throw unknown(key);
            return std::make_shared<MirrorSimDriver>(config.ndof,
                                                     std::filesystem::path(value));
        }
        return std::make_shared<MirrorSimDriver>(config.ndof, default_ball_trajectory());
    }
    throw Error(ErrorCode::BadConfig, "driver: unknown driver '" + name + "'");
}

}  // namespace synchro80
