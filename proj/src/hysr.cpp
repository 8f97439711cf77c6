#include <synchro80/backend.hpp>
#include <synchro80/drivers.hpp>
#include <synchro80/errors.hpp>
#include <synchro80/frontend.hpp>
#include <synchro80/hysr.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unistd.h>

namespace synchro80
{
namespace
{
std::uint32_t history_for(std::uint64_t iterations)
{
    std::uint32_t cap = 1024;
    while (cap < iterations + 64)
    {
        cap *= 2;
    }
    return cap;
}

double scripted_pressure(std::uint64_t step, std::uint32_t dof)
{
    return 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * static_cast<double>(step) / 50.0 +
                                static_cast<double>(dof));
}

std::vector<Observation> read_history(const Segment &segment)
{
    std::vector<Observation> out;
    const std::uint64_t n = segment.iteration();
    const std::uint64_t cap = segment.config().history_capacity;
    for (std::uint64_t it = n > cap ? n - cap : 0; it < n; ++it)
    {
        Observation obs;
        if (segment.read_observation(it, obs) == ReadStatus::Ok)
        {
            out.push_back(std::move(obs));
        }
    }
    return out;
}
}  // namespace

PeriodStats period_stats(const std::vector<Observation> &history)
{
    PeriodStats s;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const Observation &obs : history)
    {
        if (obs.iteration == 0)
        {
            continue;
        }
        const std::int64_t p = obs.measured_period_ns;
        if (s.samples == 0)
        {
            s.min_ns = s.max_ns = p;
        }
        s.min_ns = std::min(s.min_ns, p);
        s.max_ns = std::max(s.max_ns, p);
        sum += static_cast<double>(p);
        sum_sq += static_cast<double>(p) * static_cast<double>(p);
        ++s.samples;
    }
    if (s.samples > 0)
    {
        const double n = static_cast<double>(s.samples);
        s.mean_ns = sum / n;
        s.stddev_ns = std::sqrt(std::max(0.0, sum_sq / n - s.mean_ns * s.mean_ns));
    }
    return s;
}

HysrReport run_hysr_demo(const HysrOptions &options)
{
    const double ratio_real = options.real_hz / options.env_hz;
    const auto real_per_env = static_cast<std::uint64_t>(std::llround(ratio_real));
    if (real_per_env == 0 || std::abs(ratio_real - static_cast<double>(real_per_env)) > 1e-9)
    {
        throw Error(ErrorCode::BadConfig,
                    "real_hz must be an integer multiple of env_hz");
    }
    if (options.sim_steps_per_env_step == 0 || options.duration_s <= 0.0)
    {
        throw Error(ErrorCode::BadConfig, "invalid demo parameters");
    }

    HysrReport report;
    report.options = options;
    const auto env_steps =
        static_cast<std::uint64_t>(std::llround(options.duration_s * options.env_hz));
    const std::string prefix = options.segment_prefix.empty()
                                   ? "hysr-" + std::to_string(getpid())
                                   : options.segment_prefix;
    const double real_dt = 1.0 / options.real_hz;

    BackendConfig real_cfg;
    real_cfg.segment_id = prefix + "_real";
    real_cfg.ndof = options.ndof;
    real_cfg.frequency_hz = options.real_hz;
    real_cfg.mode = SyncMode::NORMAL;
    real_cfg.history_capacity = history_for(env_steps * real_per_env + 2 * real_per_env);
    Backend real(real_cfg, std::make_shared<MuscleDriver>(options.ndof, real_dt));
    Frontend real_fe(real_cfg.segment_id);

    auto queue_pressure = [&](std::uint64_t step) {
        for (std::uint32_t d = 0; d < options.ndof; ++d)
        {
            real_fe.add_command(d, scripted_pressure(step, d), mode::Iteration{real_per_env});
        }
        real_fe.pulse();
        real_fe.forget_pending();
    };
    for (std::uint64_t s = 0; s < options.lead_commands; ++s)
    {
        queue_pressure(s);
    }

    std::optional<Backend> sim;
    std::optional<Frontend> sim_fe;
    std::optional<BackendThread> sim_thread;
    if (options.with_sim)
    {
        BackendConfig sim_cfg;
        sim_cfg.segment_id = prefix + "_sim";
        sim_cfg.ndof = options.ndof;
        sim_cfg.frequency_hz = options.env_hz * options.sim_steps_per_env_step;
        sim_cfg.mode = SyncMode::BURSTING;
        sim_cfg.payload_capacity = 8 * ball_record_len;
        sim_cfg.history_capacity =
            history_for(env_steps * options.sim_steps_per_env_step);
        sim.emplace(sim_cfg,
                    std::make_shared<MirrorSimDriver>(
                        options.ndof, options.ball ? *options.ball : default_ball_trajectory()));
        sim_fe.emplace(sim_cfg.segment_id);
        sim_thread.emplace(*sim);
    }

    const auto wall_start = monotonic_ns();
    const Timeout step_timeout = std::chrono::seconds(5);
    {
        BackendThread real_thread(real);
        try
        {
            for (std::uint64_t k = 0; k < env_steps; ++k)
            {
                const std::uint64_t mirrored_it = (k + 1) * real_per_env - 1;
                const Observation obs = real_fe.wait_for_iteration(mirrored_it, step_timeout);
                report.mirrored_iteration.push_back(mirrored_it);
                report.mirrored_state.push_back(obs.observed);
                if (sim_fe)
                {
                    for (std::uint32_t d = 0; d < options.ndof; ++d)
                    {
                        sim_fe->add_command(d, obs.observed[d]);
                    }
                    sim_fe->pulse();
                    sim_fe->forget_pending();
                    sim_fe->burst(options.sim_steps_per_env_step, true, step_timeout);
                    const Observation sim_obs = sim_fe->latest();
                    report.sim_state.push_back(sim_obs.observed);
                    if (sim_obs.observed != obs.observed)
                    {
                        ++report.mirror_mismatches;
                    }
                }
                report.mirror_lag.push_back(
                    static_cast<std::int64_t>(real_fe.iteration()) - 1 -
                    static_cast<std::int64_t>(mirrored_it));
                queue_pressure(k + options.lead_commands);
                ++report.env_steps;
            }
        }
        catch (...)
        {
            real_thread.stop();
            throw;
        }
        real_thread.stop();
    }
    report.wall_time_s = static_cast<double>(monotonic_ns() - wall_start) * 1e-9;
    if (sim_thread)
    {
        sim_thread->stop();
    }

    report.real_iterations = real.iteration();
    report.real_period = period_stats(read_history(real.segment()));
    if (sim)
    {
        report.sim_iterations = sim->iteration();
        report.sim_history = read_history(sim->segment());
    }
    return report;
}

std::string HysrReport::summary() const
{
    std::ostringstream out;
    out << "hysr demo: " << options.duration_s << " s, real " << options.real_hz
        << " Hz, env " << options.env_hz << " Hz, " << options.sim_steps_per_env_step
        << " sim steps per env step" << (options.with_sim ? "" : " (no sim)") << '\n';
    out << "env steps:         " << env_steps << '\n';
    out << "real iterations:   " << real_iterations << '\n';
    out << "sim iterations:    " << sim_iterations << '\n';
    out << "mirror mismatches: " << mirror_mismatches << '\n';
    out << "real period (ms):  mean " << real_period.mean_ns * 1e-6 << ", stddev "
        << real_period.stddev_ns * 1e-6 << ", min " << real_period.min_ns * 1e-6
        << ", max " << real_period.max_ns * 1e-6 << '\n';
    if (!mirror_lag.empty())
    {
        const auto [lo, hi] = std::minmax_element(mirror_lag.begin(), mirror_lag.end());
        out << "mirror lag (real iterations): min " << *lo << ", max " << *hi << '\n';
    }
    out << "wall time (s):     " << wall_time_s << '\n';
    return out.str();
}

std::string HysrReport::stats() const
{
    std::ostringstream out;
    out.precision(17);
    out << "duration_s=" << options.duration_s << '\n';
    out << "real_hz=" << options.real_hz << '\n';
    out << "env_hz=" << options.env_hz << '\n';
    out << "sim_steps_per_env_step=" << options.sim_steps_per_env_step << '\n';
    out << "with_sim=" << (options.with_sim ? 1 : 0) << '\n';
    out << "env_steps=" << env_steps << '\n';
    out << "real_iterations=" << real_iterations << '\n';
    out << "sim_iterations=" << sim_iterations << '\n';
    out << "mirror_mismatches=" << mirror_mismatches << '\n';
    out << "real_period_samples=" << real_period.samples << '\n';
    out << "real_period_mean_ns=" << real_period.mean_ns << '\n';
    out << "real_period_stddev_ns=" << real_period.stddev_ns << '\n';
    out << "real_period_min_ns=" << real_period.min_ns << '\n';
    out << "real_period_max_ns=" << real_period.max_ns << '\n';
    std::int64_t lag_max = 0;
    double lag_sum = 0.0;
    for (auto lag : mirror_lag)
    {
        lag_max = std::max(lag_max, lag);
        lag_sum += static_cast<double>(lag);
    }
    out << "mirror_lag_max=" << lag_max << '\n';
    out << "mirror_lag_mean=" << (mirror_lag.empty() ? 0.0 : lag_sum / static_cast<double>(mirror_lag.size())) << '\n';
    out << "wall_time_s=" << wall_time_s << '\n';
    return out.str();
}

}  // namespace synchro80
