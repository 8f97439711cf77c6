#pragma once

#include <synchro80/core.hpp>
#include <synchro80/replay.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace synchro80
{
/**
 * Desk-scale hybrid sim/real setup: a NORMAL backend driving MuscleDriver
 * ("real" robot), an embedded BURSTING backend driving MirrorSimDriver, and
 * an environment loop in the calling thread.
 *
 * Environment step k waits for real iteration (k+1)·r − 1 with
 * r = real_hz / env_hz, mirrors that observation into the simulation with
 * Direct commands, bursts sim_steps_per_env_step iterations and queues the
 * next scripted pressure (an Iteration(r) command) on the real backend. The
 * first `lead_commands` pressures are queued before the real loop starts,
 * so the real trajectory only depends on the iteration index as long as the
 * environment keeps up.
 */
struct HysrOptions
{
    double duration_s = 2.0;
    double real_hz = 500.0;
    double env_hz = 100.0;
    std::uint32_t sim_steps_per_env_step = 5;
    std::uint32_t ndof = 2;
    /// false gives the sim-free baseline
    bool with_sim = true;
    std::uint32_t lead_commands = 5;
    /// segment ids are <prefix>_real and <prefix>_sim; empty picks one from the pid
    std::string segment_prefix;
    std::optional<Trajectory> ball;
};

struct PeriodStats
{
    std::uint64_t samples = 0;
    double mean_ns = 0.0;
    double stddev_ns = 0.0;
    std::int64_t min_ns = 0;
    std::int64_t max_ns = 0;
};

struct HysrReport
{
    HysrOptions options;
    std::uint64_t env_steps = 0;
    std::uint64_t real_iterations = 0;
    std::uint64_t sim_iterations = 0;
    std::uint64_t mirror_mismatches = 0;
    double wall_time_s = 0.0;
    PeriodStats real_period;

    /// per env step: real iteration that was mirrored, and how many newer
    /// real iterations existed once the sim step finished
    std::vector<std::uint64_t> mirrored_iteration;
    std::vector<std::int64_t> mirror_lag;
    std::vector<std::vector<double>> mirrored_state;
    /// sim q read back after each env step
    std::vector<std::vector<double>> sim_state;
    /// every sim observation, in iteration order
    std::vector<Observation> sim_history;

    std::string summary() const;
    /// key=value lines
    std::string stats() const;
};

HysrReport run_hysr_demo(const HysrOptions &options = {});

PeriodStats period_stats(const std::vector<Observation> &history);

}  // namespace synchro80
