#pragma once

#include <synchro80/core.hpp>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace synchro80
{
/**
 * A command together with the setpoint it starts from. The start fields
 * describe the iteration preceding the first evaluation: a command
 * activated while computing iteration k has start_iteration k-1, so
 * desired_at is first called with iteration start_iteration + 1.
 */
struct ActiveCommand
{
    Command cmd;
    double start_state = 0.0;
    std::int64_t start_iteration = 0;
    std::int64_t start_logical_ns = 0;
};

struct Setpoint
{
    double value;
    bool completed;
};

/**
 * Desired state of a command at the given iteration. Values are computed
 * in closed form from the elapsed fraction; the completing evaluation
 * returns the target verbatim.
 */
Setpoint desired_at(const ActiveCommand &active,
                    std::int64_t iteration,
                    std::int64_t logical_ns);

inline constexpr std::size_t default_trajectory_cap = 10'000'000;

/// Every desired state from first evaluation through completion.
/// Throws Error(TrajectoryTooLong) if more than `cap` steps are needed.
std::vector<double> trajectory(const ActiveCommand &active,
                               std::int64_t nominal_period_ns,
                               std::size_t cap = default_trajectory_cap);

}  // namespace synchro80
