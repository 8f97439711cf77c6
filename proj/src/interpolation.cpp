#include <synchro80/errors.hpp>
#include <synchro80/interpolation.hpp>

#include <algorithm>
#include <cmath>
#include <type_traits>

namespace synchro80
{
namespace
{
// start + fraction·(target − start), kept inside [start, target] despite
// rounding of the difference
double lerp_bounded(double start, double target, double fraction)
{
    const double value = start + fraction * (target - start);
    return std::clamp(value, std::min(start, target), std::max(start, target));
}

Setpoint by_fraction(double start, double target, double fraction)
{
    if (fraction >= 1.0)
    {
        return {target, true};
    }
    return {lerp_bounded(start, target, std::max(fraction, 0.0)), false};
}

// Speed commands are durations computed in (fractional) nanoseconds; no
// rounding to whole microseconds.
double speed_total_ns(const ActiveCommand &active, double speed)
{
    return std::abs(active.cmd.target - active.start_state) / speed * 1e9;
}

}  // namespace

Setpoint desired_at(const ActiveCommand &active,
                    std::int64_t iteration,
                    std::int64_t logical_ns)
{
    const double start = active.start_state;
    const double target = active.cmd.target;
    const double elapsed_ns =
        static_cast<double>(logical_ns - active.start_logical_ns);

    return std::visit(
        [&](const auto &m) -> Setpoint {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, mode::Direct>)
            {
                return {target, true};
            }
            else if constexpr (std::is_same_v<M, mode::Duration>)
            {
                return by_fraction(
                    start,
                    target,
                    elapsed_ns / (static_cast<double>(m.duration_us) * 1000.0));
            }
            else if constexpr (std::is_same_v<M, mode::Speed>)
            {
                if (target == start)
                {
                    return {target, true};
                }
                return by_fraction(
                    start, target, elapsed_ns / speed_total_ns(active, m.speed));
            }
            else
            {
                const std::int64_t k = iteration - active.start_iteration;
                const auto n = static_cast<std::int64_t>(m.count);
                if (k >= n)
                {
                    return {target, true};
                }
                const double value =
                    start + (target - start) *
                                static_cast<double>(std::max<std::int64_t>(k, 0)) /
                                static_cast<double>(n);
                return {std::clamp(value,
                                   std::min(start, target),
                                   std::max(start, target)),
                        false};
            }
        },
        active.cmd.mode);
}

namespace
{
// Upper bound on evaluations before completion, used to refuse runaway
// expansions before allocating anything.
double expected_steps(const ActiveCommand &active, std::int64_t period_ns)
{
    const double period = static_cast<double>(period_ns);
    return std::visit(
        [&](const auto &m) -> double {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, mode::Direct>)
            {
                return 1.0;
            }
            else if constexpr (std::is_same_v<M, mode::Duration>)
            {
                return std::ceil(static_cast<double>(m.duration_us) * 1000.0 /
                                 period);
            }
            else if constexpr (std::is_same_v<M, mode::Speed>)
            {
                return std::ceil(speed_total_ns(active, m.speed) / period);
            }
            else
            {
                return static_cast<double>(m.count);
            }
        },
        active.cmd.mode);
}
}  // namespace

std::vector<double> trajectory(const ActiveCommand &active,
                               std::int64_t nominal_period_ns,
                               std::size_t cap)
{
    if (!(expected_steps(active, nominal_period_ns) <=
          static_cast<double>(cap)))
    {
        throw Error(ErrorCode::TrajectoryTooLong,
                    "expansion exceeds " + std::to_string(cap) + " steps");
    }
    std::vector<double> out;
    std::int64_t iteration = active.start_iteration;
    std::int64_t logical = active.start_logical_ns;
    while (true)
    {
        ++iteration;
        logical += nominal_period_ns;
        Setpoint sp = desired_at(active, iteration, logical);
        out.push_back(sp.value);
        if (sp.completed)
        {
            return out;
        }
        if (out.size() >= cap)
        {
            throw Error(ErrorCode::TrajectoryTooLong,
                        "expansion exceeds " + std::to_string(cap) + " steps");
        }
    }
}

}  // namespace synchro80
