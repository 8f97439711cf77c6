#pragma once

#include <synchro80/core.hpp>
#include <synchro80/errors.hpp>
#include <synchro80/segment.hpp>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace synchro80
{
/// Thrown by Frontend::pulse when the ring fills mid-batch. The sent prefix
/// is already recorded as pending; the rest stays staged.
class RingFullError : public Error
{
public:
    RingFullError(std::vector<QueueTicket> sent, std::size_t unsent)
        : Error(ErrorCode::RingFull,
                std::to_string(unsent) + " command(s) left staged"),
          sent_(std::move(sent)),
          unsent_(unsent)
    {
    }
    const std::vector<QueueTicket> &sent() const
    {
        return sent_;
    }
    std::size_t unsent() const
    {
        return unsent_;
    }

private:
    std::vector<QueueTicket> sent_;
    std::size_t unsent_;
};

/**
 * User-side session on a backend's segment. Commands are staged with
 * add_command and transmitted together by pulse, so a multi-DOF group lands
 * contiguously in the ring. One session per thread; open as many sessions
 * as needed.
 */
class Frontend
{
public:
    explicit Frontend(const std::string &segment_id);

    void add_command(std::uint32_t dof,
                     double target,
                     InterpolationMode mode = mode::Direct{},
                     QueuePolicy policy = QueuePolicy::APPEND);

    std::vector<QueueTicket> pulse();
    void pulse_and_wait(Timeout timeout = std::nullopt);
    /// Waits for the given tickets and drops them from the pending list.
    void wait(const std::vector<QueueTicket> &tickets,
              Timeout timeout = std::nullopt);
    void forget_pending()
    {
        pending_.clear();
    }

    Observation latest() const;
    /// Throws Evicted or NotYet.
    Observation read(std::uint64_t iteration) const;
    Observation wait_for_iteration(std::uint64_t iteration,
                                   Timeout timeout = std::nullopt) const;

    void burst(std::uint64_t n, bool blocking = true, Timeout timeout = std::nullopt);

    std::size_t staged() const
    {
        return staged_.size();
    }
    const std::vector<QueueTicket> &pending() const
    {
        return pending_;
    }
    const BackendConfig &config() const
    {
        return segment_.config();
    }
    std::uint64_t iteration() const
    {
        return segment_.iteration();
    }
    Segment &segment()
    {
        return segment_;
    }
    const Segment &segment() const
    {
        return segment_;
    }

private:
    Segment segment_;
    std::vector<Command> staged_;
    std::vector<QueueTicket> pending_;
};

}  // namespace synchro80
