#include <synchro80/frontend.hpp>

#include <algorithm>
#include <chrono>

namespace synchro80
{
namespace
{
using clock = std::chrono::steady_clock;

Timeout remaining(Timeout timeout, clock::time_point start)
{
    if (!timeout)
    {
        return std::nullopt;
    }
    const auto left = *timeout - (clock::now() - start);
    return std::max(std::chrono::duration_cast<std::chrono::nanoseconds>(left),
                    std::chrono::nanoseconds::zero());
}

Observation checked_read(const Segment &segment, std::uint64_t iteration)
{
    Observation obs;
    switch (segment.read_observation(iteration, obs))
    {
        case ReadStatus::Ok:
            return obs;
        case ReadStatus::NotYet:
            throw Error(ErrorCode::NotYet,
                        "iteration " + std::to_string(iteration) + " not written yet");
        case ReadStatus::Evicted:
            break;
    }
    throw Error(ErrorCode::Evicted,
                "iteration " + std::to_string(iteration) + " no longer in history");
}
}  // namespace

Frontend::Frontend(const std::string &segment_id)
    : segment_(Segment::attach(segment_id))
{
}

void Frontend::add_command(std::uint32_t dof,
                           double target,
                           InterpolationMode mode,
                           QueuePolicy policy)
{
    Command cmd{dof, target, mode, policy, 0};
    validate_command(cmd, segment_.config().ndof);
    staged_.push_back(cmd);
}

std::vector<QueueTicket> Frontend::pulse()
{
    std::vector<QueueTicket> sent;
    sent.reserve(staged_.size());
    std::size_t i = 0;
    try
    {
        for (; i < staged_.size(); ++i)
        {
            sent.push_back(segment_.push_command(staged_[i]));
            pending_.push_back(sent.back());
        }
    }
    catch (const Error &e)
    {
        staged_.erase(staged_.begin(), staged_.begin() + static_cast<std::ptrdiff_t>(i));
        if (e.code() == ErrorCode::RingFull)
        {
            throw RingFullError(std::move(sent), staged_.size());
        }
        throw;
    }
    staged_.clear();
    return sent;
}

void Frontend::wait(const std::vector<QueueTicket> &tickets, Timeout timeout)
{
    const auto start = clock::now();
    for (const QueueTicket &t : tickets)
    {
        segment_.wait_completed(t, remaining(timeout, start));
    }
    std::erase_if(pending_, [&](const QueueTicket &p) {
        return std::find(tickets.begin(), tickets.end(), p) != tickets.end();
    });
}

void Frontend::pulse_and_wait(Timeout timeout)
{
    pulse();
    const std::vector<QueueTicket> tickets = pending_;
    wait(tickets, timeout);
}

Observation Frontend::latest() const
{
    // a reader lapped by the writer between sampling and reading retries
    // with a fresher iteration
    for (int attempt = 0;; ++attempt)
    {
        const std::uint64_t current = segment_.iteration();
        if (current == 0)
        {
            throw Error(ErrorCode::NoObservationYet, "no iteration completed yet");
        }
        Observation obs;
        if (segment_.read_observation(current - 1, obs) == ReadStatus::Ok)
        {
            return obs;
        }
        if (attempt > 1000)
        {
            throw Error(ErrorCode::Evicted, "could not read a consistent slot");
        }
    }
}

Observation Frontend::read(std::uint64_t iteration) const
{
    return checked_read(segment_, iteration);
}

Observation Frontend::wait_for_iteration(std::uint64_t iteration, Timeout timeout) const
{
    segment_.wait_iteration_beyond(iteration, timeout);
    return checked_read(segment_, iteration);
}

void Frontend::burst(std::uint64_t n, bool blocking, Timeout timeout)
{
    const std::uint64_t requested = segment_.request_burst(n);
    if (blocking)
    {
        segment_.await_burst_done_until(requested, timeout);
    }
}

}  // namespace synchro80
