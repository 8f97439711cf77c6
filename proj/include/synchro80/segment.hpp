#pragma once

#include <synchro80/core.hpp>
#include <synchro80/layout.hpp>

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <sys/types.h>
#include <vector>

namespace synchro80
{
/// No value means wait forever.
using Timeout = std::optional<std::chrono::nanoseconds>;

enum class ReadStatus
{
    Ok,
    Evicted,
    NotYet
};

/**
 * Handle on a named shared-memory segment ("synchro80.<segment_id>").
 *
 * The creating process is the owner: it is the single consumer of the
 * command ring, the single writer of the observation history and the single
 * completer of bursts. Any number of processes may attach to push commands,
 * read observations and request bursts.
 *
 * Observation slots use a seqlock: the writer stamps seq_pre odd, writes
 * the fields, then stamps seq_post and seq_pre with the same even value.
 * Readers copy seq_post, the fields, then seq_pre, and accept the copy only
 * if both stamps are equal and even.
 *
 * Blocking calls sleep on futexes placed on the low half of the counters
 * they wait for, waking every 20 ms to check whether the owner is gone.
 */
class Segment
{
public:
    /// Throws AlreadyExists if a live owner holds the id. A segment left
    /// behind by a dead owner is unlinked and recreated.
    static Segment create(const BackendConfig &config);
    /// Throws NotFound, VersionMismatch or CorruptHeader.
    static Segment attach(const std::string &segment_id);

    Segment(Segment &&other) noexcept;
    Segment &operator=(Segment &&other) noexcept;
    Segment(const Segment &) = delete;
    Segment &operator=(const Segment &) = delete;
    ~Segment();

    const BackendConfig &config() const
    {
        return config_;
    }
    const SegmentLayout &layout() const
    {
        return layout_;
    }
    bool is_owner() const
    {
        return owner_;
    }

    Status status() const;
    void set_status(Status status);
    pid_t owner_pid() const;
    /// false once the owner published STOPPED or its process died
    bool peer_alive() const;

    std::uint64_t iteration() const;
    std::uint64_t enqueue_count(std::uint32_t dof) const;
    std::uint64_t completed_count(std::uint32_t dof) const;
    std::uint64_t burst_requested() const;
    std::uint64_t burst_completed() const;

    /// Validates the command, reserves a ring slot and assigns the next
    /// per-DOF position. Safe to call from any number of processes.
    QueueTicket push_command(const Command &cmd);
    /// Owner only. Up to `max` commands in ring order.
    std::vector<Command> pop_commands(std::size_t max);
    /// Owner only. Marks `count` more commands of `dof` as finished.
    void add_completed(std::uint32_t dof, std::uint64_t count);

    /// Owner only. obs.iteration must equal iteration().
    void write_observation(const Observation &obs);
    ReadStatus read_observation(std::uint64_t iteration,
                                Observation &out,
                                int max_retries = 64) const;

    /// Returns the new burst_requested value.
    std::uint64_t request_burst(std::uint64_t n);
    void complete_iterations(std::uint64_t k);
    /// Owner side: blocks while no burst is pending, returns the pending count.
    std::uint64_t await_burst(Timeout timeout = std::nullopt);
    /// As await_burst but returns 0 when `slice` expires.
    std::uint64_t try_await_burst(std::chrono::nanoseconds slice);
    /// Blocks until burst_completed reaches the value of burst_requested
    /// sampled on entry.
    void await_burst_done(Timeout timeout = std::nullopt);
    void await_burst_done_until(std::uint64_t requested, Timeout timeout);

    /// Blocks until iteration() > `iteration`.
    void wait_iteration_beyond(std::uint64_t iteration,
                               Timeout timeout = std::nullopt) const;
    /// Blocks until completed_count(ticket.dof) > ticket.position.
    void wait_completed(const QueueTicket &ticket,
                        Timeout timeout = std::nullopt) const;

    /// Owner only: publishes STOPPED, wakes every waiter and unlinks the
    /// name. The mapping stays valid until the handle is destroyed.
    /// Idempotent.
    void destroy();

    /// Raw bytes of the mapping (conformance tests, fault injection).
    std::span<std::byte> bytes()
    {
        return {base_, layout_.total_size};
    }

    static std::string shm_name(const std::string &segment_id);

private:
    Segment() = default;
    void release() noexcept;
    void wake(std::size_t offset) const;
    template <typename Done>
    void wait_on(std::size_t offset,
                 Done done,
                 Timeout timeout,
                 bool watch_peer) const;

    std::byte *base_ = nullptr;
    std::size_t mapped_size_ = 0;
    BackendConfig config_;
    SegmentLayout layout_;
    std::string name_;
    bool owner_ = false;
    bool destroyed_ = false;
};

}  // namespace synchro80
