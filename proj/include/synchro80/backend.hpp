#pragma once

#include <synchro80/core.hpp>
#include <synchro80/interpolation.hpp>
#include <synchro80/segment.hpp>

#include <atomic>
#include <cstdint>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

namespace synchro80
{
/**
 * Device interface implemented per hardware (or simulator). set() and get()
 * are only called between start() and stop(); the backend calls set() then
 * get() once per iteration.
 */
class Driver
{
public:
    struct Sensed
    {
        std::vector<double> observed;
        std::vector<std::uint8_t> payload;
    };

    virtual ~Driver() = default;
    virtual void start()
    {
    }
    virtual void stop()
    {
    }
    virtual void set(std::span<const double> control) = 0;
    virtual Sensed get() = 0;
};

struct DofState
{
    double current_desired = 0.0;
    std::optional<ActiveCommand> active;
    std::deque<Command> queue;
};

/**
 * Control loop engine. Constructing a Backend creates the segment, starts
 * the driver and seeds every DOF's setpoint from the driver's first
 * reading. It can then be driven in three ways:
 *
 *  - run(): the standalone loop, paced at the configured frequency in
 *    NORMAL mode or serving bursts in BURSTING mode, until request_stop();
 *  - step(n): n iterations synchronously in the caller's thread (embedded);
 *  - serve_burst(): one await/step/complete cycle (embedded, BURSTING).
 *
 * Not safe for concurrent step() calls.
 */
class Backend
{
public:
    Backend(const BackendConfig &config, std::shared_ptr<Driver> driver);
    ~Backend();
    Backend(const Backend &) = delete;
    Backend &operator=(const Backend &) = delete;

    /// One full iteration: dispatch commands, interpolate, set, get, publish.
    Observation iterate();
    void step(std::uint64_t n);
    /// Returns the number of iterations executed, 0 when `timeout` expires
    /// with no burst pending.
    std::uint64_t serve_burst(Timeout timeout = std::nullopt);

    void run();
    /// Async-signal-safe.
    void request_stop() noexcept;
    /// Stops the driver and publishes STOPPED. Waits for a concurrent run()
    /// to exit. Idempotent.
    void stop();

    Status status() const
    {
        return segment_.status();
    }
    std::uint64_t iteration() const
    {
        return segment_.iteration();
    }
    const BackendConfig &config() const
    {
        return config_;
    }
    Segment &segment()
    {
        return segment_;
    }
    const std::vector<DofState> &dofs() const
    {
        return dofs_;
    }

private:
    void dispatch(const Command &cmd);
    void run_normal();
    void run_bursting();
    void shutdown() noexcept;

    BackendConfig config_;
    std::shared_ptr<Driver> driver_;
    Segment segment_;
    std::int64_t period_ns_;
    std::vector<DofState> dofs_;
    std::vector<double> desired_;
    std::vector<std::uint64_t> finished_;
    std::int64_t last_timestamp_ns_ = -1;
    std::atomic<bool> stop_requested_{false};
    std::atomic<bool> running_{false};
    std::mutex shutdown_mutex_;
    bool shut_down_ = false;

    friend class BackendThread;
};

using EmbeddedBackend = Backend;

/// Runs a Backend until request_stop(); rethrows any failure from run().
void run_backend(Backend &backend);

/// Runs Backend::run() on a thread owned by this object.
class BackendThread
{
public:
    explicit BackendThread(Backend &backend);
    ~BackendThread();
    BackendThread(const BackendThread &) = delete;
    BackendThread &operator=(const BackendThread &) = delete;

    /// Stops the backend, joins, and rethrows whatever run() threw.
    void stop();

private:
    Backend &backend_;
    std::thread thread_;
    std::exception_ptr failure_;
};

std::int64_t monotonic_ns();

}  // namespace synchro80
