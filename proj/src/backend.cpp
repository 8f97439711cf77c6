#include <synchro80/backend.hpp>
#include <synchro80/errors.hpp>

#include <cerrno>
#include <ctime>

namespace synchro80
{
std::int64_t monotonic_ns()
{
    timespec ts{};
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return std::int64_t{ts.tv_sec} * 1'000'000'000 + ts.tv_nsec;
}

namespace
{
void sleep_until_ns(std::int64_t deadline_ns)
{
    timespec ts{};
    ts.tv_sec = static_cast<time_t>(deadline_ns / 1'000'000'000);
    ts.tv_nsec = static_cast<long>(deadline_ns % 1'000'000'000);
    while (clock_nanosleep(CLOCK_MONOTONIC, TIMER_ABSTIME, &ts, nullptr) == EINTR)
    {
    }
}

Driver::Sensed checked_get(Driver &driver, const BackendConfig &config)
{
    Driver::Sensed sensed = driver.get();
    if (sensed.observed.size() != config.ndof)
    {
        throw Error(ErrorCode::DriverFailure,
                    "driver returned " + std::to_string(sensed.observed.size()) +
                        " states for " + std::to_string(config.ndof) + " dofs");
    }
    if (sensed.payload.size() > config.payload_capacity)
    {
        throw Error(ErrorCode::DriverFailure,
                    "driver payload of " + std::to_string(sensed.payload.size()) +
                        " bytes exceeds capacity " +
                        std::to_string(config.payload_capacity));
    }
    return sensed;
}

[[noreturn]] void rethrow_as_driver_failure()
{
    try
    {
        throw;
    }
    catch (const Error &e)
    {
        if (e.code() == ErrorCode::DriverFailure)
        {
            throw;
        }
        throw Error(ErrorCode::DriverFailure, e.what());
    }
    catch (const std::exception &e)
    {
        throw Error(ErrorCode::DriverFailure, e.what());
    }
}
}  // namespace

Backend::Backend(const BackendConfig &config, std::shared_ptr<Driver> driver)
    : config_(config),
      driver_(std::move(driver)),
      segment_(Segment::create(config)),
      period_ns_(config.nominal_period_ns()),
      dofs_(config.ndof),
      finished_(config.ndof, 0)
{
    try
    {
        driver_->start();
        Driver::Sensed initial = checked_get(*driver_, config_);
        for (std::uint32_t d = 0; d < config_.ndof; ++d)
        {
            dofs_[d].current_desired = initial.observed[d];
        }
    }
    catch (...)
    {
        segment_.destroy();
        rethrow_as_driver_failure();
    }
    desired_.resize(config_.ndof);
    segment_.set_status(Status::RUNNING);
}

Backend::~Backend()
{
    stop();
}

void Backend::dispatch(const Command &cmd)
{
    DofState &dof = dofs_[cmd.dof];
    if (cmd.policy == QueuePolicy::OVERWRITE)
    {
        const std::uint64_t purged = (dof.active ? 1 : 0) + dof.queue.size();
        dof.active.reset();
        dof.queue.clear();
        finished_[cmd.dof] += purged;
    }
    dof.queue.push_back(cmd);
}

Observation Backend::iterate()
{
    if (shut_down_)
    {
        throw Error(ErrorCode::SegmentFailure, "backend is stopped");
    }
    const auto it = static_cast<std::int64_t>(segment_.iteration());
    const std::int64_t logical = it * period_ns_;

    for (const Command &cmd : segment_.pop_commands(config_.command_ring_capacity))
    {
        if (cmd.dof >= config_.ndof)
        {
            continue;
        }
        dispatch(cmd);
    }

    for (std::uint32_t d = 0; d < config_.ndof; ++d)
    {
        DofState &dof = dofs_[d];
        if (!dof.active && !dof.queue.empty())
        {
            dof.active = ActiveCommand{
                dof.queue.front(), dof.current_desired, it - 1, logical - period_ns_};
            dof.queue.pop_front();
        }
        if (dof.active)
        {
            const Setpoint sp = desired_at(*dof.active, it, logical);
            dof.current_desired = sp.value;
            if (sp.completed)
            {
                dof.active.reset();
                ++finished_[d];
            }
        }
        desired_[d] = dof.current_desired;
    }

    Driver::Sensed sensed;
    try
    {
        driver_->set(desired_);
        sensed = checked_get(*driver_, config_);
    }
    catch (...)
    {
        shutdown();
        rethrow_as_driver_failure();
    }

    Observation obs;
    obs.iteration = static_cast<std::uint64_t>(it);
    obs.timestamp_ns = monotonic_ns();
    obs.logical_time_ns = logical;
    obs.measured_period_ns =
        last_timestamp_ns_ < 0 ? 0 : obs.timestamp_ns - last_timestamp_ns_;
    last_timestamp_ns_ = obs.timestamp_ns;
    obs.desired = desired_;
    obs.observed = std::move(sensed.observed);
    obs.payload = std::move(sensed.payload);
    obs.payload.resize(config_.payload_capacity, 0);
    segment_.write_observation(obs);
    // completions become visible only with the observation that shows them
    for (std::uint32_t d = 0; d < config_.ndof; ++d)
    {
        if (finished_[d] > 0)
        {
            segment_.add_completed(d, finished_[d]);
            finished_[d] = 0;
        }
    }
    return obs;
}

void Backend::step(std::uint64_t n)
{
    for (std::uint64_t i = 0; i < n; ++i)
    {
        iterate();
    }
}

std::uint64_t Backend::serve_burst(Timeout timeout)
{
    const std::uint64_t pending =
        timeout ? segment_.try_await_burst(*timeout) : segment_.await_burst();
    if (pending == 0)
    {
        return 0;
    }
    step(pending);
    segment_.complete_iterations(pending);
    return pending;
}

void Backend::run()
{
    running_.store(true);
    try
    {
        if (config_.mode == SyncMode::NORMAL)
        {
            run_normal();
        }
        else
        {
            run_bursting();
        }
    }
    catch (...)
    {
        shutdown();
        running_.store(false);
        throw;
    }
    shutdown();
    running_.store(false);
}

void Backend::run_normal()
{
    // absolute deadlines: a late iteration runs immediately and the
    // schedule is not shifted
    std::int64_t deadline = monotonic_ns();
    constexpr std::int64_t max_sleep_ns = 50'000'000;
    while (!stop_requested_.load(std::memory_order_relaxed))
    {
        iterate();
        deadline += period_ns_;
        while (!stop_requested_.load(std::memory_order_relaxed))
        {
            const std::int64_t now = monotonic_ns();
            if (now >= deadline)
            {
                break;
            }
            sleep_until_ns(std::min(deadline, now + max_sleep_ns));
        }
    }
}

void Backend::run_bursting()
{
    while (!stop_requested_.load(std::memory_order_relaxed))
    {
        const std::uint64_t pending =
            segment_.try_await_burst(std::chrono::milliseconds(10));
        if (pending == 0)
        {
            continue;
        }
        step(pending);
        segment_.complete_iterations(pending);
    }
}

void Backend::request_stop() noexcept
{
    stop_requested_.store(true, std::memory_order_relaxed);
}

void Backend::stop()
{
    request_stop();
    while (running_.load())
    {
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    shutdown();
}

void Backend::shutdown() noexcept
{
    std::lock_guard<std::mutex> lock(shutdown_mutex_);
    if (shut_down_)
    {
        return;
    }
    shut_down_ = true;
    try
    {
        driver_->stop();
    }
    catch (...)
    {
    }
    segment_.destroy();
}

void run_backend(Backend &backend)
{
    backend.run();
}

BackendThread::BackendThread(Backend &backend) : backend_(backend)
{
    // set before the thread exists so that an early stop() waits for run()
    backend_.running_.store(true);
    thread_ = std::thread([this] {
        try
        {
            backend_.run();
        }
        catch (...)
        {
            failure_ = std::current_exception();
        }
    });
}

BackendThread::~BackendThread()
{
    backend_.request_stop();
    if (thread_.joinable())
    {
        thread_.join();
    }
}

void BackendThread::stop()
{
    backend_.request_stop();
    if (thread_.joinable())
    {
        thread_.join();
    }
    if (failure_)
    {
        std::rethrow_exception(std::exchange(failure_, nullptr));
    }
}

}  // namespace synchro80
