#include "helpers.hpp"

#include <synchro80/backend.hpp>
#include <synchro80/drivers.hpp>
#include <synchro80/errors.hpp>
#include <synchro80/frontend.hpp>

#include <doctest.h>

#include <limits>
#include <optional>
#include <thread>

using namespace synchro80;
using namespace std::chrono_literals;
using test::error_code;
using test::unique_id;

namespace
{
BackendConfig config_for(const std::string &id, SyncMode mode, std::uint32_t ring = 1024)
{
    BackendConfig c;
    c.segment_id = id;
    c.ndof = 2;
    c.mode = mode;
    c.command_ring_capacity = ring;
    return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace

TEST_CASE("staging and pulsing")
{
    const std::string id = unique_id("stage");
    Backend backend(config_for(id, SyncMode::BURSTING), std::make_shared<IntegratorDriver>(2, 0.002));
    Frontend fe(id);

    CHECK(fe.pulse().empty());
    fe.add_command(0, 1);
    fe.add_command(1, 2);
    fe.add_command(0, 3);
    CHECK(fe.staged() == 3);
    CHECK(fe.segment().enqueue_count(0) == 0);
    CHECK(error_code([&] { fe.add_command(2, 0); }) == ErrorCode::BadDof);
    CHECK(error_code([&] { fe.add_command(0, std::numeric_limits<double>::infinity()); }) == ErrorCode::BadTarget);
    CHECK(fe.staged() == 3);

    const auto tickets = fe.pulse();
    CHECK(fe.staged() == 0);
    REQUIRE(tickets.size() == 3);
    CHECK(tickets[0].position == 0);
    CHECK(tickets[1].dof == 1);
    CHECK(tickets[2].position == 1);
    CHECK(fe.pending().size() == 3);

    // the next pair for dof 0 continues at k = 2
    fe.add_command(0, 4);
    fe.add_command(0, 5);
    const auto next = fe.pulse();
    REQUIRE(next.size() == 2);
    CHECK(next[0].position == 2);
    CHECK(next[1].position == 3);
    CHECK(fe.pending().size() == 5);

    backend.step(4);
    CHECK_NOTHROW(fe.pulse_and_wait(100ms));
    CHECK(fe.pending().empty());
    CHECK(fe.latest().desired == std::vector<double>{5, 2});
}

TEST_CASE("RingFull keeps the unsent commands staged")
{
    const std::string id = unique_id("full");
    Backend backend(config_for(id, SyncMode::BURSTING, 4), std::make_shared<IntegratorDriver>(2, 0.002));
    Frontend fe(id);
    for (int i = 0; i < 6; ++i)
        fe.add_command(0, i);
    try
    {
        fe.pulse();
        FAIL("expected RingFull");
    }
    catch (const RingFullError &e)
    {
        CHECK(e.code() == ErrorCode::RingFull);
        CHECK(e.unsent() == 2);
        CHECK(e.sent().size() == 4);
    }
    CHECK(fe.staged() == 2);
    CHECK(fe.pending().size() == 4);
    backend.step(1);
    const auto rest = fe.pulse();
    REQUIRE(rest.size() == 2);
    CHECK(rest[0].position == 4);
    backend.step(6);
    CHECK_NOTHROW(fe.pulse_and_wait(100ms));
    CHECK(fe.latest().desired[0] == 5.0);
}

TEST_CASE("10000 commands through a 1024-slot ring")
{
    const std::string id = unique_id("flood");
    // one Direct command per dof activates per iteration
    BackendConfig c = config_for(id, SyncMode::NORMAL);
    c.frequency_hz = 5000;
    Backend backend(c, std::make_shared<IntegratorDriver>(2, 0.0002));
    std::optional<BackendThread> thread;
    Frontend fe(id);
    for (int i = 0; i < 10'000; ++i)
        fe.add_command(static_cast<std::uint32_t>(i % 2), i);
    std::size_t tickets = 0;
    int retries = 0;
    while (fe.staged() > 0)
    {
        try
        {
            tickets += fe.pulse().size();
        }
        catch (const RingFullError &e)
        {
            tickets += e.sent().size();
            ++retries;
            // the first batch fills the ring before the backend starts draining
            if (!thread)
                thread.emplace(backend);
            std::this_thread::sleep_for(5ms);
        }
    }
    CHECK(tickets == 10'000);
    CHECK(retries > 0);
    CHECK(fe.pending().size() == 10'000);
    CHECK_NOTHROW(fe.pulse_and_wait(30s));
    CHECK(fe.segment().completed_count(0) == 5000);
    CHECK(fe.segment().completed_count(1) == 5000);
    fe.wait_for_iteration(fe.iteration(), 1s);
    CHECK(fe.latest().desired == std::vector<double>{9998, 9999});
    REQUIRE(thread);
    thread->stop();
}

TEST_CASE("pulse_and_wait timing at 500 Hz")
{
    const std::string id = unique_id("timing");
    Backend backend(config_for(id, SyncMode::NORMAL), std::make_shared<IntegratorDriver>(2, 0.002));
    BackendThread thread(backend);
    Frontend fe(id);
    fe.wait_for_iteration(0, 1s);

    const std::uint64_t before = fe.iteration();
    fe.add_command(0, 1.0);
    fe.pulse_and_wait(1s);
    CHECK(fe.iteration() - before <= 3);
    // the observation that completed the command is already published
    CHECK(fe.latest().desired[0] == 1.0);

    fe.add_command(1, 2.0, mode::Iteration{100});
    const auto t0 = std::chrono::steady_clock::now();
    fe.pulse_and_wait(2s);
    const double elapsed = seconds_since(t0);
    CHECK(elapsed > 0.15);
    CHECK(elapsed < 0.25);
    thread.stop();
}

TEST_CASE("pulse_and_wait on a stopped backend")
{
    const std::string id = unique_id("stopped");
    Backend backend(config_for(id, SyncMode::BURSTING), std::make_shared<IntegratorDriver>(2, 0.002));
    Frontend fe(id);
    fe.add_command(0, 1.0, mode::Iteration{1000});
    fe.pulse();
    std::optional<ErrorCode> result;
    std::thread t([&] { result = error_code([&] { fe.pulse_and_wait(10s); }); });
    std::this_thread::sleep_for(30ms);
    backend.stop();
    t.join();
    CHECK(result == ErrorCode::PeerStopped);
    CHECK(error_code([&] { fe.wait_for_iteration(0, 1s); }) == ErrorCode::PeerStopped);
}

TEST_CASE("wait_for_iteration on a fresh backend")
{
    const std::string id = unique_id("first");
    Backend backend(config_for(id, SyncMode::NORMAL), std::make_shared<IntegratorDriver>(2, 0.002));
    Frontend fe(id);
    const auto t0 = std::chrono::steady_clock::now();
    BackendThread thread(backend);
    const Observation o = fe.wait_for_iteration(0, 1s);
    CHECK(seconds_since(t0) < 0.1);
    CHECK(o.iteration == 0);
    fe.wait_for_iteration(9, 1s);
    CHECK(fe.read(9).iteration == 9);
    CHECK(error_code([&] { fe.wait_for_iteration(1'000'000, 10ms); }) == ErrorCode::WaitTimeout);
    thread.stop();
}

TEST_CASE("burst")
{
    const std::string id = unique_id("fast");
    Backend backend(config_for(id, SyncMode::BURSTING), std::make_shared<IntegratorDriver>(2, 0.002));
    BackendThread thread(backend);
    Frontend fe(id);
    CHECK(error_code([&] { fe.latest(); }) == ErrorCode::NoObservationYet);
    fe.burst(1);
    CHECK(fe.iteration() == 1);
    CHECK(fe.latest().iteration == 0);

    const auto t0 = std::chrono::steady_clock::now();
    fe.burst(1000);
    const double elapsed = seconds_since(t0);
    MESSAGE("burst(1000) took " << elapsed << " s");
    CHECK(fe.iteration() == 1001);
    // 1000 paced iterations would take 2 s
    CHECK(elapsed < 0.5);

    fe.burst(10, false);
    REQUIRE(test::eventually([&] { return fe.iteration() == 1011; }));
    thread.stop();
}
