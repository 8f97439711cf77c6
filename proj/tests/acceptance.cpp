// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Run with a criterion name to run only that one.

#include "helpers.hpp"
#include "interpolation_oracle.hpp"

#include <synchro80/backend.hpp>
#include <synchro80/drivers.hpp>
#include <synchro80/errors.hpp>
#include <synchro80/frontend.hpp>
#include <synchro80/hysr.hpp>
#include <synchro80/interpolation.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>

using namespace synchro80;
using namespace std::chrono_literals;
using test::Child;
using test::unique_id;

namespace
{
struct Outcome
{
    bool pass;
    std::string detail;
};

std::string fmt(const char *format, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::map<std::string, std::string> key_values(const std::string &text)
{
    std::map<std::string, std::string> out;
    for (const auto &line : test::lines_of(text))
    {
        const auto sp = line.find(' ');
        if (sp != std::string::npos)
            out[line.substr(0, sp)] = line.substr(sp + 1);
    }
    return out;
}

Outcome interpolation_oracle()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240501);
    std::uniform_real_distribution<double> start_dist(-10.0, 10.0);
    std::uniform_real_distribution<double> log_delta(std::log(0.1), std::log(100.0));
    std::uniform_int_distribution<int> which(0, 3);
    std::uniform_int_distribution<std::uint64_t> iterations(1, 500);
    std::uniform_int_distribution<std::uint64_t> micros(1, 1'000'000);
    std::uniform_real_distribution<double> seconds(0.001, 1.0);
    const std::int64_t periods[] = {2'000'000, 1'000'000};

    std::uint64_t evaluations = 0;
    std::uint64_t length_mismatch = 0;
    std::uint64_t over_tolerance = 0;
    std::uint64_t final_not_exact = 0;
    std::uint64_t mode_count[4] = {0, 0, 0, 0};
    double worst = 0.0;
    for (int i = 0; i < 10'000; ++i)
    {
        const double start = start_dist(rng);
        const double sign = rng() % 2 ? 1.0 : -1.0;
        const double target = start + sign * std::exp(log_delta(rng));
        const double delta = std::abs(target - start);
        const std::int64_t period = periods[rng() % 2];
        InterpolationMode m;
        const int w = which(rng);
        switch (w)
        {
        case 0: m = mode::Direct{}; break;
        case 1: m = mode::Duration{micros(rng)}; break;
        case 2: m = mode::Speed{delta / seconds(rng)}; break;
        default: m = mode::Iteration{iterations(rng)}; break;
        }
        ++mode_count[w];
        const ActiveCommand ac{Command{0, target, m, QueuePolicy::APPEND, 0}, start, 0, 0};
        const auto got = trajectory(ac, period);
        const auto want = test::oracle_walk(m, start, target, period);
        evaluations += got.size();
        if (got.size() != want.size())
        {
            ++length_mismatch;
            continue;
        }
        for (std::size_t k = 0; k < got.size(); ++k)
        {
            const double err = std::abs(got[k] - want[k]);
            worst = std::max(worst, err / delta);
            if (err > 1e-12 * delta)
                ++over_tolerance;
        }
        if (std::bit_cast<std::uint64_t>(got.back()) != std::bit_cast<std::uint64_t>(target))
            ++final_not_exact;
    }
    const double elapsed = seconds_since(t0);
    const bool pass = length_mismatch == 0 && over_tolerance == 0 && final_not_exact == 0 &&
                      elapsed < 10.0;
    return {pass, fmt("10000 commands (direct %llu, duration %llu, speed %llu, iteration %llu), "
                      "%llu evaluations, worst error %.3g*|delta|, length mismatches %llu, "
                      "over tolerance %llu, inexact finals %llu, %.2f s",
                      (unsigned long long)mode_count[0], (unsigned long long)mode_count[1],
                      (unsigned long long)mode_count[2], (unsigned long long)mode_count[3],
                      (unsigned long long)evaluations, worst, (unsigned long long)length_mismatch,
                      (unsigned long long)over_tolerance, (unsigned long long)final_not_exact,
                      elapsed)};
}

std::vector<Observation> scripted_burst_run(const std::string &id,
                                            const std::vector<std::uint64_t> &bursts)
{
    BackendConfig c;
    c.segment_id = id;
    c.ndof = 2;
    c.mode = SyncMode::BURSTING;
    Backend backend(c, std::make_shared<MuscleDriver>(2, 0.002));
    BackendThread thread(backend);
    Frontend fe(id);
    fe.add_command(0, 1.0, mode::Duration{30'000});
    fe.add_command(1, -2.0, mode::Speed{7.5});
    fe.add_command(0, 0.3, mode::Iteration{11});
    fe.add_command(1, 0.0, mode::Direct{});
    fe.pulse();
    for (std::uint64_t n : bursts)
        fe.burst(n);
    std::vector<Observation> history;
    for (std::uint64_t k = 0; k < fe.iteration(); ++k)
        history.push_back(fe.read(k));
    thread.stop();
    return history;
}

Outcome bursting_exactness()
{
    std::mt19937_64 rng(99);
    int trials = 0;
    int wrong_totals = 0;
    int ran_outside = 0;
    std::uint64_t total_iterations = 0;
    for (; trials < 20; ++trials)
    {
        const std::string id = unique_id("exact");
        BackendConfig c;
        c.segment_id = id;
        c.ndof = 1;
        c.mode = SyncMode::BURSTING;
        Backend backend(c, std::make_shared<IntegratorDriver>(1, 0.002));
        BackendThread thread(backend);
        Frontend fe(id);
        std::uint64_t expected = 0;
        const int bursts = 1 + static_cast<int>(rng() % 10);
        for (int b = 0; b < bursts; ++b)
        {
            const std::uint64_t n = 1 + rng() % 60;
            if (b % 3 == 2)
            {
                // two requesters at once
                const std::uint64_t n2 = 1 + rng() % 60;
                std::thread other([&] { Frontend(id).burst(n2); });
                fe.burst(n);
                other.join();
                expected += n2;
            }
            else
            {
                fe.burst(n);
            }
            expected += n;
            if (fe.segment().burst_completed() != fe.segment().burst_requested())
                ++wrong_totals;
        }
        if (fe.iteration() != expected)
            ++wrong_totals;
        std::this_thread::sleep_for(20ms);
        if (fe.iteration() != expected)
            ++ran_outside;
        total_iterations += expected;
        thread.stop();
    }
    const std::vector<std::uint64_t> script = {1, 4, 17, 2, 40, 9};
    const auto a = scripted_burst_run(unique_id("repeat"), script);
    const auto b = scripted_burst_run(unique_id("repeat"), script);
    bool identical = a.size() == 73 && a.size() == b.size();
    for (std::size_t k = 0; identical && k < a.size(); ++k)
    {
        identical = a[k].desired == b[k].desired && a[k].observed == b[k].observed &&
                    a[k].logical_time_ns == b[k].logical_time_ns;
    }
    const bool pass = wrong_totals == 0 && ran_outside == 0 && identical;
    return {pass, fmt("%d random burst sequences (%llu iterations): %d count mismatches, "
                      "%d runs with iterations outside bursts; repeat runs bit-identical: %s",
                      trials, (unsigned long long)total_iterations, wrong_totals, ran_outside,
                      identical ? "yes" : "no")};
}

Outcome frequency_pacing()
{
    const std::string id = unique_id("pacing");
    BackendConfig c;
    c.segment_id = id;
    c.ndof = 2;
    c.frequency_hz = 500;
    Backend backend(c, std::make_shared<IntegratorDriver>(2, 0.002));
    {
        BackendThread thread(backend);
        std::this_thread::sleep_for(5s);
        thread.stop();
    }
    const std::uint64_t n = backend.iteration();
    std::vector<Observation> history;
    // the segment is unlinked but the owner's mapping is still readable
    Observation o;
    for (std::uint64_t k = 0; k < n; ++k)
    {
        if (backend.segment().read_observation(k, o) == ReadStatus::Ok)
            history.push_back(o);
    }
    const double span_ms =
        static_cast<double>(history.back().timestamp_ns - history.front().timestamp_ns) * 1e-6;
    const double nominal_ms = static_cast<double>(n) * 2.0;
    const PeriodStats s = period_stats(history);
    const bool count_ok = n >= 2375 && n <= 2625;
    const bool span_ok = std::abs(span_ms - nominal_ms) <= 0.05 * nominal_ms;
    return {count_ok && span_ok && history.size() == n,
            fmt("%llu iterations in 5 s (2375..2625), timestamp span %.1f ms vs %.1f ms "
                "nominal (%+.2f%%); period mean %.1f us, jitter stddev %.1f us, min %.1f us, "
                "max %.1f us",
                (unsigned long long)n, span_ms, nominal_ms,
                100.0 * (span_ms - nominal_ms) / nominal_ms, s.mean_ns * 1e-3, s.stddev_ns * 1e-3,
                s.min_ns * 1e-3, s.max_ns * 1e-3)};
}

Outcome lossless_tailing()
{
    const std::string id = unique_id("tail");
    BackendConfig c;
    c.segment_id = id;
    c.ndof = 2;
    c.frequency_hz = 500;
    c.history_capacity = 4096;
    c.payload_capacity = 16;
    Backend backend(c, std::make_shared<test::PatternDriver>(2, 16));
    Child tail({SYNCHRO80_PEER, "tail", id, "0", "10000"});
    Child poll({SYNCHRO80_PEER, "poll-latest", id});
    std::this_thread::sleep_for(300ms);
    {
        BackendThread thread(backend);
        Frontend fe(id);
        fe.wait_for_iteration(10'000, 60s);
        tail.wait(30s);
        thread.stop();
    }
    const int poll_rc = poll.wait(10s);
    auto t = key_values(tail.output());
    auto p = key_values(poll.output());
    const bool tail_ok = t["received"] == "10000" && t["in_order"] == "10000" &&
                         t["bad_pattern"] == "0";
    const bool poll_ok = poll_rc == 0 && p["torn"] == "0" && !p["reads"].empty() &&
                         p["reads"] != "0";
    return {tail_ok && poll_ok,
            fmt("tail received %s of 10000 (in order %s, pattern errors %s); latest() poller: "
                "%s reads over %s distinct iterations, %s torn",
                t["received"].c_str(), t["in_order"].c_str(), t["bad_pattern"].c_str(),
                p["reads"].c_str(), p["distinct"].c_str(), p["torn"].c_str())};
}

Outcome command_semantics()
{
    // FIFO per dof under 4 producer processes
    const std::string id = unique_id("fifo");
    BackendConfig c;
    c.segment_id = id;
    c.ndof = 2;
    c.command_ring_capacity = 64;
    Segment owner = Segment::create(c);
    std::vector<std::unique_ptr<Child>> producers;
    for (int p = 0; p < 4; ++p)
        producers.push_back(std::make_unique<Child>(
            std::vector<std::string>{SYNCHRO80_PEER, "push", id, "0", "250"}));
    std::vector<std::uint64_t> consumed;
    const auto deadline = std::chrono::steady_clock::now() + 60s;
    while (consumed.size() < 1000 && std::chrono::steady_clock::now() < deadline)
    {
        for (const Command &cmd : owner.pop_commands(16))
            consumed.push_back(cmd.position);
        std::this_thread::sleep_for(50us);
    }
    bool increasing = consumed.size() == 1000;
    for (std::size_t i = 0; increasing && i < consumed.size(); ++i)
        increasing = consumed[i] == i;
    std::vector<std::uint64_t> tickets;
    bool per_producer_increasing = true;
    for (auto &p : producers)
    {
        p->wait(10s);
        std::uint64_t prev = 0;
        bool first = true;
        for (const auto &line : test::lines_of(p->output()))
        {
            const std::uint64_t pos = std::stoull(line);
            per_producer_increasing = per_producer_increasing && (first || pos > prev);
            prev = pos;
            first = false;
            tickets.push_back(pos);
        }
    }
    std::sort(tickets.begin(), tickets.end());
    bool permutation = tickets.size() == 1000;
    for (std::size_t i = 0; permutation && i < tickets.size(); ++i)
        permutation = tickets[i] == i;

    // OVERWRITE purge releases waiters on the purged commands
    const std::string sid = unique_id("purge");
    BackendConfig bc;
    bc.segment_id = sid;
    bc.ndof = 1;
    bc.mode = SyncMode::BURSTING;
    Backend backend(bc, std::make_shared<IntegratorDriver>(1, 0.002));
    BackendThread thread(backend);
    Frontend waiter(sid);
    waiter.add_command(0, 100.0, mode::Iteration{1'000'000});
    waiter.add_command(0, 50.0, mode::Duration{100'000'000});
    waiter.add_command(0, 25.0, mode::Speed{0.001});
    waiter.pulse();
    waiter.burst(3);
    std::optional<ErrorCode> wait_result;
    bool returned = false;
    std::thread blocked([&] {
        wait_result = test::error_code([&] { waiter.pulse_and_wait(10s); });
        returned = true;
    });
    std::this_thread::sleep_for(50ms);
    const bool blocked_before = !returned;
    Frontend interrupter(sid);
    interrupter.add_command(0, 0.0, mode::Direct{}, QueuePolicy::OVERWRITE);
    interrupter.pulse();
    const auto t0 = std::chrono::steady_clock::now();
    interrupter.burst(1);
    blocked.join();
    const double released_after = seconds_since(t0);
    const bool purge_ok = blocked_before && returned && !wait_result &&
                          released_after < 1.0 && interrupter.latest().desired[0] == 0.0;
    thread.stop();

    return {increasing && permutation && per_producer_increasing && purge_ok,
            fmt("4 producer processes x 250 commands: consumed %zu, positions in consumption "
                "order strictly increasing: %s, tickets a permutation of 0..999: %s; "
                "OVERWRITE released pulse_and_wait after %.1f ms with %s",
                consumed.size(), increasing ? "yes" : "no", permutation ? "yes" : "no",
                released_after * 1e3,
                wait_result ? std::string(to_string(*wait_result)).c_str() : "no error")};
}

Outcome hysr_topology()
{
    HysrOptions base;
    base.duration_s = 2.0;
    base.with_sim = false;
    base.segment_prefix = unique_id("hysr-base");
    const HysrReport baseline = run_hysr_demo(base);

    HysrOptions o;
    o.duration_s = 2.0;
    o.segment_prefix = unique_id("hysr");
    const HysrReport r = run_hysr_demo(o);

    bool mirrors_equal = r.sim_state.size() == r.env_steps && r.mirror_mismatches == 0;
    for (std::size_t k = 0; mirrors_equal && k < r.sim_state.size(); ++k)
    {
        const auto &a = r.sim_state[k];
        const auto &b = r.mirrored_state[k];
        mirrors_equal = a.size() == b.size() &&
                        std::equal(a.begin(), a.end(), b.begin(), [](double x, double y) {
                            return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
                        });
    }
    const bool real_ok = r.real_iterations >= 950 && r.real_iterations <= 1050;
    const bool sim_ok = r.sim_iterations == r.env_steps * 5 && r.env_steps == 200;
    const double rel =
        std::abs(r.real_period.mean_ns - baseline.real_period.mean_ns) / baseline.real_period.mean_ns;
    const double rel_sd = baseline.real_period.stddev_ns > 0
                              ? r.real_period.stddev_ns / baseline.real_period.stddev_ns
                              : 0.0;
    return {real_ok && sim_ok && mirrors_equal && rel <= 0.10,
            fmt("real iterations %llu (950..1050), env steps %llu, sim iterations %llu "
                "(expected %llu), mirrors bit-equal: %s; real period mean %.1f us vs baseline "
                "%.1f us (%.2f%%), stddev %.1f us vs %.1f us (x%.2f)",
                (unsigned long long)r.real_iterations, (unsigned long long)r.env_steps,
                (unsigned long long)r.sim_iterations, (unsigned long long)(r.env_steps * 5),
                mirrors_equal ? "yes" : "no", r.real_period.mean_ns * 1e-3,
                baseline.real_period.mean_ns * 1e-3, rel * 100.0, r.real_period.stddev_ns * 1e-3,
                baseline.real_period.stddev_ns * 1e-3, rel_sd)};
}

Outcome layout_conformance()
{
    Child offsets({SYNCHRO80_CLI, "offsets", SYNCHRO80_GOLDEN_DIR "/robo.conf"});
    const int rc = offsets.wait(30s);
    std::ifstream in(SYNCHRO80_GOLDEN_DIR "/offsets_robo.txt");
    std::stringstream golden;
    golden << in.rdbuf();
    const bool golden_ok = rc == 0 && offsets.output() == golden.str();

    const std::string id = unique_id("xproc");
    BackendConfig c;
    c.segment_id = id;
    c.ndof = 2;
    c.frequency_hz = 500;
    c.mode = SyncMode::BURSTING;
    c.history_capacity = 256;
    c.payload_capacity = 48;
    c.command_ring_capacity = 64;
    Backend backend(c, std::make_shared<MirrorSimDriver>(2, default_ball_trajectory()));
    Frontend fe(id);
    fe.add_command(0, 0.7071067811865476, mode::Iteration{5});
    fe.add_command(1, -1.0 / 3.0, mode::Speed{2.0});
    fe.pulse();
    backend.step(10);

    Child peer({SYNCHRO80_PEER, "inspect", id, "7"});
    const int peer_rc = peer.wait(30s);
    auto got = test::lines_of(peer.output());

    const Observation o = fe.read(7);
    std::vector<std::string> want = {
        "segment_id " + id,
        "ndof 2",
        "frequency_hz 500",
        "mode bursting",
        "history_capacity 256",
        "payload_capacity 48",
        "command_ring_capacity 64",
        fmt("iteration %llu", (unsigned long long)o.iteration),
        fmt("timestamp_ns %lld", (long long)o.timestamp_ns),
        fmt("logical_time_ns %lld", (long long)o.logical_time_ns),
        fmt("measured_period_ns %lld", (long long)o.measured_period_ns),
    };
    for (double v : o.desired)
        want.push_back(fmt("desired %.17g", v));
    for (double v : o.observed)
        want.push_back(fmt("observed %.17g", v));
    std::string hex = "payload ";
    for (auto b : o.payload)
        hex += fmt("%02x", b);
    want.push_back(hex);
    const bool attach_ok = peer_rc == 0 && got == want;
    std::size_t first_diff = 0;
    while (first_diff < std::min(got.size(), want.size()) && got[first_diff] == want[first_diff])
        ++first_diff;
    return {golden_ok && attach_ok,
            fmt("offset table matches golden file: %s; second process read %zu identical "
                "config/observation lines of %zu%s",
                golden_ok ? "yes" : "no", first_diff, want.size(),
                attach_ok ? "" : (" (differs at: " + (first_diff < got.size() ? got[first_diff] : "<missing>") + ")").c_str())};
}

}  // namespace

int main(int argc, char **argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"interpolation_oracle", interpolation_oracle},
        {"bursting_exactness", bursting_exactness},
        {"frequency_pacing", frequency_pacing},
        {"lossless_tailing", lossless_tailing},
        {"command_semantics", command_semantics},
        {"hysr_topology", hysr_topology},
        {"layout_conformance", layout_conformance},
    };
    int failures = 0;
    int ran = 0;
    for (const auto &[name, run] : criteria)
    {
        if (argc > 1 && name != argv[1])
            continue;
        ++ran;
        Outcome outcome;
        try
        {
            outcome = run();
        }
        catch (const std::exception &e)
        {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %s: %s\n", outcome.pass ? "PASS" : "FAIL", name.c_str(),
                    outcome.detail.c_str());
        std::fflush(stdout);
        failures += outcome.pass ? 0 : 1;
    }
    if (ran == 0)
    {
        std::fprintf(stderr, "unknown criterion %s\n", argv[1]);
        return 2;
    }
    std::printf("%d/%d criteria passed\n", ran - failures, ran);
    return failures == 0 ? 0 : 1;
}
