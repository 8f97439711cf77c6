// synchro80 command line: launch backends, log and monitor segments,
// issue bursts, print the segment layout, run the HYSR demo.

#include <synchro80/backend.hpp>
#include <synchro80/config_file.hpp>
#include <synchro80/drivers.hpp>
#include <synchro80/errors.hpp>
#include <synchro80/frontend.hpp>
#include <synchro80/hysr.hpp>
#include <synchro80/layout.hpp>

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

using namespace synchro80;

namespace
{
enum Exit
{
    exit_ok = 0,
    exit_other = 1,
    exit_bad_config = 2,
    exit_segment = 3,
    exit_driver = 4,
    exit_gaps = 5,
    exit_not_bursting = 6,
};

int exit_code_for(ErrorCode code)
{
    switch (code)
    {
        case ErrorCode::BadConfig:
        case ErrorCode::BadDof:
        case ErrorCode::BadTarget:
        case ErrorCode::BadMode:
            return exit_bad_config;
        case ErrorCode::AlreadyExists:
        case ErrorCode::NotFound:
        case ErrorCode::VersionMismatch:
        case ErrorCode::CorruptHeader:
        case ErrorCode::ResourceFailure:
        case ErrorCode::SegmentFailure:
            return exit_segment;
        case ErrorCode::DriverFailure:
        case ErrorCode::FileNotFound:
        case ErrorCode::FormatError:
            return exit_driver;
        case ErrorCode::NotBurstingMode:
            return exit_not_bursting;
        default:
            return exit_other;
    }
}

std::atomic<Backend *> g_backend{nullptr};
volatile std::sig_atomic_t g_interrupted = 0;

extern "C" void on_signal(int)
{
    g_interrupted = 1;
    if (Backend *b = g_backend.load())
    {
        b->request_stop();
    }
}

void install_signal_handlers()
{
    struct sigaction sa
    {
    };
    sa.sa_handler = on_signal;
    sigemptyset(&sa.sa_mask);
    sigaction(SIGINT, &sa, nullptr);
    sigaction(SIGTERM, &sa, nullptr);
}

int cmd_launch(const std::string &config_path)
{
    LaunchConfig cfg = load_launch_config(config_path);
    auto driver = make_driver(cfg.driver, cfg.driver_params, cfg.backend);
    install_signal_handlers();
    Backend backend(cfg.backend, std::move(driver));
    g_backend.store(&backend);
    std::cerr << "synchro80: segment '" << cfg.backend.segment_id << "' running ("
              << to_string(cfg.backend.mode) << ", " << cfg.backend.frequency_hz
              << " Hz, driver " << cfg.driver << ")" << std::endl;
    if (g_interrupted)
    {
        backend.request_stop();
    }
    try
    {
        run_backend(backend);
    }
    catch (...)
    {
        g_backend.store(nullptr);
        throw;
    }
    g_backend.store(nullptr);
    std::cerr << "synchro80: segment '" << cfg.backend.segment_id << "' stopped after "
              << backend.iteration() << " iterations" << std::endl;
    return exit_ok;
}

void write_csv_header(std::ostream &out, std::uint32_t ndof)
{
    out << "iteration,timestamp_ns,logical_time_ns,period_ns";
    for (std::uint32_t d = 0; d < ndof; ++d)
        out << ",desired_" << d;
    for (std::uint32_t d = 0; d < ndof; ++d)
        out << ",observed_" << d;
    out << ",payload_hex\n";
}

void write_csv_row(std::ostream &out, const Observation &obs)
{
    char num[32];
    out << obs.iteration << ',' << obs.timestamp_ns << ',' << obs.logical_time_ns << ','
        << obs.measured_period_ns;
    for (double v : obs.desired)
    {
        std::snprintf(num, sizeof num, "%.17g", v);
        out << ',' << num;
    }
    for (double v : obs.observed)
    {
        std::snprintf(num, sizeof num, "%.17g", v);
        out << ',' << num;
    }
    out << ',';
    static constexpr char hex[] = "0123456789abcdef";
    for (std::uint8_t b : obs.payload)
    {
        out << hex[b >> 4] << hex[b & 0xf];
    }
    out << '\n';
}

int cmd_log(const std::string &segment_id,
            const std::string &out_path,
            std::optional<std::uint64_t> from,
            std::optional<std::uint64_t> count)
{
    Frontend fe(segment_id);
    std::ofstream out(out_path);
    if (!out)
    {
        std::cerr << "synchro80 log: cannot write " << out_path << std::endl;
        return exit_other;
    }
    install_signal_handlers();
    const auto &config = fe.config();
    write_csv_header(out, config.ndof);

    std::uint64_t it = from.value_or(fe.iteration());
    const std::uint64_t end = count ? it + *count : UINT64_MAX;
    std::uint64_t rows = 0;
    std::uint64_t gaps = 0;
    while (it < end && !g_interrupted)
    {
        try
        {
            const Observation obs =
                fe.wait_for_iteration(it, std::chrono::milliseconds(200));
            write_csv_row(out, obs);
            ++rows;
            ++it;
        }
        catch (const Error &e)
        {
            if (e.code() == ErrorCode::WaitTimeout)
            {
                continue;
            }
            if (e.code() == ErrorCode::PeerStopped)
            {
                break;
            }
            if (e.code() != ErrorCode::Evicted)
            {
                throw;
            }
            const std::uint64_t current = fe.iteration();
            const std::uint64_t oldest =
                current > config.history_capacity ? current - config.history_capacity + 1 : 0;
            const std::uint64_t resume = std::min(std::max(oldest, it + 1), end);
            std::cerr << "synchro80 log: gap, iterations " << it << ".." << resume - 1
                      << " evicted" << std::endl;
            gaps += resume - it;
            it = resume;
        }
    }
    out.flush();
    std::cerr << "synchro80 log: " << rows << " rows, " << gaps << " missed iterations"
              << std::endl;
    return gaps > 0 ? exit_gaps : exit_ok;
}

int cmd_monitor(const std::string &segment_id, double interval_s, std::optional<std::uint64_t> lines)
{
    Frontend fe(segment_id);
    install_signal_handlers();
    const auto ndof = fe.config().ndof;
    std::uint64_t last_it = fe.iteration();
    auto last_t = std::chrono::steady_clock::now();
    for (std::uint64_t n = 0; !lines || n < *lines; ++n)
    {
        const auto wake = last_t + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                       std::chrono::duration<double>(interval_s));
        while (std::chrono::steady_clock::now() < wake && !g_interrupted &&
               fe.segment().peer_alive())
        {
            std::this_thread::sleep_until(
                std::min(wake, std::chrono::steady_clock::now() + std::chrono::milliseconds(20)));
        }
        if (g_interrupted)
        {
            return exit_ok;
        }
        if (!fe.segment().peer_alive())
        {
            std::cout << "status STOPPED iteration " << fe.iteration() << std::endl;
            return exit_ok;
        }
        const auto now = std::chrono::steady_clock::now();
        const std::uint64_t it = fe.iteration();
        const double dt = std::chrono::duration<double>(now - last_t).count();
        const double freq = static_cast<double>(it - last_it) / dt;
        std::uint64_t depth = 0;
        for (std::uint32_t d = 0; d < ndof; ++d)
        {
            depth += fe.segment().enqueue_count(d) - fe.segment().completed_count(d);
        }
        std::cout << "iteration " << it << " frequency_hz " << freq << " status "
                  << to_string(fe.segment().status()) << " queue_depth " << depth;
        if (it > 0)
        {
            try
            {
                const Observation obs = fe.latest();
                for (std::uint32_t d = 0; d < ndof; ++d)
                {
                    std::cout << " dof" << d << " desired " << obs.desired[d] << " observed "
                              << obs.observed[d];
                }
            }
            catch (const Error &)
            {
            }
        }
        std::cout << std::endl;
        last_it = it;
        last_t = now;
    }
    return exit_ok;
}

int cmd_burst(const std::string &segment_id, std::uint64_t n, std::optional<double> timeout_s)
{
    Frontend fe(segment_id);
    Timeout timeout;
    if (timeout_s)
    {
        timeout = std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::duration<double>(*timeout_s));
    }
    fe.burst(n, true, timeout);
    std::cout << "iteration " << fe.iteration() << std::endl;
    return exit_ok;
}

int cmd_offsets(const std::string &config_path)
{
    const LaunchConfig cfg = load_launch_config(config_path);
    std::cout << format_offset_table(cfg.backend);
    return exit_ok;
}

int cmd_hysr(double duration, bool no_sim, const std::string &stats_path)
{
    HysrOptions options;
    options.duration_s = duration;
    options.with_sim = !no_sim;
    const HysrReport report = run_hysr_demo(options);
    std::cout << report.summary();
    if (!stats_path.empty())
    {
        std::ofstream out(stats_path);
        out << report.stats();
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char **argv)
{
    CLI::App app{"synchro80: shared-memory backends, frontends and bursting"};
    app.require_subcommand(1);

    std::string config_path;
    auto *launch = app.add_subcommand("launch", "run a backend from a config file until SIGINT/SIGTERM");
    launch->add_option("config", config_path, "config file")->required();

    std::string segment_id;
    std::string out_path;
    std::optional<std::uint64_t> from;
    std::optional<std::uint64_t> count;
    auto *log = app.add_subcommand("log", "write observations to CSV, losslessly");
    log->add_option("segment_id", segment_id)->required();
    log->add_option("out_path", out_path)->required();
    log->add_option("--from", from, "first iteration (default: next one)");
    log->add_option("--count", count, "number of iterations (default: until the backend stops)");

    double interval = 1.0;
    std::optional<std::uint64_t> lines;
    auto *monitor = app.add_subcommand("monitor", "print iteration, frequency and states periodically");
    monitor->add_option("segment_id", segment_id)->required();
    monitor->add_option("--interval", interval, "seconds between lines")->check(CLI::PositiveNumber);
    monitor->add_option("--count", lines, "exit after this many lines");

    std::uint64_t burst_n = 1;
    std::optional<double> timeout_s;
    auto *burst = app.add_subcommand("burst", "request n iterations of a bursting backend and wait");
    burst->add_option("segment_id", segment_id)->required();
    burst->add_option("n", burst_n)->required()->check(CLI::PositiveNumber);
    burst->add_option("--timeout", timeout_s, "seconds");

    auto *offsets = app.add_subcommand("offsets", "print the segment byte layout for a config");
    offsets->add_option("config", config_path)->required();

    double duration = 2.0;
    bool no_sim = false;
    std::string stats_path;
    auto *hysr = app.add_subcommand("hysr", "run the hybrid sim/real demo");
    hysr->add_option("--duration", duration, "seconds")->check(CLI::PositiveNumber);
    hysr->add_flag("--no-sim", no_sim, "baseline without the simulated side");
    hysr->add_option("--stats", stats_path, "write key=value statistics to this file");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_bad_config;
    }

    try
    {
        if (*launch)
            return cmd_launch(config_path);
        if (*log)
            return cmd_log(segment_id, out_path, from, count);
        if (*monitor)
            return cmd_monitor(segment_id, interval, lines);
        if (*burst)
            return cmd_burst(segment_id, burst_n, timeout_s);
        if (*offsets)
            return cmd_offsets(config_path);
        if (*hysr)
            return cmd_hysr(duration, no_sim, stats_path);
    }
    catch (const Error &e)
    {
        std::cerr << "synchro80: " << e.what() << std::endl;
        return exit_code_for(e.code());
    }
    catch (const std::exception &e)
    {
        std::cerr << "synchro80: " << e.what() << std::endl;
        return exit_other;
    }
    return exit_other;
}
