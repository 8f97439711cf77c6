#pragma once

#include <synchro80/backend.hpp>
#include <synchro80/errors.hpp>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <fcntl.h>
#include <fstream>
#include <optional>
#include <signal.h>
#include <spawn.h>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>
#include <vector>

extern char **environ;

namespace synchro80::test
{
/// Segment ids unique per process and call, so parallel test runs never collide.
inline std::string unique_id(const std::string &stem)
{
    static std::atomic<int> counter{0};
    return "t" + std::to_string(getpid()) + "-" + stem + "-" + std::to_string(counter++);
}

/// Driver whose every reading encodes the iteration: observed[d] == k and
/// every payload byte == k & 0xff during iteration k.
class PatternDriver : public Driver
{
public:
    PatternDriver(std::uint32_t ndof, std::uint32_t payload_bytes)
        : ndof_(ndof), payload_bytes_(payload_bytes)
    {
    }
    void set(std::span<const double>) override
    {
        ++sets_;
    }
    Sensed get() override
    {
        const auto k = static_cast<std::int64_t>(sets_) - 1;
        return {std::vector<double>(ndof_, static_cast<double>(k)),
                std::vector<std::uint8_t>(payload_bytes_, static_cast<std::uint8_t>(k & 0xff))};
    }

private:
    std::uint32_t ndof_;
    std::uint32_t payload_bytes_;
    std::uint64_t sets_ = 0;
};

/// True iff the observation has the PatternDriver signature of its iteration.
inline bool uniform_pattern(const Observation &obs)
{
    for (double v : obs.observed)
    {
        if (v != static_cast<double>(obs.iteration))
            return false;
    }
    for (std::uint8_t b : obs.payload)
    {
        if (b != static_cast<std::uint8_t>(obs.iteration & 0xff))
            return false;
    }
    return true;
}

/// Records every set() so tests can inspect what the backend commanded.
class RecordingDriver : public Driver
{
public:
    explicit RecordingDriver(std::uint32_t ndof, double initial = 0.0)
        : state_(ndof, initial)
    {
    }
    void set(std::span<const double> control) override
    {
        sets.emplace_back(control.begin(), control.end());
        state_.assign(control.begin(), control.end());
    }
    Sensed get() override
    {
        ++gets;
        return {state_, {}};
    }
    std::vector<std::vector<double>> sets;
    std::size_t gets = 0;

private:
    std::vector<double> state_;
};

class FailingDriver : public Driver
{
public:
    explicit FailingDriver(int fail_after) : fail_after_(fail_after)
    {
    }
    void set(std::span<const double>) override
    {
        if (--fail_after_ < 0)
            throw std::runtime_error("actuator fault");
    }
    Sensed get() override
    {
        return {{0.0}, {}};
    }
    bool stopped = false;
    void stop() override
    {
        stopped = true;
    }

private:
    int fail_after_;
};

/// Child process started with posix_spawn; stdout and stderr go to temp files.
class Child
{
public:
    explicit Child(const std::vector<std::string> &args)
    {
        static std::atomic<int> n{0};
        out_path_ = "/tmp/synchro80-child-" + std::to_string(getpid()) + "-" +
                    std::to_string(n++) + ".out";
        posix_spawn_file_actions_t actions;
        posix_spawn_file_actions_init(&actions);
        posix_spawn_file_actions_addopen(&actions, 1, out_path_.c_str(),
                                         O_WRONLY | O_CREAT | O_TRUNC, 0644);
        err_path_ = out_path_ + ".err";
        posix_spawn_file_actions_addopen(&actions, 2, err_path_.c_str(),
                                         O_WRONLY | O_CREAT | O_TRUNC, 0644);
        std::vector<char *> argv;
        for (const auto &a : args)
            argv.push_back(const_cast<char *>(a.c_str()));
        argv.push_back(nullptr);
        if (posix_spawn(&pid_, argv[0], &actions, nullptr, argv.data(), environ) != 0)
            pid_ = -1;
        posix_spawn_file_actions_destroy(&actions);
    }
    ~Child()
    {
        if (pid_ > 0 && !exited_)
        {
            ::kill(pid_, SIGKILL);
            wait();
        }
        std::remove(out_path_.c_str());
        std::remove(err_path_.c_str());
    }
    Child(const Child &) = delete;
    Child &operator=(const Child &) = delete;

    pid_t pid() const
    {
        return pid_;
    }
    void kill(int sig)
    {
        ::kill(pid_, sig);
    }
    /// Exit code, 128+signal when killed, -1 on timeout.
    int wait(std::chrono::milliseconds timeout = std::chrono::seconds(120))
    {
        if (exited_)
            return code_;
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        while (true)
        {
            int status = 0;
            const pid_t r = waitpid(pid_, &status, WNOHANG);
            if (r == pid_)
            {
                exited_ = true;
                code_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
                return code_;
            }
            if (std::chrono::steady_clock::now() > deadline)
                return -1;
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
        }
    }
    std::string output() const
    {
        return slurp(out_path_);
    }
    std::string errors() const
    {
        return slurp(err_path_);
    }

private:
    static std::string slurp(const std::string &path)
    {
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    pid_t pid_ = -1;
    std::string out_path_;
    std::string err_path_;
    bool exited_ = false;
    int code_ = -1;
};

inline std::vector<std::string> lines_of(const std::string &text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        out.push_back(line);
    return out;
}

/// Code of the synchro80::Error thrown by `f`, or nothing if it returned.
template <typename F>
std::optional<ErrorCode> error_code(F f)
{
    try
    {
        f();
    }
    catch (const Error &e)
    {
        return e.code();
    }
    return std::nullopt;
}

/// Polls `pred` every millisecond; false if it never held within `timeout`.
template <typename Pred>
bool eventually(Pred pred, std::chrono::milliseconds timeout = std::chrono::seconds(10))
{
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < deadline)
    {
        if (pred())
            return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    return pred();
}

}  // namespace synchro80::test
