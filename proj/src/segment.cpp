#include <synchro80/errors.hpp>
#include <synchro80/segment.hpp>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <climits>
#include <cstring>
#include <ctime>
#include <fcntl.h>
#include <linux/futex.h>
#include <signal.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <sys/syscall.h>
#include <thread>
#include <unistd.h>

namespace synchro80
{
namespace
{
namespace h = header_offset;
namespace c = command_offset;

constexpr auto peer_check_slice = std::chrono::milliseconds(20);

template <typename T>
std::atomic_ref<T> word(std::byte *base, std::size_t offset)
{
    return std::atomic_ref<T>(*reinterpret_cast<T *>(base + offset));
}

template <typename T>
std::atomic_ref<T> word(const std::byte *base, std::size_t offset)
{
    return std::atomic_ref<T>(
        *reinterpret_cast<T *>(const_cast<std::byte *>(base) + offset));
}

static_assert(std::atomic_ref<std::uint64_t>::is_always_lock_free);
static_assert(std::atomic_ref<std::uint32_t>::is_always_lock_free);
static_assert(std::atomic_ref<std::uint8_t>::is_always_lock_free);

std::uint32_t *futex_addr(const std::byte *base, std::size_t offset)
{
    // low half of a little-endian u64 counter
    return reinterpret_cast<std::uint32_t *>(const_cast<std::byte *>(base) +
                                             offset);
}

void futex_wait(std::uint32_t *addr,
                std::uint32_t expected,
                std::chrono::nanoseconds timeout)
{
    timespec ts{};
    ts.tv_sec = static_cast<time_t>(timeout.count() / 1'000'000'000);
    ts.tv_nsec = static_cast<long>(timeout.count() % 1'000'000'000);
    syscall(SYS_futex, addr, FUTEX_WAIT, expected, &ts, nullptr, 0);
}

void futex_wake_all(std::uint32_t *addr)
{
    syscall(SYS_futex, addr, FUTEX_WAKE, INT_MAX, nullptr, nullptr, 0);
}

bool process_alive(pid_t pid)
{
    if (pid <= 0)
    {
        return false;
    }
    return kill(pid, 0) == 0 || errno == EPERM;
}

class Fd
{
public:
    explicit Fd(int fd) : fd_(fd)
    {
    }
    ~Fd()
    {
        if (fd_ >= 0)
        {
            close(fd_);
        }
    }
    Fd(const Fd &) = delete;
    Fd &operator=(const Fd &) = delete;
    int get() const
    {
        return fd_;
    }

private:
    int fd_;
};

off_t file_size(int fd)
{
    struct stat st
    {
    };
    if (fstat(fd, &st) != 0)
    {
        return -1;
    }
    return st.st_size;
}

std::uint64_t magic_word()
{
    std::uint64_t w;
    std::memcpy(&w, segment_magic.data(), 8);
    return w;
}

// Reads the owner pid of an existing segment. Returns 0 when the segment
// has no recognizable header even after a grace period (creator crashed
// before finishing initialization).
pid_t existing_owner(const std::string &name)
{
    for (int attempt = 0; attempt < 20; ++attempt)
    {
        Fd fd(shm_open(name.c_str(), O_RDONLY, 0));
        if (fd.get() < 0)
        {
            return 0;
        }
        if (file_size(fd.get()) >= static_cast<off_t>(h::size))
        {
            void *p = mmap(nullptr, h::size, PROT_READ, MAP_SHARED, fd.get(), 0);
            if (p != MAP_FAILED)
            {
                auto *base = static_cast<std::byte *>(p);
                const std::uint64_t magic =
                    word<std::uint64_t>(base, h::magic).load(std::memory_order_acquire);
                const pid_t pid = static_cast<pid_t>(
                    word<std::uint32_t>(base, h::owner_pid).load());
                munmap(p, h::size);
                if (magic == magic_word() || pid != 0)
                {
                    return pid;
                }
            }
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    return 0;
}

}  // namespace

std::string Segment::shm_name(const std::string &segment_id)
{
    return std::string("/") + segment_name_prefix + segment_id;
}

Segment Segment::create(const BackendConfig &config)
{
    validate_config(config);
    Segment seg;
    seg.config_ = config;
    seg.layout_ = SegmentLayout::compute(config);
    seg.name_ = shm_name(config.segment_id);

    int raw_fd = -1;
    for (int attempt = 0; attempt < 3 && raw_fd < 0; ++attempt)
    {
        raw_fd = shm_open(seg.name_.c_str(), O_RDWR | O_CREAT | O_EXCL, 0666);
        if (raw_fd >= 0)
        {
            break;
        }
        if (errno != EEXIST)
        {
            throw Error(ErrorCode::ResourceFailure,
                        "shm_open " + seg.name_ + ": " + std::strerror(errno));
        }
        if (process_alive(existing_owner(seg.name_)))
        {
            throw Error(ErrorCode::AlreadyExists,
                        "segment '" + config.segment_id + "' has a live owner");
        }
        shm_unlink(seg.name_.c_str());
    }
    if (raw_fd < 0)
    {
        throw Error(ErrorCode::AlreadyExists,
                    "could not reclaim segment '" + config.segment_id + "'");
    }
    Fd fd(raw_fd);
    const auto total = seg.layout_.total_size;
    if (ftruncate(fd.get(), static_cast<off_t>(total)) != 0)
    {
        const std::string err = std::strerror(errno);
        shm_unlink(seg.name_.c_str());
        throw Error(ErrorCode::ResourceFailure, "ftruncate: " + err);
    }
    void *p = mmap(nullptr, total, PROT_READ | PROT_WRITE, MAP_SHARED, fd.get(), 0);
    if (p == MAP_FAILED)
    {
        const std::string err = std::strerror(errno);
        shm_unlink(seg.name_.c_str());
        throw Error(ErrorCode::ResourceFailure, "mmap: " + err);
    }
    seg.base_ = static_cast<std::byte *>(p);
    seg.mapped_size_ = total;
    seg.owner_ = true;

    std::byte *b = seg.base_;
    word<std::uint32_t>(b, h::owner_pid).store(static_cast<std::uint32_t>(getpid()));
    word<std::uint32_t>(b, h::version).store(segment_version);
    word<std::uint32_t>(b, h::ndof).store(config.ndof);
    word<std::uint64_t>(b, h::frequency_uhz).store(config.frequency_uhz());
    word<std::uint8_t>(b, h::mode).store(static_cast<std::uint8_t>(config.mode));
    word<std::uint8_t>(b, h::status).store(
        static_cast<std::uint8_t>(Status::INITIALIZING));
    word<std::uint32_t>(b, h::history_capacity).store(config.history_capacity);
    word<std::uint32_t>(b, h::payload_capacity).store(config.payload_capacity);
    word<std::uint32_t>(b, h::command_ring_capacity)
        .store(config.command_ring_capacity);
    word<std::uint64_t>(b, h::segment_bytes).store(total);
    for (std::uint64_t i = 0; i < config.command_ring_capacity; ++i)
    {
        word<std::uint64_t>(b, seg.layout_.command_slot(i) + c::seq).store(i);
    }
    // published last: attachers treat a zero magic as "still initializing"
    word<std::uint64_t>(b, h::magic).store(magic_word(), std::memory_order_release);
    return seg;
}

Segment Segment::attach(const std::string &segment_id)
{
    Segment seg;
    seg.name_ = shm_name(segment_id);
    Fd fd(shm_open(seg.name_.c_str(), O_RDWR, 0));
    if (fd.get() < 0)
    {
        if (errno == ENOENT)
        {
            throw Error(ErrorCode::NotFound, "no segment '" + segment_id + "'");
        }
        throw Error(ErrorCode::ResourceFailure,
                    "shm_open " + seg.name_ + ": " + std::strerror(errno));
    }

    // wait out a creator that has not finished writing the header
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::milliseconds(200);
    std::byte header[h::size];
    while (true)
    {
        if (file_size(fd.get()) >= static_cast<off_t>(h::size) &&
            pread(fd.get(), header, h::size, 0) == static_cast<ssize_t>(h::size))
        {
            std::uint64_t magic;
            std::memcpy(&magic, header + h::magic, 8);
            if (magic != 0)
            {
                if (magic != magic_word())
                {
                    throw Error(ErrorCode::CorruptHeader, "bad magic");
                }
                break;
            }
        }
        if (std::chrono::steady_clock::now() > deadline)
        {
            throw Error(ErrorCode::CorruptHeader, "header never initialized");
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }

    auto field = [&](std::size_t offset, auto zero) {
        decltype(zero) v;
        std::memcpy(&v, header + offset, sizeof v);
        return v;
    };
    const auto version = field(h::version, std::uint32_t{});
    if (version != segment_version)
    {
        throw Error(ErrorCode::VersionMismatch,
                    "segment version " + std::to_string(version) + ", expected " +
                        std::to_string(segment_version));
    }
    BackendConfig cfg;
    cfg.segment_id = segment_id;
    cfg.ndof = field(h::ndof, std::uint32_t{});
    const auto uhz = field(h::frequency_uhz, std::uint64_t{});
    cfg.frequency_hz = static_cast<double>(uhz) / 1e6;
    const auto mode = field(h::mode, std::uint8_t{});
    cfg.history_capacity = field(h::history_capacity, std::uint32_t{});
    cfg.payload_capacity = field(h::payload_capacity, std::uint32_t{});
    cfg.command_ring_capacity = field(h::command_ring_capacity, std::uint32_t{});
    if (mode > 1 || cfg.ndof == 0 || uhz == 0 ||
        !is_power_of_two(cfg.history_capacity) ||
        !is_power_of_two(cfg.command_ring_capacity))
    {
        throw Error(ErrorCode::CorruptHeader, "inconsistent configuration");
    }
    cfg.mode = static_cast<SyncMode>(mode);
    seg.config_ = cfg;
    seg.layout_ = SegmentLayout::compute(cfg);
    const auto total = seg.layout_.total_size;
    if (field(h::segment_bytes, std::uint64_t{}) != total ||
        file_size(fd.get()) < static_cast<off_t>(total))
    {
        throw Error(ErrorCode::CorruptHeader, "segment size mismatch");
    }
    void *p = mmap(nullptr, total, PROT_READ | PROT_WRITE, MAP_SHARED, fd.get(), 0);
    if (p == MAP_FAILED)
    {
        throw Error(ErrorCode::ResourceFailure,
                    std::string("mmap: ") + std::strerror(errno));
    }
    seg.base_ = static_cast<std::byte *>(p);
    seg.mapped_size_ = total;
    return seg;
}

Segment::Segment(Segment &&other) noexcept
{
    *this = std::move(other);
}

Segment &Segment::operator=(Segment &&other) noexcept
{
    if (this != &other)
    {
        release();
        base_ = std::exchange(other.base_, nullptr);
        mapped_size_ = std::exchange(other.mapped_size_, 0);
        config_ = std::move(other.config_);
        layout_ = other.layout_;
        name_ = std::move(other.name_);
        owner_ = std::exchange(other.owner_, false);
        destroyed_ = std::exchange(other.destroyed_, false);
    }
    return *this;
}

Segment::~Segment()
{
    release();
}

void Segment::release() noexcept
{
    if (base_ == nullptr)
    {
        return;
    }
    if (owner_)
    {
        destroy();
    }
    munmap(base_, mapped_size_);
    base_ = nullptr;
}

void Segment::destroy()
{
    if (!owner_ || destroyed_)
    {
        return;
    }
    destroyed_ = true;
    set_status(Status::STOPPED);
    wake(h::iteration);
    wake(h::burst_requested);
    wake(h::burst_completed);
    for (std::uint32_t d = 0; d < layout_.ndof; ++d)
    {
        wake(layout_.completed_counts + 8 * d);
    }
    shm_unlink(name_.c_str());
}

Status Segment::status() const
{
    return static_cast<Status>(
        word<std::uint8_t>(base_, h::status).load(std::memory_order_acquire));
}

void Segment::set_status(Status status)
{
    word<std::uint8_t>(base_, h::status)
        .store(static_cast<std::uint8_t>(status), std::memory_order_release);
}

pid_t Segment::owner_pid() const
{
    return static_cast<pid_t>(word<std::uint32_t>(base_, h::owner_pid).load());
}

bool Segment::peer_alive() const
{
    return status() != Status::STOPPED && process_alive(owner_pid());
}

std::uint64_t Segment::iteration() const
{
    return word<std::uint64_t>(base_, h::iteration).load(std::memory_order_acquire);
}

std::uint64_t Segment::enqueue_count(std::uint32_t dof) const
{
    return word<std::uint64_t>(base_, layout_.enqueue_counts + 8 * std::size_t{dof})
        .load(std::memory_order_acquire);
}

std::uint64_t Segment::completed_count(std::uint32_t dof) const
{
    return word<std::uint64_t>(base_,
                               layout_.completed_counts + 8 * std::size_t{dof})
        .load(std::memory_order_acquire);
}

std::uint64_t Segment::burst_requested() const
{
    return word<std::uint64_t>(base_, h::burst_requested)
        .load(std::memory_order_acquire);
}

std::uint64_t Segment::burst_completed() const
{
    return word<std::uint64_t>(base_, h::burst_completed)
        .load(std::memory_order_acquire);
}

void Segment::wake(std::size_t offset) const
{
    futex_wake_all(futex_addr(base_, offset));
}

template <typename Done>
void Segment::wait_on(std::size_t offset,
                      Done done,
                      Timeout timeout,
                      bool watch_peer) const
{
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    auto futex_word = word<std::uint32_t>(base_, offset);
    while (true)
    {
        const std::uint32_t snapshot = futex_word.load(std::memory_order_acquire);
        if (done())
        {
            return;
        }
        if (watch_peer && !peer_alive())
        {
            if (done())
            {
                return;
            }
            throw Error(ErrorCode::PeerStopped,
                        "backend of '" + config_.segment_id + "' stopped");
        }
        std::chrono::nanoseconds slice = peer_check_slice;
        if (timeout)
        {
            const auto left = *timeout - (clock::now() - start);
            if (left <= std::chrono::nanoseconds::zero())
            {
                throw Error(ErrorCode::WaitTimeout, "wait timed out");
            }
            slice = std::min(slice, std::chrono::duration_cast<std::chrono::nanoseconds>(left));
        }
        futex_wait(futex_addr(base_, offset), snapshot, slice);
    }
}

QueueTicket Segment::push_command(const Command &cmd)
{
    validate_command(cmd, layout_.ndof);

    auto lock = word<std::uint32_t>(base_, h::producer_exclusion_word);
    const auto me = static_cast<std::uint32_t>(getpid());
    for (std::uint64_t spins = 0;; ++spins)
    {
        std::uint32_t expected = 0;
        if (lock.compare_exchange_weak(expected, me, std::memory_order_acquire))
        {
            break;
        }
        if (spins % 1024 == 1023 && expected != 0 && expected != me &&
            !process_alive(static_cast<pid_t>(expected)))
        {
            // holder died inside the reservation step
            lock.compare_exchange_strong(expected, 0);
        }
        std::this_thread::yield();
    }

    auto tail_word = word<std::uint64_t>(base_, h::ring_tail);
    const std::uint64_t tail = tail_word.load(std::memory_order_relaxed);
    const std::uint64_t head =
        word<std::uint64_t>(base_, h::ring_head).load(std::memory_order_acquire);
    if (tail - head >= layout_.command_ring_capacity)
    {
        lock.store(0, std::memory_order_release);
        throw Error(ErrorCode::RingFull,
                    "command ring of '" + config_.segment_id + "' is full");
    }
    auto count =
        word<std::uint64_t>(base_, layout_.enqueue_counts + 8 * std::size_t{cmd.dof});
    const std::uint64_t position = count.load(std::memory_order_relaxed);
    count.store(position + 1, std::memory_order_release);
    tail_word.store(tail + 1, std::memory_order_relaxed);
    lock.store(0, std::memory_order_release);

    Command stamped = cmd;
    stamped.position = position;
    const CommandBytes bytes = encode_command(stamped);
    const std::size_t slot = layout_.command_slot(tail);
    auto seq = word<std::uint64_t>(base_, slot + c::seq);
    // the consumer frees the slot before advancing head, so this holds
    // as soon as the full check above passed
    while (seq.load(std::memory_order_acquire) != tail)
    {
        std::this_thread::yield();
    }
    for (std::size_t i = 0; i < bytes.size(); i += 8)
    {
        std::uint64_t w;
        std::memcpy(&w, bytes.data() + i, 8);
        word<std::uint64_t>(base_, slot + c::dof + i).store(w, std::memory_order_relaxed);
    }
    seq.store(tail + 1, std::memory_order_release);
    return {cmd.dof, position};
}

std::vector<Command> Segment::pop_commands(std::size_t max)
{
    std::vector<Command> out;
    auto head_word = word<std::uint64_t>(base_, h::ring_head);
    std::uint64_t head = head_word.load(std::memory_order_relaxed);
    while (out.size() < max)
    {
        const std::size_t slot = layout_.command_slot(head);
        auto seq = word<std::uint64_t>(base_, slot + c::seq);
        if (seq.load(std::memory_order_acquire) != head + 1)
        {
            break;
        }
        CommandBytes bytes;
        for (std::size_t i = 0; i < bytes.size(); i += 8)
        {
            const std::uint64_t w = word<std::uint64_t>(base_, slot + c::dof + i)
                                        .load(std::memory_order_relaxed);
            std::memcpy(bytes.data() + i, &w, 8);
        }
        out.push_back(decode_command(bytes));
        seq.store(head + layout_.command_ring_capacity, std::memory_order_release);
        ++head;
        head_word.store(head, std::memory_order_release);
    }
    return out;
}

void Segment::add_completed(std::uint32_t dof, std::uint64_t count)
{
    if (count == 0)
    {
        return;
    }
    const std::size_t offset = layout_.completed_counts + 8 * std::size_t{dof};
    word<std::uint64_t>(base_, offset).fetch_add(count, std::memory_order_acq_rel);
    wake(offset);
}

void Segment::write_observation(const Observation &obs)
{
    const std::uint64_t it = iteration();
    if (obs.iteration != it)
    {
        throw Error(ErrorCode::SegmentFailure,
                    "observation " + std::to_string(obs.iteration) +
                        " written out of order (expected " + std::to_string(it) +
                        ")");
    }
    if (obs.desired.size() != layout_.ndof || obs.observed.size() != layout_.ndof ||
        obs.payload.size() > layout_.payload_capacity)
    {
        throw Error(ErrorCode::SegmentFailure, "observation shape mismatch");
    }

    // staged in a local buffer, then published as 64-bit words
    const std::size_t body = layout_.obs_seq_post - layout_.obs_iteration;
    std::vector<std::byte> buf(body, std::byte{0});
    auto put = [&](std::size_t slot_offset, const void *src, std::size_t n) {
        std::memcpy(buf.data() + slot_offset - layout_.obs_iteration, src, n);
    };
    put(layout_.obs_iteration, &obs.iteration, 8);
    put(layout_.obs_timestamp, &obs.timestamp_ns, 8);
    put(layout_.obs_logical_time, &obs.logical_time_ns, 8);
    put(layout_.obs_measured_period, &obs.measured_period_ns, 8);
    put(layout_.obs_desired, obs.desired.data(), 8 * layout_.ndof);
    put(layout_.obs_observed, obs.observed.data(), 8 * layout_.ndof);
    if (!obs.payload.empty())
    {
        put(layout_.obs_payload, obs.payload.data(), obs.payload.size());
    }

    const std::size_t slot = layout_.observation_slot(it);
    auto seq_pre = word<std::uint64_t>(base_, slot + layout_.obs_seq_pre);
    auto seq_post = word<std::uint64_t>(base_, slot + layout_.obs_seq_post);
    const std::uint64_t in_progress = 2 * it + 1;
    seq_pre.store(in_progress, std::memory_order_relaxed);
    std::atomic_thread_fence(std::memory_order_release);
    for (std::size_t i = 0; i < body; i += 8)
    {
        std::uint64_t w;
        std::memcpy(&w, buf.data() + i, 8);
        word<std::uint64_t>(base_, slot + layout_.obs_iteration + i)
            .store(w, std::memory_order_relaxed);
    }
    seq_post.store(in_progress + 1, std::memory_order_release);
    seq_pre.store(in_progress + 1, std::memory_order_release);

    word<std::uint64_t>(base_, h::iteration).store(it + 1, std::memory_order_release);
    wake(h::iteration);
}

ReadStatus Segment::read_observation(std::uint64_t iteration,
                                     Observation &out,
                                     int max_retries) const
{
    const std::uint64_t current = this->iteration();
    if (iteration >= current)
    {
        return ReadStatus::NotYet;
    }
    if (current > layout_.history_capacity &&
        iteration < current - layout_.history_capacity)
    {
        return ReadStatus::Evicted;
    }

    const std::size_t slot = layout_.observation_slot(iteration);
    const std::size_t body = layout_.obs_seq_post - layout_.obs_iteration;
    const std::uint64_t wanted = 2 * iteration + 2;
    std::vector<std::byte> buf(body);
    auto seq_pre = word<std::uint64_t>(base_, slot + layout_.obs_seq_pre);
    auto seq_post = word<std::uint64_t>(base_, slot + layout_.obs_seq_post);

    for (int attempt = 0; attempt < max_retries; ++attempt)
    {
        const std::uint64_t after = seq_post.load(std::memory_order_acquire);
        for (std::size_t i = 0; i < body; i += 8)
        {
            const std::uint64_t w = word<std::uint64_t>(base_, slot + layout_.obs_iteration + i)
                                        .load(std::memory_order_relaxed);
            std::memcpy(buf.data() + i, &w, 8);
        }
        std::atomic_thread_fence(std::memory_order_acquire);
        const std::uint64_t before = seq_pre.load(std::memory_order_relaxed);
        if (before != after || (before & 1) != 0)
        {
            continue;
        }
        if (before > wanted)
        {
            return ReadStatus::Evicted;
        }
        if (before < wanted)
        {
            // header advanced but the slot still shows an older lap
            continue;
        }

        auto get = [&](std::size_t slot_offset, void *dst, std::size_t n) {
            std::memcpy(dst, buf.data() + slot_offset - layout_.obs_iteration, n);
        };
        out.desired.resize(layout_.ndof);
        out.observed.resize(layout_.ndof);
        out.payload.resize(layout_.payload_capacity);
        get(layout_.obs_iteration, &out.iteration, 8);
        get(layout_.obs_timestamp, &out.timestamp_ns, 8);
        get(layout_.obs_logical_time, &out.logical_time_ns, 8);
        get(layout_.obs_measured_period, &out.measured_period_ns, 8);
        get(layout_.obs_desired, out.desired.data(), 8 * layout_.ndof);
        get(layout_.obs_observed, out.observed.data(), 8 * layout_.ndof);
        if (layout_.payload_capacity > 0)
        {
            get(layout_.obs_payload, out.payload.data(), layout_.payload_capacity);
        }
        return ReadStatus::Ok;
    }
    return ReadStatus::Evicted;
}

std::uint64_t Segment::request_burst(std::uint64_t n)
{
    if (config_.mode != SyncMode::BURSTING)
    {
        throw Error(ErrorCode::NotBurstingMode,
                    "segment '" + config_.segment_id + "' is not in bursting mode");
    }
    if (n == 0)
    {
        throw Error(ErrorCode::BadMode, "burst size must be at least 1");
    }
    const std::uint64_t requested =
        word<std::uint64_t>(base_, h::burst_requested)
            .fetch_add(n, std::memory_order_acq_rel) +
        n;
    wake(h::burst_requested);
    return requested;
}

void Segment::complete_iterations(std::uint64_t k)
{
    word<std::uint64_t>(base_, h::burst_completed).fetch_add(k, std::memory_order_acq_rel);
    wake(h::burst_completed);
}

std::uint64_t Segment::await_burst(Timeout timeout)
{
    wait_on(
        h::burst_requested,
        [&] { return burst_requested() != burst_completed(); },
        timeout,
        false);
    return burst_requested() - burst_completed();
}

std::uint64_t Segment::try_await_burst(std::chrono::nanoseconds slice)
{
    try
    {
        return await_burst(slice);
    }
    catch (const Error &e)
    {
        if (e.code() == ErrorCode::WaitTimeout)
        {
            return 0;
        }
        throw;
    }
}

void Segment::await_burst_done(Timeout timeout)
{
    await_burst_done_until(burst_requested(), timeout);
}

void Segment::await_burst_done_until(std::uint64_t requested, Timeout timeout)
{
    wait_on(
        h::burst_completed,
        [&] { return burst_completed() >= requested; },
        timeout,
        true);
}

void Segment::wait_iteration_beyond(std::uint64_t iteration, Timeout timeout) const
{
    wait_on(
        h::iteration, [&] { return this->iteration() > iteration; }, timeout, true);
}

void Segment::wait_completed(const QueueTicket &ticket, Timeout timeout) const
{
    if (ticket.dof >= layout_.ndof)
    {
        throw Error(ErrorCode::BadDof, "ticket dof out of range");
    }
    wait_on(
        layout_.completed_counts + 8 * std::size_t{ticket.dof},
        [&] { return completed_count(ticket.dof) > ticket.position; },
        timeout,
        true);
}

}  // namespace synchro80
