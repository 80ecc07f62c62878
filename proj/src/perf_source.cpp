/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "stacksurgeon/errors.hpp"
#include "stacksurgeon/perf_records.hpp"
#include "stacksurgeon/sample_source.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#ifdef __linux__
#include <dirent.h>
#include <fcntl.h>
#include <linux/perf_event.h>
#include <sys/ioctl.h>
#include <sys/mman.h>
#include <sys/syscall.h>
#include <time.h>
#include <unistd.h>
#endif

namespace stacksurgeon {

namespace {

void validate(const SessionSpec& spec) {
    if (spec.interval.count() <= 0) {
        throw Error(ErrorCode::InvalidSpec, "sampling interval must be positive");
    }
    if (spec.max_stack_depth < 2) {
        throw Error(ErrorCode::InvalidSpec, "max_stack_depth must be at least 2");
    }
    if (spec.pid.has_value() == spec.cgroup.has_value()) {
        throw Error(ErrorCode::InvalidSpec, "exactly one of pid/cgroup must be set");
    }
}

}  // namespace

#ifdef __linux__

namespace {

static_assert(perfev::kRecordSample == PERF_RECORD_SAMPLE);
static_assert(perfev::kRecordLost == PERF_RECORD_LOST);
static_assert(perfev::kCallchainContextMin == PERF_CONTEXT_MAX);
static_assert(sizeof(perfev::RecordHeader) == sizeof(perf_event_header));

constexpr std::size_t kDataPages = 64;  // power of two, per event

long sys_perf_event_open(perf_event_attr* attr, pid_t pid, int cpu, int group_fd,
                         unsigned long flags) {
    return syscall(SYS_perf_event_open, attr, pid, cpu, group_fd, flags);
}

[[noreturn]] void throw_open_error(int err, const std::string& target) {
    switch (err) {
        case ESRCH:
            throw Error(ErrorCode::TargetNotFound, "no such target: " + target);
        case EACCES:
        case EPERM:
            throw Error(ErrorCode::PermissionDenied,
                        "not permitted to profile " + target +
                            " (check /proc/sys/kernel/perf_event_paranoid)");
        default:
            throw Error(ErrorCode::UnsupportedPlatform,
                        "perf_event_open failed for " + target + ": " + std::strerror(err));
    }
}

std::uint64_t monotonic_now_ns() {
    timespec ts{};
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return static_cast<std::uint64_t>(ts.tv_sec) * 1'000'000'000ull +
           static_cast<std::uint64_t>(ts.tv_nsec);
}

// One perf event fd plus its mmap'd ring.
struct EventBuffer {
    int fd = -1;
    void* base = MAP_FAILED;
    std::size_t mmap_len = 0;
    std::uint8_t* data = nullptr;
    std::size_t data_size = 0;

    bool map() {
        const std::size_t page = static_cast<std::size_t>(sysconf(_SC_PAGESIZE));
        mmap_len = (kDataPages + 1) * page;
        base = mmap(nullptr, mmap_len, PROT_READ | PROT_WRITE, MAP_SHARED, fd, 0);
        if (base == MAP_FAILED) {
            return false;
        }
        data = static_cast<std::uint8_t*>(base) + page;
        data_size = kDataPages * page;
        return true;
    }

    void destroy() {
        if (base != MAP_FAILED) {
            munmap(base, mmap_len);
            base = MAP_FAILED;
        }
        if (fd >= 0) {
            ::close(fd);
            fd = -1;
        }
    }

    // Invokes on_record(header, payload) for every pending record and
    // advances the published tail.
    template <typename Fn>
    void drain(Fn&& on_record) {
        auto* meta = static_cast<perf_event_mmap_page*>(base);
        std::uint64_t head = __atomic_load_n(&meta->data_head, __ATOMIC_ACQUIRE);
        std::uint64_t tail = perfev::walk_ring(std::span<const std::uint8_t>{data, data_size},
                                               meta->data_tail, head, on_record);
        __atomic_store_n(&meta->data_tail, tail, __ATOMIC_RELEASE);
    }
};

perf_event_attr make_attr(const SessionSpec& spec, bool with_max_stack, bool with_clockid) {
    perf_event_attr attr{};
    attr.size = sizeof(attr);
    attr.type = PERF_TYPE_SOFTWARE;
    attr.config = PERF_COUNT_SW_TASK_CLOCK;  // period unit is nanoseconds of task time
    attr.sample_period =
        static_cast<std::uint64_t>(spec.interval.count()) * 1'000'000ull;
    attr.sample_type = PERF_SAMPLE_TIME | PERF_SAMPLE_CALLCHAIN;
    attr.disabled = 1;
    attr.exclude_kernel = spec.include_kernel ? 0 : 1;
    attr.exclude_hv = 1;
    if (with_max_stack) {
        attr.sample_max_stack = static_cast<std::uint16_t>(
            std::min(spec.max_stack_depth, 0xffff));
    }
    if (with_clockid) {
        attr.use_clockid = 1;
        attr.clockid = CLOCK_MONOTONIC;
    }
    return attr;
}

class PerfSession final : public SamplerSession {
  public:
    PerfSession(SessionSpec spec, std::vector<EventBuffer> buffers, int cgroup_fd,
                bool have_clockid)
        : spec_(std::move(spec)),
          buffers_(std::move(buffers)),
          cgroup_fd_(cgroup_fd),
          have_clockid_(have_clockid) {
        for (EventBuffer& buffer : buffers_) {
            ioctl(buffer.fd, PERF_EVENT_IOC_ENABLE, 0);
        }
        start_ns_ = monotonic_now_ns();
    }

    ~PerfSession() override { release(); }

    PollResult poll() override {
        if (closed_) {
            throw Error(ErrorCode::SessionClosed, "poll on a closed session");
        }
        PollResult result;
        drain_into(result);
        summary_.total_samples += result.samples.size();
        summary_.dropped_samples += result.dropped;
        return result;
    }

    // Records still buffered but never polled are accounted as dropped so
    // the summary equals polled samples + losses.
    SessionSummary close() override {
        if (!closed_) {
            for (EventBuffer& buffer : buffers_) {
                ioctl(buffer.fd, PERF_EVENT_IOC_DISABLE, 0);
            }
            PollResult leftovers;
            drain_into(leftovers);
            summary_.dropped_samples += leftovers.samples.size() + leftovers.dropped;
            summary_.wall_duration = std::chrono::nanoseconds{monotonic_now_ns() - start_ns_};
            release();
            closed_ = true;
        }
        return summary_;
    }

    const SessionSpec& spec() const override { return spec_; }

  private:
    void release() {
        for (EventBuffer& buffer : buffers_) {
            buffer.destroy();
        }
        buffers_.clear();
        if (cgroup_fd_ >= 0) {
            ::close(cgroup_fd_);
            cgroup_fd_ = -1;
        }
    }

    void drain_into(PollResult& result) {
        const std::size_t depth_limit = static_cast<std::size_t>(spec_.max_stack_depth);
        for (EventBuffer& buffer : buffers_) {
            buffer.drain([&](const perfev::RecordHeader& header,
                             std::span<const std::uint8_t> payload) {
                if (header.type == perfev::kRecordLost) {
                    result.dropped += perfev::parse_lost_count(payload);
                    return;
                }
                if (header.type != perfev::kRecordSample) {
                    return;
                }
                perfev::SamplePayload decoded;
                if (!perfev::parse_time_callchain(payload, decoded)) {
                    return;
                }
                RawSample sample =
                    perfev::build_sample(relative_ns(decoded.time), decoded.ips, depth_limit);
                if (!sample.frames.empty()) {
                    result.samples.push_back(std::move(sample));
                }
            });
        }
        std::stable_sort(result.samples.begin(), result.samples.end(),
                         [](const RawSample& a, const RawSample& b) {
                             return a.timestamp_ns < b.timestamp_ns;
                         });
        for (RawSample& sample : result.samples) {
            // Merged per-CPU streams can interleave across polls; clamp so
            // the session-wide sequence stays monotone.
            sample.timestamp_ns = std::max(sample.timestamp_ns, last_emitted_ns_);
            last_emitted_ns_ = sample.timestamp_ns;
        }
    }

    std::uint64_t relative_ns(std::uint64_t raw_time) {
        if (!baseline_set_) {
            // Without use_clockid the kernel stamps with sched_clock, which
            // has no userspace epoch; baseline on the first sample instead.
            baseline_ns_ = have_clockid_ ? start_ns_ : raw_time;
            baseline_set_ = true;
        }
        return raw_time > baseline_ns_ ? raw_time - baseline_ns_ : 0;
    }

    SessionSpec spec_;
    std::vector<EventBuffer> buffers_;
    int cgroup_fd_ = -1;
    bool have_clockid_ = false;
    bool closed_ = false;
    bool baseline_set_ = false;
    std::uint64_t baseline_ns_ = 0;
    std::uint64_t start_ns_ = 0;
    std::uint64_t last_emitted_ns_ = 0;
    SessionSummary summary_;
};

// perf rejects unsupported attr fields with EINVAL; retry without
// sample_max_stack, then without the explicit clockid.
int open_event(const SessionSpec& spec, pid_t pid, int cpu, unsigned long flags,
               bool& have_clockid, int& err) {
    for (int attempt = 0; attempt < 3; ++attempt) {
        bool with_max_stack = attempt == 0;
        bool with_clockid = attempt <= 1;
        perf_event_attr attr = make_attr(spec, with_max_stack, with_clockid);
        long fd = sys_perf_event_open(&attr, pid, cpu, -1, flags);
        if (fd >= 0) {
            have_clockid = with_clockid;
            return static_cast<int>(fd);
        }
        err = errno;
        if (err != EINVAL) {
            break;
        }
    }
    return -1;
}

std::vector<pid_t> list_tasks(int pid) {
    std::string task_dir = "/proc/" + std::to_string(pid) + "/task";
    DIR* dir = opendir(task_dir.c_str());
    if (!dir) {
        if (errno == EACCES || errno == EPERM) {
            throw Error(ErrorCode::PermissionDenied, "cannot read " + task_dir);
        }
        throw Error(ErrorCode::TargetNotFound, "no such process: " + std::to_string(pid));
    }
    std::vector<pid_t> tids;
    while (dirent* entry = readdir(dir)) {
        if (entry->d_name[0] == '.') {
            continue;
        }
        tids.push_back(static_cast<pid_t>(std::stol(entry->d_name)));
    }
    closedir(dir);
    std::sort(tids.begin(), tids.end());
    return tids;
}

}  // namespace

std::unique_ptr<SamplerSession> open_session(const SessionSpec& spec) {
    validate(spec);

    std::vector<EventBuffer> buffers;
    int cgroup_fd = -1;
    bool have_clockid = false;
    auto cleanup = [&] {
        for (EventBuffer& buffer : buffers) {
            buffer.destroy();
        }
        if (cgroup_fd >= 0) {
            ::close(cgroup_fd);
        }
    };

    try {
        if (spec.pid) {
            // One event per existing task; tasks spawned later are missed.
            for (pid_t tid : list_tasks(*spec.pid)) {
                int err = 0;
                int fd = open_event(spec, tid, -1, 0, have_clockid, err);
                if (fd < 0) {
                    if (err == ESRCH) {
                        continue;  // task exited between listing and attach
                    }
                    throw_open_error(err, "pid " + std::to_string(*spec.pid));
                }
                EventBuffer buffer;
                buffer.fd = fd;
                if (!buffer.map()) {
                    int merr = errno;
                    buffer.destroy();
                    throw Error(ErrorCode::UnsupportedPlatform,
                                std::string{"mmap of perf ring failed: "} + std::strerror(merr));
                }
                buffers.push_back(buffer);
            }
            if (buffers.empty()) {
                throw Error(ErrorCode::TargetNotFound,
                            "no attachable tasks under pid " + std::to_string(*spec.pid));
            }
        } else {
            cgroup_fd = ::open(spec.cgroup->c_str(), O_RDONLY | O_DIRECTORY);
            if (cgroup_fd < 0) {
                if (errno == EACCES || errno == EPERM) {
                    throw Error(ErrorCode::PermissionDenied, "cannot open cgroup " + *spec.cgroup);
                }
                throw Error(ErrorCode::TargetNotFound, "no such cgroup: " + *spec.cgroup);
            }
            // Cgroup events must be per-CPU; they cover all member tasks.
            int cpus = static_cast<int>(sysconf(_SC_NPROCESSORS_ONLN));
            int first_err = 0;
            for (int cpu = 0; cpu < cpus; ++cpu) {
                int err = 0;
                int fd = open_event(spec, cgroup_fd, cpu, PERF_FLAG_PID_CGROUP, have_clockid, err);
                if (fd < 0) {
                    if (first_err == 0) {
                        first_err = err;
                    }
                    continue;  // offline CPU or transient failure
                }
                EventBuffer buffer;
                buffer.fd = fd;
                if (!buffer.map()) {
                    int merr = errno;
                    buffer.destroy();
                    throw Error(ErrorCode::UnsupportedPlatform,
                                std::string{"mmap of perf ring failed: "} + std::strerror(merr));
                }
                buffers.push_back(buffer);
            }
            if (buffers.empty()) {
                throw_open_error(first_err ? first_err : ENODEV, "cgroup " + *spec.cgroup);
            }
        }
    } catch (...) {
        cleanup();
        throw;
    }

    return std::make_unique<PerfSession>(spec, std::move(buffers), cgroup_fd, have_clockid);
}

bool live_sampling_supported() {
    perf_event_attr attr{};
    attr.size = sizeof(attr);
    attr.type = PERF_TYPE_SOFTWARE;
    attr.config = PERF_COUNT_SW_TASK_CLOCK;
    attr.sample_period = 1'000'000'000ull;
    attr.sample_type = PERF_SAMPLE_TIME | PERF_SAMPLE_CALLCHAIN;
    attr.disabled = 1;
    attr.exclude_kernel = 1;
    attr.exclude_hv = 1;
    long fd = sys_perf_event_open(&attr, 0, -1, -1, 0);
    if (fd < 0) {
        return false;
    }
    ::close(static_cast<int>(fd));
    return true;
}

#else  // !__linux__

std::unique_ptr<SamplerSession> open_session(const SessionSpec& spec) {
    validate(spec);
    throw Error(ErrorCode::UnsupportedPlatform,
                "live sampling requires the Linux perf_event interface");
}

bool live_sampling_supported() { return false; }

#endif

}  // namespace stacksurgeon
