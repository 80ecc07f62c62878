/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "stacksurgeon/errors.hpp"
#include "stacksurgeon/sample_source.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <string>
#include <utility>

namespace stacksurgeon {

namespace {

// Chains carry no recorded clock; timestamps are synthesized 1 ms apart so
// ordering and monotonicity invariants behave like a live session's.
constexpr std::uint64_t kSyntheticStepNs = 1'000'000;

struct ParsedLine {
    std::vector<std::string> frames_root_first;
    std::uint64_t repeat = 1;
};

[[noreturn]] void malformed(const std::filesystem::path& path, int line_no,
                            const std::string& what) {
    throw Error(ErrorCode::MalformedReplay,
                path.string() + ":" + std::to_string(line_no) + ": " + what);
}

bool all_digits(std::string_view text) {
    if (text.empty()) {
        return false;
    }
    return std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string_view trim(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
        text.remove_prefix(1);
    }
    while (!text.empty() &&
           (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    return text;
}

std::optional<ParsedLine> parse_line(std::string_view raw, const std::filesystem::path& path,
                                     int line_no) {
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') {
        return std::nullopt;
    }

    ParsedLine parsed;
    // Optional trailing repeat count, space-separated from the stack.
    std::size_t last_space = line.find_last_of(' ');
    if (last_space != std::string_view::npos && all_digits(line.substr(last_space + 1))) {
        std::string_view digits = line.substr(last_space + 1);
        std::uint64_t repeat = 0;
        std::from_chars(digits.data(), digits.data() + digits.size(), repeat);
        if (repeat == 0) {
            malformed(path, line_no, "repeat count must be >= 1");
        }
        parsed.repeat = repeat;
        line = trim(line.substr(0, last_space));
    }
    if (line.empty()) {
        malformed(path, line_no, "no frames before repeat count");
    }

    std::size_t begin = 0;
    while (true) {
        std::size_t end = line.find(';', begin);
        std::string_view frame =
            line.substr(begin, end == std::string_view::npos ? end : end - begin);
        if (frame.empty()) {
            malformed(path, line_no, "empty frame");
        }
        parsed.frames_root_first.emplace_back(frame);
        if (end == std::string_view::npos) {
            break;
        }
        begin = end + 1;
    }
    return parsed;
}

class ReplaySession final : public SamplerSession {
  public:
    ReplaySession(std::vector<RawSample> samples, std::vector<std::string> names,
                  int max_depth)
        : samples_(std::move(samples)), names_(std::move(names)) {
        spec_.max_stack_depth = max_depth;
        summary_.total_samples = samples_.size();
        summary_.wall_duration =
            std::chrono::nanoseconds{samples_.size() * kSyntheticStepNs};
    }

    PollResult poll() override {
        if (closed_) {
            throw Error(ErrorCode::SessionClosed, "poll on a closed session");
        }
        PollResult result;
        result.samples = std::move(samples_);
        samples_.clear();
        return result;
    }

    // Buffered samples never polled count as dropped, keeping the summary
    // equal to polled samples + losses.
    SessionSummary close() override {
        if (!closed_) {
            summary_.dropped_samples += samples_.size();
            samples_.clear();
            closed_ = true;
        }
        return summary_;
    }

    const SessionSpec& spec() const override { return spec_; }
    const std::vector<std::string>* name_table() const override { return &names_; }

  private:
    std::vector<RawSample> samples_;
    std::vector<std::string> names_;
    SessionSpec spec_;
    SessionSummary summary_;
    bool closed_ = false;
};

}  // namespace

std::unique_ptr<SamplerSession> open_replay(const std::filesystem::path& path) {
    std::ifstream file{path};
    if (!file) {
        throw Error(ErrorCode::FileNotFound, "cannot open replay file: " + path.string());
    }

    std::vector<std::string> names;
    std::map<std::string, std::uint64_t, std::less<>> interned;
    auto intern = [&](const std::string& name) {
        auto it = interned.find(name);
        if (it != interned.end()) {
            return it->second;
        }
        std::uint64_t addr = replay_addr_base + names.size() * replay_addr_stride;
        names.push_back(name);
        interned.emplace(name, addr);
        return addr;
    };

    std::vector<RawSample> samples;
    int max_depth = 2;
    std::string raw_line;
    int line_no = 0;
    while (std::getline(file, raw_line)) {
        ++line_no;
        std::optional<ParsedLine> parsed = parse_line(raw_line, path, line_no);
        if (!parsed) {
            continue;
        }
        RawSample sample;
        sample.frames.reserve(parsed->frames_root_first.size());
        // File lines are root-first; RawSample frames are leaf-first.
        for (auto it = parsed->frames_root_first.rbegin(); it != parsed->frames_root_first.rend();
             ++it) {
            sample.frames.push_back(intern(*it));
        }
        max_depth = std::max(max_depth, static_cast<int>(sample.frames.size()));
        for (std::uint64_t i = 0; i < parsed->repeat; ++i) {
            sample.timestamp_ns = samples.size() * kSyntheticStepNs;
            samples.push_back(sample);
        }
    }
    return std::make_unique<ReplaySession>(std::move(samples), std::move(names), max_depth);
}

}  // namespace stacksurgeon
