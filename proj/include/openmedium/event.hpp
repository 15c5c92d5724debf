#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "openmedium/rng.hpp"

namespace openmedium {

enum class EventKind : std::uint8_t {
    birth,
    death,
    reap,
    error,
    mutation,
    audit_violation,
    stasis_flag,
    extinction,
};

inline const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::birth: return "birth";
        case EventKind::death: return "death";
        case EventKind::reap: return "reap";
        case EventKind::error: return "error";
        case EventKind::mutation: return "mutation";
        case EventKind::audit_violation: return "audit_violation";
        case EventKind::stasis_flag: return "stasis_flag";
        case EventKind::extinction: return "extinction";
    }
    return "?";
}

struct Event {
    std::uint64_t step = 0;
    EventKind kind = EventKind::error;
    std::string payload;  // space-separated key=value pairs, stable order

    std::string line() const {
        std::ostringstream o;
        o << step << ' ' << event_kind_name(kind);
        if (!payload.empty()) o << ' ' << payload;
        o << '\n';
        return o.str();
    }
};

// Line-delimited canonical event log. The rolling hash travels in checkpoints
// so a resumed run must keep producing the identical byte stream. stasis_flag
// lines are observatory annotations and stay out of the hash: the world
// trajectory must not depend on whether the observatory is attached.
class EventLog {
public:
    EventLog() = default;

    void open(const std::string& path) {
        file_.open(path, std::ios::binary | std::ios::trunc);
        if (!file_) throw std::runtime_error("cannot open event log: " + path);
    }

    void append(const Event& e) {
        last_step_ = e.step;
        std::string l = e.line();
        if (e.kind != EventKind::stasis_flag)
            hash_ = fnv1a(l.data(), l.size(), hash_);
        if (file_.is_open()) file_.write(l.data(), std::streamsize(l.size()));
        if (sink_) sink_->append(l);
    }

    void flush() {
        if (file_.is_open()) file_.flush();
    }

    std::uint64_t hash() const { return hash_; }
    void restore_hash(std::uint64_t h) { hash_ = h; }

    // test hook: capture lines in memory
    void capture(std::string* sink) { sink_ = sink; }

private:
    std::ofstream file_;
    std::string* sink_ = nullptr;
    std::uint64_t hash_ = fnv1a_offset;
    std::uint64_t last_step_ = 0;
};

}  // namespace openmedium
