#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "openmedium/obs/genotype.hpp"
#include "openmedium/soup/world.hpp"

namespace openmedium::obs {

// Organisms whose completed execution window ran mostly foreign code.
// Pure function of the window counters and the threshold; strictly greater
// than, so a fraction of exactly the threshold is not flagged.
inline std::vector<std::uint64_t> detect_parasites(const soup::SoupWorld& w,
                                                   double fraction) {
    std::vector<std::uint64_t> out;
    for (const auto& [id, o] : w.organisms()) {
        if (!o.window_done) continue;
        double total = double(o.last_win_own) + double(o.last_win_foreign);
        if (total == 0) continue;
        if (double(o.last_win_foreign) / total > fraction) out.push_back(id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

enum class StasisState : std::uint8_t { stasis, active, indeterminate };

struct StasisVerdict {
    StasisState state = StasisState::indeterminate;
    std::uint64_t window_begin = 0;
    std::uint64_t window_end = 0;
    std::optional<std::uint64_t> newest_persistent;  // genotype id

    bool active() const { return state == StasisState::active; }
};

// Active iff some genotype first seen within the last W steps held abundance
// >= n_min (the registry's threshold) for at least w consecutive steps.
// Histories shorter than W are indeterminate, which is distinct from stasis.
inline StasisVerdict detect_stasis(const GenotypeRegistry& reg, std::uint64_t now,
                                   std::uint64_t window_w, std::uint64_t persist_w) {
    StasisVerdict v;
    v.window_end = now;
    v.window_begin = now >= window_w ? now - window_w : 0;
    if (now < window_w) {
        v.state = StasisState::indeterminate;
        return v;
    }
    v.state = StasisState::stasis;
    std::uint64_t newest_seen = 0;
    for (const auto& [gid, r] : reg.records()) {
        if (r.first_seen <= v.window_begin) continue;  // not new within window
        if (r.streak_at(now) < persist_w) continue;
        v.state = StasisState::active;
        if (!v.newest_persistent || r.first_seen > newest_seen ||
            (r.first_seen == newest_seen && gid > *v.newest_persistent)) {
            v.newest_persistent = gid;
            newest_seen = r.first_seen;
        }
    }
    return v;
}

inline const char* stasis_state_name(StasisState s) {
    switch (s) {
        case StasisState::stasis: return "stasis";
        case StasisState::active: return "active";
        case StasisState::indeterminate: return "indeterminate";
    }
    return "?";
}

}  // namespace openmedium::obs
