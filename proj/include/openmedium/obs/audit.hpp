#pragma once

#include <cstdint>
#include <string>

#include "openmedium/chem/world.hpp"
#include "openmedium/soup/world.hpp"

namespace openmedium::obs {

struct AuditReport {
    bool ok = true;
    std::string detail;
};

// Soup: bodies + child allocations + free cells must tile the soup exactly.
inline AuditReport audit(const soup::SoupWorld& w) {
    std::uint64_t used = 0;
    for (const auto& [id, o] : w.organisms()) {
        used += o.len;
        if (o.has_child) used += o.child_len;
    }
    std::uint64_t total = used + w.arena().free_total();
    if (total == w.arena().size()) return {};
    return {false, "memory accounting expected=" + std::to_string(w.arena().size()) +
                       " actual=" + std::to_string(total)};
}

// Chem: per-type census must equal the run's initial census, zero tolerance.
inline AuditReport audit(const chem::ChemWorld& w) {
    auto actual = w.recount_census();
    const auto& expected = w.census();
    for (int t = 0; t < chem::k_num_types; ++t)
        if (actual[t] != expected[t])
            return {false, std::string("census type=") + chem::type_letter(std::uint8_t(t)) +
                               " expected=" + std::to_string(expected[t]) +
                               " actual=" + std::to_string(actual[t])};
    return {};
}

}  // namespace openmedium::obs
