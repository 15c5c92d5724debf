#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "openmedium/chem/world.hpp"
#include "openmedium/rng.hpp"
#include "openmedium/soup/genome.hpp"

namespace openmedium::obs {

// Bond-graph partition of a chem snapshot; barrier atoms are excluded.
// Components are ordered by their smallest atom index, members sorted.
inline std::vector<std::vector<std::uint32_t>> connected_components(
    const chem::ChemWorld& w) {
    const auto& atoms = w.atoms();
    std::vector<std::uint32_t> parent(atoms.size());
    for (std::uint32_t i = 0; i < parent.size(); ++i) parent[i] = i;
    std::vector<std::uint32_t> stack;
    auto find = [&](std::uint32_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    for (std::uint32_t i = 0; i < atoms.size(); ++i)
        for (auto j : w.adjacency()[i])
            if (j > i) {
                auto ra = find(i), rb = find(j);
                if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
            }
    std::map<std::uint32_t, std::vector<std::uint32_t>> groups;
    for (std::uint32_t i = 0; i < atoms.size(); ++i) {
        if (atoms[i].barrier) continue;
        groups[find(i)].push_back(i);
    }
    std::vector<std::vector<std::uint32_t>> out;
    out.reserve(groups.size());
    for (auto& [root, members] : groups) out.push_back(std::move(members));
    return out;
}

enum class ComponentKind : std::uint8_t { chain, singleton, non_chain };

struct ComponentGenotype {
    ComponentKind kind = ComponentKind::non_chain;
    std::string canonical;
    std::uint64_t id = 0;
};

// Canonical genotype of a chem component. Chains (simple paths with e end
// caps) read their payload cap-to-cap, lexicographic minimum of the two
// directions. Singletons are their type letter. Anything else is classified
// non-chain and keyed by its sorted (type,degree) multiset, prefixed "*".
inline ComponentGenotype extract_genotype(const chem::ChemWorld& w,
                                          const std::vector<std::uint32_t>& comp) {
    const auto& atoms = w.atoms();
    const auto& adj = w.adjacency();
    ComponentGenotype g;
    if (comp.size() == 1) {
        g.kind = ComponentKind::singleton;
        g.canonical = std::string(1, chem::type_letter(atoms[comp[0]].type));
        g.id = fnv1a(g.canonical);
        return g;
    }
    std::size_t deg1 = 0, edges = 0;
    bool deg_ok = true;
    std::uint32_t end_a = 0, end_b = 0;
    for (auto i : comp) {
        std::size_t d = adj[i].size();
        edges += d;
        if (d > 2) deg_ok = false;
        if (d == 1) {
            if (deg1 == 0) end_a = i;
            else end_b = i;
            ++deg1;
        }
    }
    edges /= 2;
    bool is_path = deg_ok && deg1 == 2 && edges == comp.size() - 1;
    bool capped = is_path && atoms[end_a].type == chem::type_index('e') &&
                  atoms[end_b].type == chem::type_index('e');
    if (capped) {
        std::string fwd;
        std::uint32_t prev = end_a, cur = adj[end_a][0];
        while (cur != end_b) {
            fwd += chem::type_letter(atoms[cur].type);
            std::uint32_t next = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
            prev = cur;
            cur = next;
        }
        std::string rev(fwd.rbegin(), fwd.rend());
        g.kind = ComponentKind::chain;
        g.canonical = std::min(fwd, rev);
        g.id = fnv1a(g.canonical);
        return g;
    }
    std::vector<std::string> tokens;
    tokens.reserve(comp.size());
    for (auto i : comp)
        tokens.push_back(std::string(1, chem::type_letter(atoms[i].type)) +
                         std::to_string(adj[i].size()));
    std::sort(tokens.begin(), tokens.end());
    g.kind = ComponentKind::non_chain;
    g.canonical = "*";
    for (auto& t : tokens) g.canonical += t;
    g.id = fnv1a(g.canonical);
    return g;
}

struct GenotypeRecord {
    std::uint64_t id = 0;
    std::string canonical;  // soup: hex nibbles; chem: genotype string
    std::uint64_t first_seen = 0;
    std::uint64_t last_seen = 0;
    std::int64_t abundance = 0;
    std::int64_t max_abundance = 0;
    // persistence at abundance >= n_min
    bool in_streak = false;
    std::uint64_t streak_start = 0;
    std::uint64_t best_streak = 0;

    std::uint64_t streak_at(std::uint64_t now) const {
        std::uint64_t cur = in_streak ? now - streak_start : 0;
        return std::max(best_streak, cur);
    }
};

// Abundance bookkeeping per genotype. Soup worlds feed it birth/death
// events (exact step resolution); chem worlds feed absolute per-frame
// abundances (the physics has no birth events to observe).
class GenotypeRegistry {
public:
    explicit GenotypeRegistry(std::uint32_t n_min = 1) : n_min_(n_min) {}

    std::uint32_t n_min() const { return n_min_; }
    const std::map<std::uint64_t, GenotypeRecord>& records() const { return recs_; }

    void on_birth(std::uint64_t step, std::uint64_t gid, const std::string& canonical) {
        GenotypeRecord& r = touch(step, gid, canonical);
        set_abundance(r, step, r.abundance + 1);
        ++births_since_frame_;
    }

    void on_death(std::uint64_t step, std::uint64_t gid) {
        auto it = recs_.find(gid);
        if (it == recs_.end()) return;
        set_abundance(it->second, step, it->second.abundance - 1);
        ++deaths_since_frame_;
    }

    // Re-seeds abundance for organisms already alive when a checkpoint is
    // resumed; not counted as a birth.
    void absorb_existing(std::uint64_t step, std::uint64_t gid,
                         const std::string& canonical) {
        GenotypeRecord& r = touch(step, gid, canonical);
        set_abundance(r, step, r.abundance + 1);
    }

    // Chem path: absolute abundances of every genotype visible this frame.
    void observe_frame(std::uint64_t step,
                       const std::vector<ComponentGenotype>& seen) {
        std::map<std::uint64_t, std::int64_t> counts;
        for (const auto& g : seen) {
            counts[g.id]++;
            touch(step, g.id, g.canonical);
        }
        for (auto& [gid, r] : recs_) {
            auto it = counts.find(gid);
            set_abundance(r, step, it == counts.end() ? 0 : it->second);
        }
    }

    struct FrameDelta {
        std::uint64_t births = 0, deaths = 0, new_genotypes = 0;
    };

    FrameDelta take_frame_delta(std::uint64_t frame_step) {
        FrameDelta d;
        d.births = births_since_frame_;
        d.deaths = deaths_since_frame_;
        for (const auto& [gid, r] : recs_)
            if (r.first_seen > last_frame_step_ && r.first_seen <= frame_step)
                ++d.new_genotypes;
        births_since_frame_ = deaths_since_frame_ = 0;
        last_frame_step_ = frame_step;
        return d;
    }

    std::uint64_t richness() const {
        std::uint64_t n = 0;
        for (const auto& [gid, r] : recs_)
            if (r.abundance > 0) ++n;
        return n;
    }

    double shannon() const {
        std::int64_t total = 0;
        std::uint64_t kinds = 0;
        for (const auto& [gid, r] : recs_)
            if (r.abundance > 0) {
                total += r.abundance;
                ++kinds;
            }
        if (kinds <= 1 || total == 0) return 0.0;
        double h = 0.0;
        for (const auto& [gid, r] : recs_)
            if (r.abundance > 0) {
                double p = double(r.abundance) / double(total);
                h -= p * std::log(p);
            }
        return h;
    }

    // Longest canonical sequence is irrelevant; dominance is by abundance,
    // ties broken toward the smaller genotype id.
    const GenotypeRecord* dominant() const {
        const GenotypeRecord* best = nullptr;
        for (const auto& [gid, r] : recs_) {
            if (r.abundance <= 0) continue;
            if (!best || r.abundance > best->abundance) best = &r;
        }
        return best;
    }

private:
    GenotypeRecord& touch(std::uint64_t step, std::uint64_t gid,
                          const std::string& canonical) {
        auto [it, inserted] = recs_.try_emplace(gid);
        GenotypeRecord& r = it->second;
        if (inserted) {
            r.id = gid;
            r.canonical = canonical;
            r.first_seen = step;
            r.last_seen = step;
        }
        return r;
    }

    void set_abundance(GenotypeRecord& r, std::uint64_t step, std::int64_t value) {
        if (value < 0) value = 0;
        bool was = r.abundance >= std::int64_t(n_min_);
        r.abundance = value;
        r.max_abundance = std::max(r.max_abundance, value);
        if (value > 0) r.last_seen = step;
        bool is = value >= std::int64_t(n_min_);
        if (!was && is) {
            r.in_streak = true;
            r.streak_start = step;
        } else if (was && !is && r.in_streak) {
            r.best_streak = std::max(r.best_streak, step - r.streak_start);
            r.in_streak = false;
        }
    }

    std::uint32_t n_min_;
    std::map<std::uint64_t, GenotypeRecord> recs_;
    std::uint64_t births_since_frame_ = 0;
    std::uint64_t deaths_since_frame_ = 0;
    std::uint64_t last_frame_step_ = 0;
};

}  // namespace openmedium::obs
