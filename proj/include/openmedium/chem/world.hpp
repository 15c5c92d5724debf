#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "openmedium/binio.hpp"
#include "openmedium/config.hpp"
#include "openmedium/chem/rules.hpp"
#include "openmedium/rng.hpp"

namespace openmedium::chem {

inline constexpr int k_num_types = 6;  // a..f

inline char type_letter(std::uint8_t t) { return char('a' + t); }
inline std::uint8_t type_index(char c) { return std::uint8_t(c - 'a'); }

// Fixed Moore-neighborhood scan order; frozen because random draws map onto it.
inline constexpr std::array<std::pair<int, int>, 8> k_moore = {{
    {-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1},
}};

struct Atom {
    std::uint8_t type = 0;   // immutable for the atom's lifetime
    std::uint8_t state = 0;  // 0..max_state
    std::uint16_t x = 0, y = 0;
    bool barrier = false;  // never moves, reacts, or bonds
};

struct ChemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Toroidal grid of typed, stated atoms with Moore-local bonds. The update
// phases (reactions, motion, perturbation) see only atoms, bonds, and rules;
// organisms exist solely in the observatory's analysis. Atoms are never
// created or destroyed after seeding, so per-type censuses are run
// invariants.
class ChemWorld {
public:
    ChemWorld() = default;
    explicit ChemWorld(const RunConfig& cfg)
        : cfg_(cfg),
          w_(cfg.grid_width),
          h_(cfg.grid_height),
          grid_(std::size_t(w_) * h_, -1) {
        for (const auto& r : cfg.barriers)
            for (int y = r.y0; y <= r.y1; ++y)
                for (int x = r.x0; x <= r.x1; ++x)
                    if (at(std::uint16_t(x), std::uint16_t(y)) < 0)
                        add_atom('f', 0, std::uint16_t(x), std::uint16_t(y), true);
        if (!cfg.rules_path.empty()) set_rules(load_rules_text(cfg.rules_path));
    }

    const RunConfig& config() const { return cfg_; }
    std::uint32_t width() const { return w_; }
    std::uint32_t height() const { return h_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::vector<std::vector<std::uint32_t>>& adjacency() const { return adj_; }
    const std::vector<ReactionRule>& rules() const { return rules_; }
    const std::string& rules_text() const { return rules_text_; }
    const std::array<std::uint64_t, k_num_types>& census() const { return census_; }

    void set_rules(const std::string& text) {
        rules_ = parse_rules(text, cfg_.max_state);
        rules_text_ = text;
    }

    int at(std::uint16_t x, std::uint16_t y) const {
        return grid_[std::size_t(y) * w_ + x];
    }

    std::uint32_t add_atom(char type, std::uint8_t state, std::uint16_t x,
                           std::uint16_t y, bool barrier = false) {
        if (!is_concrete_type(type)) throw ChemError("bad atom type");
        if (at(x, y) >= 0) throw ChemError("cell occupied");
        Atom a{type_index(type), state, x, y, barrier};
        atoms_.push_back(a);
        adj_.emplace_back();
        std::uint32_t idx = std::uint32_t(atoms_.size() - 1);
        grid_[std::size_t(y) * w_ + x] = int(idx);
        census_[a.type]++;
        return idx;
    }

    bool has_bond(std::uint32_t i, std::uint32_t j) const {
        const auto& v = adj_[i];
        return std::find(v.begin(), v.end(), j) != v.end();
    }

    void bond_add(std::uint32_t i, std::uint32_t j) {
        if (i == j || has_bond(i, j)) return;
        adj_[i].insert(std::upper_bound(adj_[i].begin(), adj_[i].end(), j), j);
        adj_[j].insert(std::upper_bound(adj_[j].begin(), adj_[j].end(), i), i);
        ++bond_count_;
    }

    void bond_remove(std::uint32_t i, std::uint32_t j) {
        auto drop = [&](std::uint32_t a, std::uint32_t b) {
            auto& v = adj_[a];
            auto it = std::find(v.begin(), v.end(), b);
            if (it != v.end()) v.erase(it);
        };
        if (!has_bond(i, j)) return;
        drop(i, j);
        drop(j, i);
        --bond_count_;
    }

    std::uint64_t bond_count() const { return bond_count_; }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> bond_list() const {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
        out.reserve(bond_count_);
        for (std::uint32_t i = 0; i < adj_.size(); ++i)
            for (auto j : adj_[i])
                if (j > i) out.emplace_back(i, j);
        return out;
    }

    int torus_chebyshev(const Atom& a, const Atom& b) const {
        int dx = std::abs(int(a.x) - int(b.x));
        int dy = std::abs(int(a.y) - int(b.y));
        dx = std::min(dx, int(w_) - dx);
        dy = std::min(dy, int(h_) - dy);
        return std::max(dx, dy);
    }

    // --- update phases ----------------------------------------------------

    // Visits adjacent pairs in a randomized order; each atom reacts at most
    // once per step; the first matching rule in file order fires.
    void apply_reactions(RngStream& rng) {
        if (rules_.empty()) return;
        pairs_.clear();
        for (std::uint32_t i = 0; i < atoms_.size(); ++i) {
            const Atom& a = atoms_[i];
            if (a.barrier) continue;
            for (auto [dx, dy] : k_moore) {
                std::uint16_t nx = wrap_x(int(a.x) + dx);
                std::uint16_t ny = wrap_y(int(a.y) + dy);
                int j = at(nx, ny);
                if (j < 0 || std::uint32_t(j) <= i) continue;
                if (atoms_[std::size_t(j)].barrier) continue;
                pairs_.emplace_back(i, std::uint32_t(j));
            }
        }
        shuffle_inplace(rng, pairs_.data(), pairs_.size());
        ++react_epoch_;
        reacted_.resize(atoms_.size(), 0);
        for (auto [i, j] : pairs_) {
            if (reacted_[i] == react_epoch_ || reacted_[j] == react_epoch_) continue;
            if (try_react(i, j)) {
                reacted_[i] = react_epoch_;
                reacted_[j] = react_epoch_;
            }
        }
    }

    // Each non-barrier atom, in randomized order, proposes a uniformly random
    // Moore neighbor; accepted iff empty and every bond stays Moore-local.
    void move_atoms(RngStream& rng) {
        order_.resize(atoms_.size());
        for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
        shuffle_inplace(rng, order_.data(), order_.size());
        for (auto i : order_) {
            Atom& a = atoms_[i];
            if (a.barrier) continue;
            auto [dx, dy] = k_moore[rng.below(8)];
            std::uint16_t nx = wrap_x(int(a.x) + dx);
            std::uint16_t ny = wrap_y(int(a.y) + dy);
            if (at(nx, ny) >= 0) continue;
            Atom moved = a;
            moved.x = nx;
            moved.y = ny;
            bool ok = true;
            for (auto p : adj_[i])
                if (torus_chebyshev(moved, atoms_[p]) > 1) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            grid_[std::size_t(a.y) * w_ + a.x] = -1;
            grid_[std::size_t(ny) * w_ + nx] = int(i);
            a.x = nx;
            a.y = ny;
        }
    }

    // Environmental noise: bonds break and states reset at configured rates.
    // Atom count and types are untouched.
    void perturb(RngStream& rng) {
        if (cfg_.p_bond_break > 0.0 && bond_count_ > 0) {
            auto bonds = bond_list();
            bernoulli_positions(rng, bonds.size(), cfg_.p_bond_break,
                                [&](std::uint64_t k) {
                                    bond_remove(bonds[std::size_t(k)].first,
                                                bonds[std::size_t(k)].second);
                                });
        }
        if (cfg_.p_state_reset > 0.0) {
            bernoulli_positions(rng, atoms_.size(), cfg_.p_state_reset,
                                [&](std::uint64_t k) {
                                    Atom& a = atoms_[std::size_t(k)];
                                    if (!a.barrier) a.state = 0;
                                });
        }
    }

    // One step: reactions, then motion, then perturbation, each on its own
    // RNG stream.
    void step(RngStream& react_rng, RngStream& move_rng, RngStream& perturb_rng) {
        apply_reactions(react_rng);
        if (cfg_.motion_enabled) move_atoms(move_rng);
        perturb(perturb_rng);
    }

    // Places a linear e-capped chain plus scattered free food atoms.
    // Cap states: start cap e2, end cap e3 (the replication rule set keys
    // off these). Payload atoms start in state 1.
    void seed_replicator(const std::string& payload, int px, int py,
                         RngStream& seed_rng) {
        if (payload.empty()) throw ChemError("payload must be non-empty");
        for (char ch : payload)
            if (ch != 'a' && ch != 'b')
                throw ChemError("payload must be a sequence over {a,b}");
        std::uint32_t total = std::uint32_t(payload.size()) + 2;
        if (px < 0) px = int(w_) / 2 - int(total) / 2;
        if (py < 0) py = int(h_) / 2;
        std::vector<std::uint32_t> chain;
        for (std::uint32_t i = 0; i < total; ++i) {
            std::uint16_t x = wrap_x(px + int(i));
            std::uint16_t y = wrap_y(py);
            if (at(x, y) >= 0) throw ChemError("insufficient space for replicator");
            char t = (i == 0 || i + 1 == total) ? 'e' : payload[i - 1];
            std::uint8_t s = i == 0 ? 2 : (i + 1 == total ? 3 : 1);
            chain.push_back(add_atom(t, s, x, y));
        }
        for (std::uint32_t i = 0; i + 1 < chain.size(); ++i)
            bond_add(chain[i], chain[i + 1]);
        scatter_food(cfg_.chem_food, cfg_.chem_food_caps, seed_rng);
    }

    // Uniformly scatters free food: `n_ab` atoms drawn 50/50 from {a,b} and
    // `n_caps` cap atoms of type e, all state 0, on empty cells.
    void scatter_food(std::uint32_t n_ab, std::uint32_t n_caps, RngStream& rng) {
        std::uint64_t cells = std::uint64_t(w_) * h_;
        if (atoms_.size() + n_ab + n_caps > cells)
            throw ChemError("insufficient space for food");
        auto place = [&](char type) {
            while (true) {
                std::uint64_t c = rng.below(cells);
                std::uint16_t x = std::uint16_t(c % w_);
                std::uint16_t y = std::uint16_t(c / w_);
                if (at(x, y) < 0) {
                    add_atom(type, 0, x, y);
                    return;
                }
            }
        };
        for (std::uint32_t k = 0; k < n_ab; ++k)
            place(rng.below(2) == 0 ? 'a' : 'b');
        for (std::uint32_t k = 0; k < n_caps; ++k) place('e');
    }

    std::array<std::uint64_t, k_num_types> recount_census() const {
        std::array<std::uint64_t, k_num_types> out{};
        for (const auto& a : atoms_) out[a.type]++;
        return out;
    }

    // Free food atoms: unbonded, state 0, not barrier.
    std::uint64_t free_food() const {
        std::uint64_t n = 0;
        for (std::uint32_t i = 0; i < atoms_.size(); ++i)
            if (!atoms_[i].barrier && atoms_[i].state == 0 && adj_[i].empty()) ++n;
        return n;
    }

    bool occupancy_ok() const {
        std::uint64_t n = 0;
        for (auto v : grid_)
            if (v >= 0) ++n;
        return n == atoms_.size();
    }

    bool bonds_local() const {
        for (std::uint32_t i = 0; i < atoms_.size(); ++i)
            for (auto j : adj_[i])
                if (torus_chebyshev(atoms_[i], atoms_[j]) > 1) return false;
        return true;
    }

    // test hook for audit fault-injection: removes an atom outright,
    // deliberately breaking conservation
    void delete_atom_for_test(std::uint32_t i) {
        for (auto j : std::vector<std::uint32_t>(adj_[i])) bond_remove(i, j);
        grid_[std::size_t(atoms_[i].y) * w_ + atoms_[i].x] = -1;
        // swap-remove, fixing indices of the moved atom; census left stale
        // on purpose so the audit sees the discrepancy
        std::uint32_t last = std::uint32_t(atoms_.size() - 1);
        if (i != last) {
            for (auto j : std::vector<std::uint32_t>(adj_[last])) {
                bond_remove(last, j);
                bond_add_index_unchecked(i, j);
            }
            atoms_[i] = atoms_[last];
            grid_[std::size_t(atoms_[i].y) * w_ + atoms_[i].x] = int(i);
        }
        atoms_.pop_back();
        adj_.pop_back();
    }

    void save(BinWriter& w) const {
        w.u32(w_);
        w.u32(h_);
        w.u32(std::uint32_t(atoms_.size()));
        for (const auto& a : atoms_) {
            w.u8(a.type);
            w.u8(a.state);
            w.u16(a.x);
            w.u16(a.y);
            w.u8(a.barrier ? 1 : 0);
        }
        auto bonds = bond_list();
        w.u32(std::uint32_t(bonds.size()));
        for (auto [i, j] : bonds) {
            w.u32(i);
            w.u32(j);
        }
        for (auto c : census_) w.u64(c);
        w.str(rules_text_);
    }

    void load(BinReader& r) {
        std::uint32_t w = r.u32();
        std::uint32_t h = r.u32();
        if (w != w_ || h != h_) throw CorruptData("grid size mismatch");
        atoms_.clear();
        adj_.clear();
        census_ = {};
        bond_count_ = 0;
        std::fill(grid_.begin(), grid_.end(), -1);
        std::uint32_t n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i) {
            Atom a;
            a.type = r.u8();
            a.state = r.u8();
            a.x = r.u16();
            a.y = r.u16();
            a.barrier = r.u8() != 0;
            if (a.type >= k_num_types || a.x >= w_ || a.y >= h_)
                throw CorruptData("bad atom record");
            atoms_.push_back(a);
            adj_.emplace_back();
            grid_[std::size_t(a.y) * w_ + a.x] = int(i);
        }
        std::uint32_t bn = r.u32();
        for (std::uint32_t k = 0; k < bn; ++k) {
            std::uint32_t i = r.u32();
            std::uint32_t j = r.u32();
            if (i >= n || j >= n) throw CorruptData("bad bond record");
            bond_add(i, j);
        }
        for (auto& c : census_) c = r.u64();
        set_rules(r.str());
    }

private:
    std::uint16_t wrap_x(int x) const {
        int w = int(w_);
        return std::uint16_t(((x % w) + w) % w);
    }
    std::uint16_t wrap_y(int y) const {
        int h = int(h_);
        return std::uint16_t(((y % h) + h) % h);
    }

    bool try_react(std::uint32_t i, std::uint32_t j) {
        Atom& A = atoms_[i];
        Atom& B = atoms_[j];
        bool bonded = has_bond(i, j);
        for (const auto& r : rules_) {
            if (rule_matches(r, type_letter(A.type), A.state, type_letter(B.type),
                             B.state, bonded)) {
                A.state = r.s1_after;
                B.state = r.s2_after;
                if (r.bonded_after && !bonded) bond_add(i, j);
                else if (!r.bonded_after && bonded) bond_remove(i, j);
                return true;
            }
            if (rule_matches(r, type_letter(B.type), B.state, type_letter(A.type),
                             A.state, bonded)) {
                B.state = r.s1_after;
                A.state = r.s2_after;
                if (r.bonded_after && !bonded) bond_add(i, j);
                else if (!r.bonded_after && bonded) bond_remove(i, j);
                return true;
            }
        }
        return false;
    }

    void bond_add_index_unchecked(std::uint32_t i, std::uint32_t j) { bond_add(i, j); }

    RunConfig cfg_;
    std::uint32_t w_ = 0, h_ = 0;
    std::vector<int> grid_;
    std::vector<Atom> atoms_;
    std::vector<std::vector<std::uint32_t>> adj_;
    std::array<std::uint64_t, k_num_types> census_{};
    std::uint64_t bond_count_ = 0;
    std::vector<ReactionRule> rules_;
    std::string rules_text_;
    // persistent scratch
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs_;
    std::vector<std::uint32_t> order_;
    std::vector<std::uint32_t> reacted_;
    std::uint32_t react_epoch_ = 0;
};

}  // namespace openmedium::chem
