#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "openmedium/binio.hpp"
#include "openmedium/config.hpp"
#include "openmedium/event.hpp"
#include "openmedium/rng.hpp"
#include "openmedium/soup/arena.hpp"
#include "openmedium/soup/genome.hpp"
#include "openmedium/soup/isa.hpp"

namespace openmedium::soup {

inline constexpr std::size_t k_stack_depth = 10;
inline constexpr std::uint32_t k_max_template = 16;

enum class SearchDir { forward, backward, nearest };

struct TemplateRef {
    std::uint32_t len = 0;   // capped at k_max_template
    bool too_long = false;   // run continued past the cap
};

// Maximal nop run starting at pos, capped; longer runs are degenerate.
inline TemplateRef template_at(const std::vector<std::uint8_t>& cells, std::uint32_t pos) {
    const std::uint32_t n = std::uint32_t(cells.size());
    TemplateRef t;
    while (t.len < k_max_template && is_nop(cells[(pos + t.len) % n])) ++t.len;
    if (t.len == k_max_template && is_nop(cells[(pos + t.len) % n])) t.too_long = true;
    return t;
}

// Locates the nearest occurrence of the complemented template within
// search_limit cells of `from` (the searching instruction's address).
// Forward matches report one past the match's last cell; backward matches
// report the match's first cell; nearest takes the smaller distance with
// ties going forward. Pure function of its inputs.
inline std::optional<std::uint32_t> template_search(
    const std::vector<std::uint8_t>& cells, std::uint32_t from, SearchDir dir,
    const std::uint8_t* tpl, std::uint32_t tlen, std::uint32_t limit) {
    if (tlen == 0) return std::nullopt;
    const std::uint32_t n = std::uint32_t(cells.size());
    if (limit > n - 1) limit = n - 1;  // beyond a full lap nothing new exists
    std::uint8_t comp[k_max_template];
    for (std::uint32_t i = 0; i < tlen; ++i) comp[i] = tpl[i] ^ 1;
    auto match = [&](std::uint32_t s) {
        for (std::uint32_t i = 0; i < tlen; ++i)
            if (cells[(s + i) % n] != comp[i]) return false;
        return true;
    };
    for (std::uint32_t d = 1; d <= limit; ++d) {
        if (dir != SearchDir::backward) {
            std::uint32_t s = (from + d) % n;
            if (match(s)) return (s + tlen) % n;
        }
        if (dir != SearchDir::forward) {
            std::uint32_t s = std::uint32_t((std::uint64_t(from) + n - d) % n);
            if (match(s)) return s;
        }
    }
    return std::nullopt;
}

struct Cpu {
    std::uint32_t ax = 0, bx = 0, cx = 0;
    std::uint32_t ip = 0;
    std::uint32_t stack[k_stack_depth] = {};
    std::uint8_t sp = 0;
    std::uint32_t error_count = 0;
};

struct Organism {
    std::uint64_t id = 0;
    std::uint32_t start = 0, len = 0;
    bool has_child = false;
    std::uint32_t child_start = 0, child_len = 0;
    Cpu cpu;
    std::uint64_t parent_id = 0;
    std::uint64_t birth_step = 0;
    std::uint64_t genotype_id = 0;
    // execution-locality counters over a sliding window of instructions
    std::uint32_t win_own = 0, win_foreign = 0;
    std::uint32_t last_win_own = 0, last_win_foreign = 0;
    bool window_done = false;
    // intrusive links (0 = none)
    std::uint64_t reap_prev = 0, reap_next = 0;
    std::uint64_t sched_prev = 0, sched_next = 0;
};

// Tierra-style medium: circular instruction memory, per-organism CPUs,
// template addressing, protected writes, reaper and round-robin slicer.
// Reproduction happens only through an organism's own executed divide;
// nothing in here evaluates or ranks organisms.
class SoupWorld {
public:
    SoupWorld() = default;
    explicit SoupWorld(const RunConfig& cfg)
        : cfg_(cfg), cells_(cfg.soup_size, 0), arena_(cfg.soup_size) {}

    // Observation-only callbacks (genotype registry); they never feed back
    // into world state.
    using BirthFn = std::function<void(std::uint64_t step, std::uint64_t gid,
                                       const std::vector<std::uint8_t>& body)>;
    using DeathFn = std::function<void(std::uint64_t step, std::uint64_t gid)>;
    void set_lifecycle_observer(BirthFn on_birth, DeathFn on_death) {
        birth_fn_ = std::move(on_birth);
        death_fn_ = std::move(on_death);
    }

    const RunConfig& config() const { return cfg_; }
    const std::vector<std::uint8_t>& cells() const { return cells_; }
    const SoupArena& arena() const { return arena_; }
    const std::unordered_map<std::uint64_t, Organism>& organisms() const { return orgs_; }
    std::size_t population() const { return orgs_.size(); }
    std::uint64_t total_executed() const { return total_executed_; }
    std::uint64_t free_cells() const { return arena_.free_total(); }

    std::vector<std::uint8_t> body_cells(const Organism& o) const {
        std::vector<std::uint8_t> out(o.len);
        for (std::uint32_t i = 0; i < o.len; ++i)
            out[i] = cells_[(o.start + i) % cells_.size()];
        return out;
    }

    std::uint64_t genotype_of_region(std::uint32_t start, std::uint32_t len) const {
        std::uint64_t h = fnv1a_offset;
        const std::uint32_t n = std::uint32_t(cells_.size());
        for (std::uint32_t i = 0; i < len; ++i)
            h = fnv1a(&cells_[(start + i) % n], 1, h);
        return h;
    }

    // Places a genome at an explicit address and registers the organism.
    // Address 0 with a freshly constructed world is the ancestor case.
    std::uint64_t seed_organism(const std::vector<std::uint8_t>& genome,
                                std::uint32_t addr, EventLog& log, std::uint64_t step) {
        if (genome.empty()) throw GenomeError("genome is empty");
        if (genome.size() > cfg_.max_org_size)
            throw GenomeError("genome too long (" + std::to_string(genome.size()) +
                              " > max_org_size " + std::to_string(cfg_.max_org_size) + ")");
        if (!arena_.alloc_at(addr, std::uint32_t(genome.size())))
            throw GenomeError("seed location is occupied");
        const std::uint32_t n = std::uint32_t(cells_.size());
        for (std::uint32_t i = 0; i < genome.size(); ++i)
            cells_[(addr + i) % n] = genome[i] & 0xf;

        Organism o;
        o.id = next_org_id_++;
        o.start = addr;
        o.len = std::uint32_t(genome.size());
        o.cpu.ip = addr;
        o.birth_step = step;
        o.genotype_id = genotype_of_region(o.start, o.len);
        std::uint64_t id = o.id;
        orgs_.emplace(id, o);
        reaper_push_tail(id);
        sched_insert_before_current(id);
        if (sched_current_ == 0) {
            sched_current_ = id;
            cycle_anchor_ = id;
        }
        emit_birth(log, step, orgs_.at(id));
        return id;
    }

    std::uint64_t seed_ancestor(const std::string& genome_path, EventLog& log,
                                std::uint64_t step) {
        return seed_organism(genome_load(genome_path), 0, log, step);
    }

    // One scheduler turn: the current organism executes its slice, the ring
    // advances, the reaper trims over-threshold occupancy, and a completed
    // ring cycle fires the background cosmic-ray sweep.
    void step(RngStream& copy_rng, RngStream& cosmic_rng, EventLog& log,
              std::uint64_t step_no) {
        if (orgs_.empty()) return;
        ctx_ = {&copy_rng, &cosmic_rng, &log, step_no};
        const std::uint64_t cur = sched_current_;
        Organism* org = &orgs_.at(cur);
        executor_killed_ = false;
        const std::uint64_t budget = slice_budget(org->len);
        for (std::uint64_t k = 0; k < budget; ++k) {
            std::uint8_t op = cells_[org->cpu.ip];
            execute_instruction(*org);
            if (executor_killed_) break;
            if (op == op_mal) {
                // mal can trigger a reap pass; re-resolve the executor
                auto it = orgs_.find(cur);
                if (it == orgs_.end()) break;
                org = &it->second;
            }
        }
        bool cycle_done = false;
        if (!executor_killed_) {
            if (auto it = orgs_.find(cur); it != orgs_.end())
                sched_current_ = it->second.sched_next;
        }
        // executor death already moved sched_current_ to its successor
        cycle_done = (sched_current_ != 0 && sched_current_ == cycle_anchor_);
        if (!orgs_.empty() &&
            double(arena_.occupied()) > cfg_.fill_threshold * double(arena_.size()))
            reap(log, step_no);
        if (cycle_done && !orgs_.empty()) cosmic_ray(cosmic_rng, log, step_no);
        ctx_ = {};
    }

    // Kills from the reaper-queue head until occupancy drops below the
    // threshold minus hysteresis. Returns the number killed.
    std::size_t reap(EventLog& log, std::uint64_t step_no) {
        const double size = double(arena_.size());
        if (double(arena_.occupied()) <= cfg_.fill_threshold * size) return 0;
        const double target = (cfg_.fill_threshold - cfg_.fill_hysteresis) * size;
        std::size_t killed = 0;
        while (reap_head_ != 0 && double(arena_.occupied()) > target) {
            kill_organism(reap_head_, log, step_no);
            ++killed;
        }
        if (killed > 0) {
            Event e{step_no, EventKind::reap,
                    "killed=" + std::to_string(killed) +
                        " occupied=" + std::to_string(arena_.occupied())};
            log.append(e);
        }
        return killed;
    }

    // Background perturbation: every cell flips one random bit with
    // probability p_cosmic, applied once per full ring cycle.
    void cosmic_ray(RngStream& rng, EventLog& log, std::uint64_t step_no) {
        if (cfg_.p_cosmic <= 0.0) return;
        const std::uint32_t n = std::uint32_t(cells_.size());
        bernoulli_positions(rng, n, cfg_.p_cosmic, [&](std::uint64_t i) {
            std::uint8_t bit = std::uint8_t(rng.below(4));
            cells_[i] ^= std::uint8_t(1u << bit);
            Event e{step_no, EventKind::mutation,
                    "kind=cosmic addr=" + std::to_string(i) +
                        " bit=" + std::to_string(bit)};
            log.append(e);
        });
    }

    std::uint64_t slice_budget(std::uint32_t len) const {
        if (cfg_.slice_pow == 0.0) return cfg_.slice_base;
        return std::uint64_t(std::llround(double(cfg_.slice_base) *
                                          std::pow(double(len), cfg_.slice_pow)));
    }

    // Memory accounting invariant: bodies + child allocations + free == size.
    bool memory_accounting_ok() const {
        std::uint64_t used = 0;
        for (const auto& [id, o] : orgs_) {
            used += o.len;
            if (o.has_child) used += o.child_len;
        }
        return used + arena_.free_total() == arena_.size();
    }

    std::uint64_t current_organism() const { return sched_current_; }
    std::uint64_t reaper_head() const { return reap_head_; }

    std::vector<std::uint64_t> reaper_order() const {
        std::vector<std::uint64_t> out;
        for (std::uint64_t id = reap_head_; id != 0; id = orgs_.at(id).reap_next)
            out.push_back(id);
        return out;
    }
    std::vector<std::uint64_t> scheduler_order() const {
        std::vector<std::uint64_t> out;
        if (sched_current_ == 0) return out;
        std::uint64_t id = sched_current_;
        do {
            out.push_back(id);
            id = orgs_.at(id).sched_next;
        } while (id != sched_current_);
        return out;
    }

    void save(BinWriter& w) const {
        w.u32(std::uint32_t(cells_.size()));
        w.bytes(cells_.data(), cells_.size());
        arena_.save(w);
        w.u64(next_org_id_);
        w.u64(total_executed_);
        w.u64(cycle_anchor_);
        std::vector<std::uint64_t> ids;
        ids.reserve(orgs_.size());
        for (const auto& [id, o] : orgs_) ids.push_back(id);
        std::sort(ids.begin(), ids.end());
        w.u32(std::uint32_t(ids.size()));
        for (auto id : ids) {
            const Organism& o = orgs_.at(id);
            w.u64(o.id);
            w.u32(o.start);
            w.u32(o.len);
            w.u8(o.has_child ? 1 : 0);
            w.u32(o.child_start);
            w.u32(o.child_len);
            w.u32(o.cpu.ax);
            w.u32(o.cpu.bx);
            w.u32(o.cpu.cx);
            w.u32(o.cpu.ip);
            w.u8(o.cpu.sp);
            for (auto v : o.cpu.stack) w.u32(v);
            w.u32(o.cpu.error_count);
            w.u64(o.parent_id);
            w.u64(o.birth_step);
            w.u64(o.genotype_id);
            w.u32(o.win_own);
            w.u32(o.win_foreign);
            w.u32(o.last_win_own);
            w.u32(o.last_win_foreign);
            w.u8(o.window_done ? 1 : 0);
        }
        auto order = reaper_order();
        w.u32(std::uint32_t(order.size()));
        for (auto id : order) w.u64(id);
        auto ring = scheduler_order();
        w.u32(std::uint32_t(ring.size()));
        for (auto id : ring) w.u64(id);
    }

    void load(BinReader& r) {
        std::uint32_t n = r.u32();
        if (n != cfg_.soup_size) throw CorruptData("soup size mismatch");
        cells_.resize(n);
        auto raw = r.take(n);
        std::copy(raw.begin(), raw.end(), reinterpret_cast<char*>(cells_.data()));
        arena_.load(r);
        next_org_id_ = r.u64();
        total_executed_ = r.u64();
        cycle_anchor_ = r.u64();
        orgs_.clear();
        std::uint32_t count = r.u32();
        for (std::uint32_t i = 0; i < count; ++i) {
            Organism o;
            o.id = r.u64();
            o.start = r.u32();
            o.len = r.u32();
            o.has_child = r.u8() != 0;
            o.child_start = r.u32();
            o.child_len = r.u32();
            o.cpu.ax = r.u32();
            o.cpu.bx = r.u32();
            o.cpu.cx = r.u32();
            o.cpu.ip = r.u32();
            o.cpu.sp = r.u8();
            for (auto& v : o.cpu.stack) v = r.u32();
            o.cpu.error_count = r.u32();
            o.parent_id = r.u64();
            o.birth_step = r.u64();
            o.genotype_id = r.u64();
            o.win_own = r.u32();
            o.win_foreign = r.u32();
            o.last_win_own = r.u32();
            o.last_win_foreign = r.u32();
            o.window_done = r.u8() != 0;
            orgs_.emplace(o.id, o);
        }
        std::uint32_t qn = r.u32();
        reap_head_ = reap_tail_ = 0;
        std::uint64_t prev = 0;
        for (std::uint32_t i = 0; i < qn; ++i) {
            std::uint64_t id = r.u64();
            Organism& o = orgs_.at(id);
            o.reap_prev = prev;
            o.reap_next = 0;
            if (prev) orgs_.at(prev).reap_next = id;
            else reap_head_ = id;
            reap_tail_ = id;
            prev = id;
        }
        std::uint32_t rn = r.u32();
        sched_current_ = 0;
        std::vector<std::uint64_t> ring(rn);
        for (auto& id : ring) id = r.u64();
        for (std::uint32_t i = 0; i < rn; ++i) {
            Organism& o = orgs_.at(ring[i]);
            o.sched_next = ring[(i + 1) % rn];
            o.sched_prev = ring[(i + rn - 1) % rn];
        }
        if (rn > 0) sched_current_ = ring[0];
    }

    // Single-instruction entry point for direct-ISA tests; the main driver
    // is step().
    void execute_one(std::uint64_t org_id, RngStream& copy_rng, EventLog& log,
                     std::uint64_t step_no) {
        ctx_ = {&copy_rng, nullptr, &log, step_no};
        executor_killed_ = false;
        execute_instruction(orgs_.at(org_id));
        ctx_ = {};
    }

    // test hook: deterministic direct kill (used by fault-injection tests)
    void kill_for_test(std::uint64_t id, EventLog& log, std::uint64_t step_no) {
        kill_organism(id, log, step_no);
    }

private:
    struct StepCtx {
        RngStream* copy_rng = nullptr;
        RngStream* cosmic_rng = nullptr;
        EventLog* log = nullptr;
        std::uint64_t step = 0;
    };

    void execute_instruction(Organism& org) {
        const std::uint32_t n = std::uint32_t(cells_.size());
        Cpu& cpu = org.cpu;
        const std::uint32_t ip = cpu.ip;
        count_execution(org, ip);
        total_executed_++;
        const std::uint8_t op = cells_[ip];
        switch (op) {
            case op_nop0:
            case op_nop1:
                advance(cpu, 1);
                break;
            case op_ifz:
                advance(cpu, cpu.cx != 0 ? 2 : 1);
                break;
            case op_jmp:
            case op_adrf:
            case op_adrb: {
                TemplateRef t = template_at(cells_, (ip + 1) % n);
                std::uint8_t tpl[k_max_template];
                for (std::uint32_t i = 0; i < t.len; ++i)
                    tpl[i] = cells_[(ip + 1 + i) % n];
                if (t.len == 0 || t.too_long) {
                    fault(org, "bad_template", 1 + t.len);
                    break;
                }
                SearchDir dir = op == op_jmp    ? SearchDir::nearest
                                : op == op_adrf ? SearchDir::forward
                                                : SearchDir::backward;
                auto hit = template_search(cells_, ip, dir, tpl, t.len, cfg_.search_limit);
                if (!hit) {
                    fault(org, "no_match", 1 + t.len);
                    break;
                }
                if (op == op_jmp)
                    cpu.ip = *hit;
                else {
                    cpu.ax = *hit;
                    advance(cpu, 1 + t.len);
                }
                break;
            }
            case op_sub_ab:
                cpu.cx = std::uint32_t((std::uint64_t(cpu.ax % n) + n - cpu.bx % n) % n);
                advance(cpu, 1);
                break;
            case op_xchg:
                std::swap(cpu.ax, cpu.bx);
                advance(cpu, 1);
                break;
            case op_mov_ii: {
                std::uint32_t dst = cpu.ax % n;
                if (!writable_by(org, dst)) {
                    fault(org, "write_protect", 1);
                    break;
                }
                std::uint8_t v = cells_[cpu.bx % n];
                if (ctx_.copy_rng && ctx_.copy_rng->bernoulli(cfg_.p_copy_flip)) {
                    std::uint8_t bit = std::uint8_t(ctx_.copy_rng->below(4));
                    v ^= std::uint8_t(1u << bit);
                    Event e{ctx_.step, EventKind::mutation,
                            "kind=copy addr=" + std::to_string(dst) +
                                " bit=" + std::to_string(bit)};
                    if (ctx_.log) ctx_.log->append(e);
                }
                cells_[dst] = v & 0xf;
                advance(cpu, 1);
                break;
            }
            case op_inc_a:
                cpu.ax = (cpu.ax + 1) % n;
                advance(cpu, 1);
                break;
            case op_inc_b:
                cpu.bx = (cpu.bx + 1) % n;
                advance(cpu, 1);
                break;
            case op_dec_c:
                cpu.cx = std::uint32_t((std::uint64_t(cpu.cx) + n - 1) % n);
                advance(cpu, 1);
                break;
            case op_push_ax:
                if (cpu.sp >= k_stack_depth) {
                    fault(org, "stack_overflow", 1);
                    break;
                }
                cpu.stack[cpu.sp++] = cpu.ax;
                advance(cpu, 1);
                break;
            case op_pop_ax:
                if (cpu.sp == 0) {
                    fault(org, "stack_underflow", 1);
                    break;
                }
                cpu.ax = cpu.stack[--cpu.sp];
                advance(cpu, 1);
                break;
            case op_mal:
                do_mal(org);
                break;
            case op_divide:
                do_divide(org);
                break;
            default:
                fault(org, "bad_opcode", 1);
                break;
        }
    }

    bool in_span(std::uint32_t p, std::uint32_t start, std::uint32_t len) const {
        const std::uint32_t n = std::uint32_t(cells_.size());
        return std::uint32_t((std::uint64_t(p) + n - start % n) % n) < len;
    }

    bool writable_by(const Organism& o, std::uint32_t p) const {
        return in_span(p, o.start, o.len) ||
               (o.has_child && in_span(p, o.child_start, o.child_len));
    }

    void count_execution(Organism& o, std::uint32_t ip) {
        bool own = writable_by(o, ip);
        if (own) ++o.win_own;
        else ++o.win_foreign;
        if (o.win_own + o.win_foreign >= cfg_.parasite_window) {
            o.last_win_own = o.win_own;
            o.last_win_foreign = o.win_foreign;
            o.window_done = true;
            o.win_own = o.win_foreign = 0;
        }
    }

    void advance(Cpu& cpu, std::uint32_t k) {
        cpu.ip = std::uint32_t((std::uint64_t(cpu.ip) + k) % cells_.size());
    }

    void fault(Organism& org, const char* what, std::uint32_t adv) {
        org.cpu.error_count++;
        if (ctx_.log) {
            Event e{ctx_.step, EventKind::error,
                    "org=" + std::to_string(org.id) + " fault=" + what +
                        " ip=" + std::to_string(org.cpu.ip)};
            ctx_.log->append(e);
        }
        if (cfg_.error_promotion) reaper_promote(org.id);
        advance(org.cpu, adv);
    }

    void do_mal(Organism& org) {
        const std::uint32_t size = org.cpu.cx;
        if (size < 1 || size > cfg_.max_org_size) {
            fault(org, "mal_size", 1);
            return;
        }
        if (org.has_child) {
            fault(org, "mal_exists", 1);
            return;
        }
        std::uint32_t from = std::uint32_t((std::uint64_t(org.start) + org.len) % cells_.size());
        auto got = arena_.alloc_from(from, size);
        if (!got && ctx_.log) {
            std::uint64_t self = org.id;
            reap(*ctx_.log, ctx_.step);
            if (orgs_.find(self) == orgs_.end()) return;  // reap took the caller
            got = arena_.alloc_from(from, size);
        }
        if (!got) {
            fault(org, "mal_nospace", 1);
            return;
        }
        org.has_child = true;
        org.child_start = *got;
        org.child_len = size;
        org.cpu.ax = *got;
        advance(org.cpu, 1);
    }

    void do_divide(Organism& org) {
        if (!org.has_child) {
            fault(org, "divide_nochild", 1);
            return;
        }
        Organism child;
        child.id = next_org_id_++;
        child.start = org.child_start;
        child.len = org.child_len;
        child.cpu.ip = child.start;
        child.parent_id = org.id;
        child.birth_step = ctx_.step;
        child.genotype_id = genotype_of_region(child.start, child.len);
        org.has_child = false;
        org.child_start = org.child_len = 0;
        advance(org.cpu, 1);
        std::uint64_t cid = child.id;
        orgs_.emplace(cid, child);
        reaper_push_tail(cid);
        sched_insert_before_current(cid);
        if (ctx_.log) emit_birth(*ctx_.log, ctx_.step, orgs_.at(cid));
    }

    void emit_birth(EventLog& log, std::uint64_t step_no, const Organism& o) {
        auto body = body_cells(o);
        Event e{step_no, EventKind::birth,
                "org=" + std::to_string(o.id) + " parent=" + std::to_string(o.parent_id) +
                    " genotype=" + hex64(o.genotype_id) + " addr=" + std::to_string(o.start) +
                    " len=" + std::to_string(o.len) + " seq=" + genome_hex(body)};
        log.append(e);
        if (birth_fn_) birth_fn_(step_no, o.genotype_id, body);
    }

    static std::string hex64(std::uint64_t v) {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
        return buf;
    }

    void kill_organism(std::uint64_t id, EventLog& log, std::uint64_t step_no) {
        Organism& o = orgs_.at(id);
        Event e{step_no, EventKind::death,
                "org=" + std::to_string(id) + " genotype=" + hex64(o.genotype_id)};
        log.append(e);
        if (death_fn_) death_fn_(step_no, o.genotype_id);
        arena_.release(o.start, o.len);
        if (o.has_child) arena_.release(o.child_start, o.child_len);
        reaper_unlink(id);
        sched_unlink(id);
        orgs_.erase(id);
    }

    // --- reaper queue (doubly linked, head dies first) -------------------

    void reaper_push_tail(std::uint64_t id) {
        Organism& o = orgs_.at(id);
        o.reap_prev = reap_tail_;
        o.reap_next = 0;
        if (reap_tail_) orgs_.at(reap_tail_).reap_next = id;
        else reap_head_ = id;
        reap_tail_ = id;
    }

    void reaper_unlink(std::uint64_t id) {
        Organism& o = orgs_.at(id);
        if (o.reap_prev) orgs_.at(o.reap_prev).reap_next = o.reap_next;
        else reap_head_ = o.reap_next;
        if (o.reap_next) orgs_.at(o.reap_next).reap_prev = o.reap_prev;
        else reap_tail_ = o.reap_prev;
        o.reap_prev = o.reap_next = 0;
    }

    // Moves an organism one position toward the head (fault promotion).
    void reaper_promote(std::uint64_t id) {
        Organism& o = orgs_.at(id);
        std::uint64_t p = o.reap_prev;
        if (p == 0) return;
        reaper_unlink(id);
        Organism& prev = orgs_.at(p);
        o.reap_prev = prev.reap_prev;
        o.reap_next = p;
        if (prev.reap_prev) orgs_.at(prev.reap_prev).reap_next = id;
        else reap_head_ = id;
        prev.reap_prev = id;
    }

    // --- scheduler ring ---------------------------------------------------

    void sched_insert_before_current(std::uint64_t id) {
        Organism& o = orgs_.at(id);
        if (sched_current_ == 0) {
            o.sched_next = o.sched_prev = id;
            return;
        }
        Organism& cur = orgs_.at(sched_current_);
        std::uint64_t prev = cur.sched_prev;
        o.sched_prev = prev;
        o.sched_next = sched_current_;
        orgs_.at(prev).sched_next = id;
        cur.sched_prev = id;
    }

    void sched_unlink(std::uint64_t id) {
        Organism& o = orgs_.at(id);
        const bool was_current = (sched_current_ == id);
        if (o.sched_next == id) {
            sched_current_ = 0;
            cycle_anchor_ = 0;
            if (was_current) executor_killed_ = true;
            o.sched_next = o.sched_prev = 0;
            return;
        }
        orgs_.at(o.sched_prev).sched_next = o.sched_next;
        orgs_.at(o.sched_next).sched_prev = o.sched_prev;
        if (was_current) {
            sched_current_ = o.sched_next;
            executor_killed_ = true;
        }
        if (cycle_anchor_ == id) cycle_anchor_ = o.sched_next;
        o.sched_next = o.sched_prev = 0;
    }

    RunConfig cfg_;
    std::vector<std::uint8_t> cells_;
    SoupArena arena_;
    std::unordered_map<std::uint64_t, Organism> orgs_;
    std::uint64_t next_org_id_ = 1;
    std::uint64_t reap_head_ = 0, reap_tail_ = 0;
    std::uint64_t sched_current_ = 0, cycle_anchor_ = 0;
    std::uint64_t total_executed_ = 0;
    bool executor_killed_ = false;
    StepCtx ctx_;
    BirthFn birth_fn_;
    DeathFn death_fn_;
};

}  // namespace openmedium::soup
