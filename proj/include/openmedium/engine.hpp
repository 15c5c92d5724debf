#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "openmedium/binio.hpp"
#include "openmedium/chem/world.hpp"
#include "openmedium/config.hpp"
#include "openmedium/event.hpp"
#include "openmedium/log.hpp"
#include "openmedium/obs/audit.hpp"
#include "openmedium/obs/detectors.hpp"
#include "openmedium/obs/metrics.hpp"
#include "openmedium/rng.hpp"
#include "openmedium/soup/world.hpp"

namespace openmedium {

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AuditError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr char k_checkpoint_magic[4] = {'V', 'W', 'L', 'D'};
inline constexpr char k_checkpoint_footer[4] = {'D', 'L', 'W', 'V'};
inline constexpr std::uint32_t k_checkpoint_version = 1;

struct RunOutcome {
    std::uint64_t final_step = 0;
    bool extinct = false;
    bool audit_failed = false;
};

// Deterministic runtime shared by both media: RNG streams, step loop, event
// log, metrics cadence, and bit-exact checkpointing. World stepping is
// sequential; observatory hooks read the current state and never feed back,
// so the trajectory is identical with or without them.
class Engine {
public:
    explicit Engine(const RunConfig& cfg) : cfg_(cfg) {
        cfg_.validate();
        if (cfg_.world_kind == WorldKind::soup) {
            soup_ = std::make_unique<soup::SoupWorld>(cfg_);
            copy_rng_ = RngStream(cfg_.seed, "soup.copy");
            cosmic_rng_ = RngStream(cfg_.seed, "soup.cosmic");
        } else {
            chem_ = std::make_unique<chem::ChemWorld>(cfg_);
            react_rng_ = RngStream(cfg_.seed, "chem.react");
            move_rng_ = RngStream(cfg_.seed, "chem.move");
            perturb_rng_ = RngStream(cfg_.seed, "chem.perturb");
            seed_rng_ = RngStream(cfg_.seed, "chem.seed");
        }
        registry_ = obs::GenotypeRegistry(cfg_.stasis_min_abundance);
        if (cfg_.observatory && soup_) wire_soup_observer();
    }

    // the lifecycle observer captures `this`; pin the object in place
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;
    Engine(Engine&&) = delete;
    Engine& operator=(Engine&&) = delete;

    // Directs canonical outputs into out_dir (events.log, metrics.csv,
    // periodic checkpoints). Call before seeding so seed events are logged.
    void attach_outputs(const std::string& out_dir) {
        namespace fs = std::filesystem;
        out_dir_ = out_dir;
        fs::create_directories(out_dir_);
        log_.open(out_dir_ + "/events.log");
        if (cfg_.observatory) {
            metrics_.open(out_dir_ + "/metrics.csv", std::ios::binary | std::ios::trunc);
            metrics_ << obs::k_metrics_header << '\n';
        }
    }

    // Places the configured ancestor/replicator. Separate from construction
    // so the seed events land in an attached event log.
    void seed_world() {
        if (seeded_) throw std::logic_error("world already seeded");
        seeded_ = true;
        if (soup_) {
            if (!cfg_.soup_genome.empty()) soup_->seed_ancestor(cfg_.soup_genome, log_, 0);
        } else {
            if (!cfg_.chem_payload.empty())
                chem_->seed_replicator(cfg_.chem_payload, cfg_.chem_seed_x,
                                       cfg_.chem_seed_y, seed_rng_);
            else if (cfg_.chem_food + cfg_.chem_food_caps > 0)
                chem_->scatter_food(cfg_.chem_food, cfg_.chem_food_caps, seed_rng_);
        }
    }

    RunOutcome run(std::uint64_t extra_steps) {
        const std::uint64_t target = step_ + extra_steps;
        const std::uint64_t ckpt_interval = cfg_.effective_checkpoint_interval();
        RunOutcome out;
        while (step_ < target) {
            if (soup_ && soup_->population() == 0) {
                log_.append({step_, EventKind::extinction, "population=0"});
                out.extinct = true;
                break;
            }
            ++step_;
            if (soup_) soup_->step(copy_rng_, cosmic_rng_, log_, step_);
            else chem_->step(react_rng_, move_rng_, perturb_rng_);
            if (step_ % cfg_.metrics_interval == 0 || step_ == target) do_frame();
            if (!out_dir_.empty() && step_ % ckpt_interval == 0)
                save_checkpoint(checkpoint_path(step_));
        }
        if (!out_dir_.empty()) save_checkpoint(checkpoint_path(step_));
        log_.flush();
        if (metrics_.is_open()) metrics_.flush();
        out.final_step = step_;
        return out;
    }

    std::string checkpoint_path(std::uint64_t step) const {
        return out_dir_ + "/ckpt_" + std::to_string(step) + ".vwld";
    }

    // --- checkpointing ----------------------------------------------------

    std::string checkpoint_bytes() const {
        BinWriter w;
        w.bytes(k_checkpoint_magic, 4);
        w.u32(k_checkpoint_version);
        w.u8(std::uint8_t(cfg_.world_kind));
        w.u64(step_);
        w.u64(log_.hash());
        w.str(config_canonical(cfg_));
        auto streams = stream_list();
        w.u32(std::uint32_t(streams.size()));
        for (const RngStream* s : streams) {
            w.str(s->label());
            w.u64(s->key());
            w.u64(s->counter());
        }
        BinWriter world;
        if (soup_) soup_->save(world);
        else chem_->save(world);
        w.str(world.take());
        w.bytes(k_checkpoint_footer, 4);
        return w.take();
    }

    void save_checkpoint(const std::string& path) const {
        std::string bytes = checkpoint_bytes();
        std::string tmp = path + ".tmp";
        {
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
            f.write(bytes.data(), std::streamsize(bytes.size()));
        }
        std::filesystem::rename(tmp, path);
    }

    static std::unique_ptr<Engine> load_checkpoint(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw CheckpointError("cannot open checkpoint: " + path);
        std::ostringstream ss;
        ss << f.rdbuf();
        return from_checkpoint_bytes(ss.str());
    }

    static std::unique_ptr<Engine> from_checkpoint_bytes(const std::string& bytes) {
        BinReader r(bytes);
        try {
            auto magic = r.take(4);
            if (std::string_view(magic) != std::string_view(k_checkpoint_magic, 4))
                throw CheckpointError("not a checkpoint");
            std::uint32_t version = r.u32();
            if (version != k_checkpoint_version)
                throw CheckpointError("unsupported version " + std::to_string(version));
            std::uint8_t kind = r.u8();
            std::uint64_t step = r.u64();
            std::uint64_t ev_hash = r.u64();
            RunConfig cfg = config_parse(r.str());
            if (std::uint8_t(cfg.world_kind) != kind)
                throw CheckpointError("corrupt checkpoint");
            auto eng = std::make_unique<Engine>(cfg);
            eng->seeded_ = true;
            eng->step_ = step;
            eng->log_.restore_hash(ev_hash);
            std::uint32_t ns = r.u32();
            auto streams = eng->stream_list();
            for (std::uint32_t i = 0; i < ns; ++i) {
                std::string label = r.str();
                std::uint64_t key = r.u64();
                std::uint64_t counter = r.u64();
                bool found = false;
                for (RngStream* s : streams)
                    if (s->label() == label) {
                        s->restore(key, counter);
                        found = true;
                    }
                if (!found) throw CheckpointError("corrupt checkpoint");
            }
            std::string world = r.str();
            BinReader wr(world);
            if (eng->soup_) eng->soup_->load(wr);
            else eng->chem_->load(wr);
            if (!wr.at_end()) throw CheckpointError("corrupt checkpoint");
            auto footer = r.take(4);
            if (std::string_view(footer) != std::string_view(k_checkpoint_footer, 4) ||
                !r.at_end())
                throw CheckpointError("corrupt checkpoint");
            if (eng->cfg_.observatory && eng->soup_) {
                for (const auto& [id, o] : eng->soup_->organisms())
                    eng->registry_.absorb_existing(step, o.genotype_id,
                                                   soup::genome_hex(eng->soup_->body_cells(o)));
            }
            return eng;
        } catch (const CheckpointError&) {
            throw;
        } catch (const CorruptData&) {
            throw CheckpointError("corrupt checkpoint");
        } catch (const ConfigError&) {
            throw CheckpointError("corrupt checkpoint");
        }
    }

    // --- accessors ----------------------------------------------------------

    const RunConfig& config() const { return cfg_; }
    std::uint64_t step() const { return step_; }
    soup::SoupWorld* soup() { return soup_.get(); }
    chem::ChemWorld* chem() { return chem_.get(); }
    const soup::SoupWorld* soup() const { return soup_.get(); }
    const chem::ChemWorld* chem() const { return chem_.get(); }
    obs::GenotypeRegistry& registry() { return registry_; }
    EventLog& event_log() { return log_; }
    std::uint64_t frames_emitted() const { return frames_; }

    void write_genotypes_csv(const std::string& path) const {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f << "id,canonical_sequence,first_seen,last_seen,max_abundance\n";
        for (const auto& [gid, r] : registry_.records()) {
            char idhex[17];
            std::snprintf(idhex, sizeof idhex, "%016llx",
                          static_cast<unsigned long long>(gid));
            f << idhex << ',' << r.canonical << ',' << r.first_seen << ','
              << r.last_seen << ',' << r.max_abundance << '\n';
        }
    }

private:
    std::vector<RngStream*> stream_list() {
        if (soup_) return {&copy_rng_, &cosmic_rng_};
        return {&react_rng_, &move_rng_, &perturb_rng_, &seed_rng_};
    }
    std::vector<const RngStream*> stream_list() const {
        if (soup_) return {&copy_rng_, &cosmic_rng_};
        return {&react_rng_, &move_rng_, &perturb_rng_, &seed_rng_};
    }

    void wire_soup_observer() {
        soup_->set_lifecycle_observer(
            [this](std::uint64_t step, std::uint64_t gid,
                   const std::vector<std::uint8_t>& body) {
                registry_.on_birth(step, gid, soup::genome_hex(body));
            },
            [this](std::uint64_t step, std::uint64_t gid) {
                registry_.on_death(step, gid);
            });
    }

    void do_frame() {
        ++frames_;
        // strict audit is engine-side and runs whether or not the
        // observatory is attached
        obs::AuditReport rep = soup_ ? obs::audit(*soup_) : obs::audit(*chem_);
        if (!rep.ok) {
            log_.append({step_, EventKind::audit_violation, rep.detail});
            if (cfg_.strict_audit)
                throw AuditError("audit violation at step " + std::to_string(step_) +
                                 ": " + rep.detail);
        }
        if (!cfg_.observatory) return;
        obs::MetricsFrame frame;
        if (soup_) {
            frame = obs::metrics_frame_soup(*soup_, registry_, step_);
        } else {
            auto comps = obs::connected_components(*chem_);
            std::vector<obs::ComponentGenotype> genos;
            genos.reserve(comps.size());
            std::uint64_t chains = 0;
            for (const auto& c : comps) {
                genos.push_back(obs::extract_genotype(*chem_, c));
                if (genos.back().kind == obs::ComponentKind::chain) ++chains;
            }
            registry_.observe_frame(step_, genos);
            frame = obs::metrics_frame_chem(*chem_, registry_, step_, chains);
        }
        if (metrics_.is_open()) metrics_ << frame.csv_row() << '\n';
        if (step_ >= cfg_.stasis_window) {
            auto v = obs::detect_stasis(registry_, step_, cfg_.stasis_window,
                                        cfg_.stasis_persistence);
            if (!have_stasis_state_ || v.state != last_stasis_state_) {
                std::string payload = std::string("verdict=") +
                                      obs::stasis_state_name(v.state);
                if (v.newest_persistent) {
                    char idhex[17];
                    std::snprintf(idhex, sizeof idhex, "%016llx",
                                  static_cast<unsigned long long>(*v.newest_persistent));
                    payload += std::string(" newest=") + idhex;
                }
                log_.append({step_, EventKind::stasis_flag, payload});
                last_stasis_state_ = v.state;
                have_stasis_state_ = true;
            }
        }
    }

    RunConfig cfg_;
    std::unique_ptr<soup::SoupWorld> soup_;
    std::unique_ptr<chem::ChemWorld> chem_;
    RngStream copy_rng_, cosmic_rng_;
    RngStream react_rng_, move_rng_, perturb_rng_, seed_rng_;
    EventLog log_;
    std::ofstream metrics_;
    obs::GenotypeRegistry registry_{1};
    std::uint64_t step_ = 0;
    std::uint64_t frames_ = 0;
    bool seeded_ = false;
    std::string out_dir_;
    obs::StasisState last_stasis_state_ = obs::StasisState::indeterminate;
    bool have_stasis_state_ = false;
};

}  // namespace openmedium
