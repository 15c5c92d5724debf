#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "openmedium/obs/detectors.hpp"
#include "openmedium/obs/genotype.hpp"

namespace openmedium::obs {

inline constexpr const char* k_metrics_header =
    "step,population,free_resource,genotype_richness,shannon_diversity,"
    "dominant_genotype_length,births,deaths,parasite_count,new_genotypes";

struct MetricsFrame {
    std::uint64_t step = 0;
    std::uint64_t population = 0;
    std::uint64_t free_resource = 0;
    std::uint64_t genotype_richness = 0;
    double shannon_diversity = 0.0;
    std::uint64_t dominant_genotype_length = 0;
    std::uint64_t births = 0;
    std::uint64_t deaths = 0;
    std::uint64_t parasite_count = 0;
    std::uint64_t new_genotypes = 0;

    std::string csv_row() const {
        char sh[32];
        std::snprintf(sh, sizeof sh, "%.6g", shannon_diversity);
        std::string row;
        row += std::to_string(step);
        row += ',';
        row += std::to_string(population);
        row += ',';
        row += std::to_string(free_resource);
        row += ',';
        row += std::to_string(genotype_richness);
        row += ',';
        row += sh;
        row += ',';
        row += std::to_string(dominant_genotype_length);
        row += ',';
        row += std::to_string(births);
        row += ',';
        row += std::to_string(deaths);
        row += ',';
        row += std::to_string(parasite_count);
        row += ',';
        row += std::to_string(new_genotypes);
        return row;
    }
};

inline MetricsFrame metrics_common(std::uint64_t step, GenotypeRegistry& reg) {
    MetricsFrame f;
    f.step = step;
    f.genotype_richness = reg.richness();
    f.shannon_diversity = reg.shannon();
    if (const auto* d = reg.dominant()) f.dominant_genotype_length = d->canonical.size();
    auto delta = reg.take_frame_delta(step);
    f.births = delta.births;
    f.deaths = delta.deaths;
    f.new_genotypes = delta.new_genotypes;
    return f;
}

inline MetricsFrame metrics_frame_soup(const soup::SoupWorld& w, GenotypeRegistry& reg,
                                       std::uint64_t step) {
    MetricsFrame f = metrics_common(step, reg);
    f.population = w.population();
    f.free_resource = w.free_cells();
    f.parasite_count = detect_parasites(w, w.config().parasite_fraction).size();
    return f;
}

// The caller is expected to have fed this frame's component genotypes to the
// registry via observe_frame first.
inline MetricsFrame metrics_frame_chem(const chem::ChemWorld& w, GenotypeRegistry& reg,
                                       std::uint64_t step, std::uint64_t chain_count) {
    MetricsFrame f = metrics_common(step, reg);
    f.population = chain_count;
    f.free_resource = w.free_food();
    return f;
}

}  // namespace openmedium::obs
