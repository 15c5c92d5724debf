#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

namespace openmedium {

// FNV-1a 64-bit. Frozen: this hash defines genotype ids and the event-log
// rolling hash, so the constants must never change.
inline constexpr std::uint64_t fnv1a_offset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t fnv1a_prime = 0x100000001b3ULL;

inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = fnv1a_offset) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= fnv1a_prime;
    }
    return h;
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = fnv1a_offset) {
    return fnv1a(s.data(), s.size(), h);
}

namespace detail {
// SplitMix64 finalizer; full-period mixer over 64-bit counters.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// Counter-based stream: output i is a pure function of (seed, label, i).
// Each subsystem draws from its own labelled stream so that toggling one
// feature never shifts another subsystem's sequence. State is (key, counter),
// both serialized into checkpoints.
class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t seed, std::string label)
        : label_(std::move(label)),
          key_(detail::mix64(seed ^ fnv1a(label_))),
          counter_(0) {}

    std::uint64_t next() {
        counter_ += 0x9e3779b97f4a7c15ULL;
        return detail::mix64(key_ + counter_);
    }

    // 53-bit mantissa draw in [0,1).
    double uniform01() { return double(next() >> 11) * 0x1.0p-53; }

    // Unbiased-enough bounded draw (Lemire multiply-shift); frozen mapping.
    std::uint64_t below(std::uint64_t n) {
        return std::uint64_t((static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform01() < p;
    }

    const std::string& label() const { return label_; }
    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }
    void restore(std::uint64_t key, std::uint64_t counter) {
        key_ = key;
        counter_ = counter;
    }

private:
    std::string label_;
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

// Iterates the positions of successes in a virtual Bernoulli(p) sequence over
// [0, n). Distributionally identical to per-index draws but O(successes).
// Used for cosmic rays and perturbation sweeps.
template <typename Fn>
inline void bernoulli_positions(RngStream& rng, std::uint64_t n, double p, Fn&& fn) {
    if (p <= 0.0 || n == 0) return;
    if (p >= 1.0) {
        for (std::uint64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    // geometric skip: skip = floor(log(1-u)/log(1-p))
    const double denom = std::log1p(-p);
    std::uint64_t i = 0;
    while (true) {
        double u = rng.uniform01();
        double skip = std::floor(std::log1p(-u) / denom);
        if (skip >= double(n - i)) return;
        i += std::uint64_t(skip);
        fn(i);
        if (++i >= n) return;
    }
}

template <typename T>
inline void shuffle_inplace(RngStream& rng, T* data, std::size_t n) {
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = std::size_t(rng.below(i));
        std::swap(data[i - 1], data[j]);
    }
}

}  // namespace openmedium
