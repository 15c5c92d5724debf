#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "openmedium/binio.hpp"

namespace openmedium::soup {

// Free-space bookkeeping for the circular soup. Gaps are maximal free runs
// keyed by start cell; a run may wrap past the end of the address space.
// Allocation follows cell-scan first-fit semantics: the first position q in
// scan order (from, from+1, ... mod size) where q..q+len-1 are all free.
class SoupArena {
public:
    SoupArena() = default;
    explicit SoupArena(std::uint32_t size) : size_(size) {
        gaps_[0] = size;
        free_total_ = size;
    }

    std::uint32_t size() const { return size_; }
    std::uint64_t free_total() const { return free_total_; }
    std::uint64_t occupied() const { return size_ - free_total_; }
    const std::map<std::uint32_t, std::uint32_t>& gaps() const { return gaps_; }

    std::optional<std::uint32_t> alloc_from(std::uint32_t from, std::uint32_t len) {
        if (len == 0 || len > free_total_ || gaps_.empty()) return std::nullopt;
        // 1) tail of the gap containing `from`, starting exactly at `from`
        if (auto g = containing(from)) {
            auto [gs, gl] = *g;
            std::uint32_t offset = mod(from - gs);
            if (gl - offset >= len) {
                carve(gs, gl, from, len);
                return from;
            }
        }
        // 2) every gap start, in circular scan order after `from`
        auto it = gaps_.upper_bound(from);
        for (std::size_t visited = 0; visited < gaps_.size() + 1; ++visited) {
            if (it == gaps_.end()) it = gaps_.begin();
            auto [gs, gl] = *it;
            if (gl >= len) {
                carve(gs, gl, gs, len);
                return gs;
            }
            ++it;
        }
        return std::nullopt;
    }

    // Exact placement; used when seeding. Fails if any cell is occupied.
    bool alloc_at(std::uint32_t start, std::uint32_t len) {
        if (len == 0 || len > size_) return false;
        auto g = containing(start);
        if (!g) return false;
        auto [gs, gl] = *g;
        std::uint32_t offset = mod(start - gs);
        if (gl - offset < len) return false;
        carve(gs, gl, start, len);
        return true;
    }

    void release(std::uint32_t start, std::uint32_t len) {
        free_total_ += len;
        if (free_total_ == size_) {
            gaps_.clear();
            gaps_[0] = size_;
            return;
        }
        // merge with the gap ending at `start`
        if (!gaps_.empty()) {
            auto it = gaps_.lower_bound(start);
            auto prev = (it == gaps_.begin()) ? std::prev(gaps_.end()) : std::prev(it);
            if (mod(prev->first + prev->second) == start) {
                start = prev->first;
                len += prev->second;
                gaps_.erase(prev);
            }
        }
        // merge with the gap starting at start+len
        auto next = gaps_.find(mod(start + len));
        if (next != gaps_.end()) {
            len += next->second;
            gaps_.erase(next);
        }
        gaps_[start] = len;
    }

    void save(BinWriter& w) const {
        w.u32(size_);
        w.u32(std::uint32_t(gaps_.size()));
        for (auto [s, l] : gaps_) {
            w.u32(s);
            w.u32(l);
        }
    }
    void load(BinReader& r) {
        size_ = r.u32();
        gaps_.clear();
        free_total_ = 0;
        std::uint32_t n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i) {
            std::uint32_t s = r.u32();
            std::uint32_t l = r.u32();
            gaps_[s] = l;
            free_total_ += l;
        }
    }

private:
    std::uint32_t mod(std::uint64_t v) const { return std::uint32_t(v % size_); }

    // gap (start,len) containing cell p, if any
    std::optional<std::pair<std::uint32_t, std::uint32_t>> containing(std::uint32_t p) const {
        if (gaps_.empty()) return std::nullopt;
        auto it = gaps_.upper_bound(p);
        auto cand = (it == gaps_.begin()) ? std::prev(gaps_.end()) : std::prev(it);
        if (mod(p - cand->first) < cand->second) return *cand;
        // a wrapping gap may also cover p from behind
        auto last = std::prev(gaps_.end());
        if (last != cand && last->first + last->second > size_ &&
            mod(p - last->first) < last->second)
            return *last;
        return std::nullopt;
    }

    void carve(std::uint32_t gs, std::uint32_t gl, std::uint32_t q, std::uint32_t len) {
        gaps_.erase(gs);
        std::uint32_t head = mod(q - gs);
        if (head > 0) gaps_[gs] = head;
        std::uint32_t tail = gl - head - len;
        if (tail > 0) gaps_[mod(q + len)] = tail;
        free_total_ -= len;
    }

    std::uint32_t size_ = 0;
    std::map<std::uint32_t, std::uint32_t> gaps_;
    std::uint64_t free_total_ = 0;
};

}  // namespace openmedium::soup
