#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace openmedium {

struct CorruptData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Little-endian binary writer; the checkpoint layout is frozen per version.
class BinWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(char(v)); }
    void u16(std::uint16_t v) { raw_le(v); }
    void u32(std::uint32_t v) { raw_le(v); }
    void u64(std::uint64_t v) { raw_le(v); }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void bytes(const void* p, std::size_t n) {
        const char* c = static_cast<const char*>(p);
        buf_.insert(buf_.end(), c, c + n);
    }
    void str(const std::string& s) {
        u32(std::uint32_t(s.size()));
        bytes(s.data(), s.size());
    }

    const std::string& data() const { return buf_; }
    std::string take() { return std::move(buf_); }

private:
    template <typename T>
    void raw_le(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i)
            buf_.push_back(char((v >> (8 * i)) & 0xff));
    }
    std::string buf_;
};

class BinReader {
public:
    explicit BinReader(std::string_view data) : data_(data) {}

    std::uint8_t u8() { return std::uint8_t(take(1)[0]); }
    std::uint16_t u16() { return raw_le<std::uint16_t>(); }
    std::uint32_t u32() { return raw_le<std::uint32_t>(); }
    std::uint64_t u64() { return raw_le<std::uint64_t>(); }
    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str() {
        std::uint32_t n = u32();
        auto s = take(n);
        return std::string(s);
    }
    std::string_view take(std::size_t n) {
        if (pos_ + n > data_.size()) throw CorruptData("unexpected end of data");
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool at_end() const { return pos_ == data_.size(); }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    template <typename T>
    T raw_le() {
        auto s = take(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            v |= T(std::uint8_t(s[i])) << (8 * i);
        return v;
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

}  // namespace openmedium
