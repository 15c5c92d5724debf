#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace openmedium::soup {

// The 16-opcode instruction set. Opcode numbers are frozen; cells are 4-bit
// and every mutation channel stays inside 0..15 by construction.
enum Opcode : std::uint8_t {
    op_nop0 = 0,     // template letter 0
    op_nop1 = 1,     // template letter 1
    op_ifz = 2,      // if CX != 0, skip the next cell
    op_jmp = 3,      // IP <- nearest complemented template (tie forward)
    op_adrf = 4,     // AX <- one past nearest forward match
    op_adrb = 5,     // AX <- first cell of nearest backward match
    op_sub_ab = 6,   // CX <- AX - BX (mod soup size)
    op_xchg = 7,     // swap AX, BX
    op_mov_ii = 8,   // soup[AX] <- soup[BX]; protected write, mutation hotspot
    op_inc_a = 9,
    op_inc_b = 10,
    op_dec_c = 11,
    op_push_ax = 12,
    op_pop_ax = 13,
    op_mal = 14,     // allocate CX cells, AX <- start
    op_divide = 15,  // child allocation becomes a new organism
};

inline constexpr std::array<std::string_view, 16> opcode_names = {
    "nop0", "nop1", "ifz",     "jmp",    "adrf",  "adrb",  "sub_ab", "xchg",
    "mov_ii", "inc_a", "inc_b", "dec_c", "push_ax", "pop_ax", "mal", "divide",
};

inline std::string_view opcode_name(std::uint8_t op) { return opcode_names[op & 0xf]; }

inline std::optional<std::uint8_t> opcode_from_name(std::string_view name) {
    std::string lower(name);
    for (auto& ch : lower) ch = char(std::tolower(static_cast<unsigned char>(ch)));
    for (std::uint8_t i = 0; i < 16; ++i)
        if (opcode_names[i] == lower) return i;
    return std::nullopt;
}

inline bool is_nop(std::uint8_t op) { return op <= op_nop1; }

}  // namespace openmedium::soup
