#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "openmedium/soup/isa.hpp"

namespace openmedium::soup {

struct GenomeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Genome file grammar: one mnemonic per line, `;` starts a comment,
// case-insensitive, blank lines ignored.
inline std::vector<std::uint8_t> genome_parse(std::string_view text) {
    std::vector<std::uint8_t> cells;
    size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string line(text.substr(
            pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos));
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++lineno;
        if (size_t c = line.find(';'); c != std::string::npos) line.resize(c);
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        size_t b = line.find_last_not_of(" \t\r");
        std::string word = line.substr(a, b - a + 1);
        auto op = opcode_from_name(word);
        if (!op)
            throw GenomeError("line " + std::to_string(lineno) +
                              ": unknown mnemonic '" + word + "'");
        cells.push_back(*op);
    }
    if (cells.empty()) throw GenomeError("genome is empty");
    return cells;
}

inline std::vector<std::uint8_t> genome_load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw GenomeError("cannot open genome file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return genome_parse(ss.str());
}

inline std::string genome_disassemble(const std::vector<std::uint8_t>& cells) {
    std::string out;
    for (auto c : cells) {
        out += opcode_name(c);
        out += '\n';
    }
    return out;
}

// Compact nibble string used as the canonical sequence in exports.
inline std::string genome_hex(const std::vector<std::uint8_t>& cells) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(cells.size());
    for (auto c : cells) out += digits[c & 0xf];
    return out;
}

}  // namespace openmedium::soup
