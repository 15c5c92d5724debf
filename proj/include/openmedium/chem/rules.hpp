#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace openmedium::chem {

struct RuleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool is_concrete_type(char c) { return c >= 'a' && c <= 'f'; }
inline bool is_type_token(char c) { return is_concrete_type(c) || c == 'x' || c == 'y'; }

// One reaction over an adjacent atom pair:
//   T1 s1 SEP T2 s2 -> T1 s1' SEP' T2 s2'   written compactly, e.g. a1+b1 -> a2#b2
// `+` means unbonded, `#` bonded; x/y wildcards bind a type consistently
// within the rule. Type-preserving by construction: the grammar cannot
// express creation, destruction, or transmutation of atoms.
struct ReactionRule {
    char t1 = 'x', t2 = 'x';
    std::uint8_t s1 = 0, s2 = 0;
    bool bonded_before = false;
    std::uint8_t s1_after = 0, s2_after = 0;
    bool bonded_after = false;
    int line = 0;
    std::string text;
};

namespace detail {

struct RuleCursor {
    std::string_view s;
    std::size_t i = 0;
    int line;
    char peek() const { return i < s.size() ? s[i] : '\0'; }
    char take() { return i < s.size() ? s[i++] : '\0'; }
    [[noreturn]] void fail(const std::string& why) const {
        throw RuleError("line " + std::to_string(line) + ": " + why);
    }
};

inline char take_type(RuleCursor& c) {
    char t = c.take();
    if (!is_type_token(t))
        c.fail(std::string("expected atom type, got '") + (t ? t : '?') + "'");
    return t;
}

inline std::uint8_t take_state(RuleCursor& c, std::uint32_t max_state) {
    char d = c.take();
    if (d < '0' || d > '9') c.fail("expected state digit");
    std::uint8_t s = std::uint8_t(d - '0');
    if (s > max_state)
        c.fail("state " + std::to_string(s) + " exceeds max_state " +
               std::to_string(max_state));
    return s;
}

inline bool take_sep(RuleCursor& c) {
    char s = c.take();
    if (s == '+') return false;
    if (s == '#') return true;
    c.fail("expected '+' or '#'");
}

}  // namespace detail

inline ReactionRule parse_rule_line(std::string_view compact, int lineno,
                                    std::uint32_t max_state) {
    detail::RuleCursor c{compact, 0, lineno};
    ReactionRule r;
    r.line = lineno;
    r.text = std::string(compact);
    r.t1 = detail::take_type(c);
    r.s1 = detail::take_state(c, max_state);
    r.bonded_before = detail::take_sep(c);
    r.t2 = detail::take_type(c);
    r.s2 = detail::take_state(c, max_state);
    if (c.take() != '-' || c.take() != '>') c.fail("expected '->'");
    char t1p = detail::take_type(c);
    r.s1_after = detail::take_state(c, max_state);
    r.bonded_after = detail::take_sep(c);
    char t2p = detail::take_type(c);
    r.s2_after = detail::take_state(c, max_state);
    if (c.i != compact.size()) c.fail("trailing characters after rule");
    if (t1p != r.t1 || t2p != r.t2) c.fail("type not conserved across '->'");
    return r;
}

// Rules file: one rule per line; `#` is taken by bond syntax, so comments
// use `;`. File order is the precedence order (first match wins).
inline std::vector<ReactionRule> parse_rules(std::string_view text,
                                             std::uint32_t max_state = 9) {
    std::vector<ReactionRule> rules;
    std::size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string line(text.substr(
            pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos));
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++lineno;
        if (std::size_t sc = line.find(';'); sc != std::string::npos) line.resize(sc);
        std::string compact;
        for (char ch : line)
            if (!std::isspace(static_cast<unsigned char>(ch))) compact += ch;
        if (compact.empty()) continue;
        rules.push_back(parse_rule_line(compact, lineno, max_state));
    }
    return rules;
}

inline std::string load_rules_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw RuleError("cannot open rules file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Oriented match of (first, second) against the rule's (t1,t2) side.
inline bool rule_matches(const ReactionRule& r, char type1, std::uint8_t state1,
                         char type2, std::uint8_t state2, bool bonded) {
    if (r.bonded_before != bonded) return false;
    if (r.s1 != state1 || r.s2 != state2) return false;
    if (is_concrete_type(r.t1) && r.t1 != type1) return false;
    if (is_concrete_type(r.t2) && r.t2 != type2) return false;
    if (!is_concrete_type(r.t1) && !is_concrete_type(r.t2) && r.t1 == r.t2 &&
        type1 != type2)
        return false;
    return true;
}

}  // namespace openmedium::chem
