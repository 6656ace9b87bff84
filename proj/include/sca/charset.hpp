#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sca/rng.hpp"
#include "sca/util.hpp"

namespace sca {

// Named, ordered alphabet of single code points. Builtins are the three
// attack sets: structural symbols (S1), other special characters (S2) and
// lowercase English letters (L).
struct CharacterSet {
    std::string name;
    std::vector<char32_t> members;

    bool contains(char32_t cp) const {
        return std::find(members.begin(), members.end(), cp) != members.end();
    }
    bool empty() const { return members.empty(); }
    size_t size() const { return members.size(); }
};

inline CharacterSet s1_set() {
    return {"S1", {U'{', U'[', U'<', U'(', U')', U'>', U']', U'}'}};
}

inline CharacterSet s2_set() {
    return {"S2",
            {U'!', U'$', U'@', U'#', U'%', U'&', U'*', U'_', U'+', U'-', U'=',
             U'`', U'|', U'\\', U';', U'\'', U':', U'"', U',', U'.', U'/', U'?'}};
}

inline CharacterSet l_set() {
    CharacterSet set{"L", {}};
    for (char32_t c = U'a'; c <= U'z'; ++c) {
        set.members.push_back(c);
    }
    return set;
}

struct BuiltinSets {
    CharacterSet s1, s2, l;
};

inline BuiltinSets builtin_sets() { return {s1_set(), s2_set(), l_set()}; }

inline CharacterSet builtin_set_by_name(std::string_view name) {
    if (name == "S1") return s1_set();
    if (name == "S2") return s2_set();
    if (name == "L") return l_set();
    throw ConfigError("unknown character set: " + std::string(name));
}

// Order-preserving union; duplicates across inputs are kept once.
inline CharacterSet union_of(std::span<const CharacterSet> sets, std::string name = "union") {
    CharacterSet out{std::move(name), {}};
    for (const auto& s : sets) {
        for (const char32_t cp : s.members) {
            if (!out.contains(cp)) {
                out.members.push_back(cp);
            }
        }
    }
    return out;
}

// Deterministic reordering of the members; the multiset is unchanged.
inline CharacterSet permute(const CharacterSet& set, uint64_t seed) {
    if (set.empty()) {
        throw ConfigError("empty character set");
    }
    CharacterSet out = set;
    Rng rng(derive_seed(seed, "permute", set.name));
    rng.shuffle(out.members);
    return out;
}

// User-supplied set file: one character per line, UTF-8.
inline CharacterSet load_character_set(const std::filesystem::path& path,
                                       std::string name = "") {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open character set file: " + path.string());
    }
    CharacterSet out{name.empty() ? path.stem().string() : std::move(name), {}};
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::vector<char32_t> cps = utf8_decode(line);
        if (cps.size() != 1) {
            throw DataError("set file " + path.string() + " line " +
                            std::to_string(lineno) + ": expected one character");
        }
        if (out.contains(cps[0])) {
            throw DataError("set file " + path.string() + " line " +
                            std::to_string(lineno) + ": duplicate character");
        }
        out.members.push_back(cps[0]);
    }
    if (out.empty()) {
        throw DataError("set file " + path.string() + " has no characters");
    }
    return out;
}

}  // namespace sca
