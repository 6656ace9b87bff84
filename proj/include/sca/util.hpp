#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sca {

// Bad or missing configuration (CLI maps this to exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input data such as a corrupt records file (CLI exit code 3).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string read_file_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open file: " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write file: " + path.string());
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

// --- UTF-8 ---------------------------------------------------------------

// Decodes one code point starting at `i`; advances `i` past it. Invalid bytes
// decode as U+FFFD one byte at a time so offsets never stall.
inline char32_t utf8_next(std::string_view s, size_t& i) {
    const auto byte = [&](size_t k) { return static_cast<uint8_t>(s[k]); };
    const uint8_t b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + len > s.size()) {
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k < len; ++k) {
        if ((byte(i + k) & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (byte(i + k) & 0x3F);
    }
    i += len;
    return cp;
}

inline std::vector<char32_t> utf8_decode(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size();) {
        out.push_back(utf8_next(s, i));
    }
    return out;
}

inline void utf8_append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string utf8_encode(char32_t cp) {
    std::string out;
    utf8_append(out, cp);
    return out;
}

inline size_t codepoint_count(std::string_view s) {
    size_t n = 0;
    for (size_t i = 0; i < s.size();) {
        utf8_next(s, i);
        ++n;
    }
    return n;
}

// --- character classes ----------------------------------------------------

inline bool is_ascii_alnum(char32_t cp) {
    return (cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') ||
           (cp >= 'a' && cp <= 'z');
}

inline bool is_ascii_space(char32_t cp) {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' ||
           cp == '\v';
}

// "Special" in the attack sense: neither alphanumeric nor whitespace.
// Non-ASCII letters are handled by the analyzer's script tables; for the
// generation-side window check, anything outside ASCII letters/digits/space
// counts as special.
inline bool is_special_char(char32_t cp) {
    if (cp < 0x80) {
        return !is_ascii_alnum(cp) && !is_ascii_space(cp);
    }
    return true;
}

// --- rounding --------------------------------------------------------------

// count / pool * 100 rounded half-up to 2 decimals, computed in integer
// arithmetic so table values never depend on floating-point rounding.
inline double percent_2dp(int64_t count, int64_t pool) {
    if (pool <= 0) {
        return 0.0;
    }
    // percent scaled to 2 decimals as an integer: round(count*10^4 / pool)
    const int64_t num = count * 10000;
    const int64_t scaled = (2 * num + pool) / (2 * pool);
    return static_cast<double>(scaled) / 100.0;
}

inline std::string format_2dp(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace sca
