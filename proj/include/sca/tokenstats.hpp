#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sca/util.hpp"

namespace sca {

// Tokenizer vocabulary: one token string per line, id = line index.
struct Vocab {
    std::vector<std::string> entries;

    size_t size() const { return entries.size(); }
    const std::string& token(int32_t id) const { return entries.at(static_cast<size_t>(id)); }
};

inline Vocab load_vocab(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open vocab file: " + path.string());
    }
    Vocab vocab;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        vocab.entries.push_back(line);
    }
    // A trailing newline produces no extra entry; a final blank entry is only
    // kept when the file genuinely ends in two newlines.
    if (!vocab.entries.empty() && vocab.entries.back().empty()) {
        vocab.entries.pop_back();
    }
    if (vocab.entries.empty()) {
        throw DataError("empty vocab file: " + path.string());
    }
    return vocab;
}

inline bool is_byte_fallback_token(std::string_view token) {
    // <0xHH>
    if (token.size() != 6 || token.substr(0, 3) != "<0x" || token.back() != '>') {
        return false;
    }
    const auto hex = [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') ||
               (c >= 'A' && c <= 'F');
    };
    return hex(token[3]) && hex(token[4]);
}

inline bool is_control_token(std::string_view token) {
    return token == "<unk>" || token == "<s>" || token == "</s>" ||
           is_byte_fallback_token(token);
}

// Ids of control markers (<unk>, <s>, </s>) and byte-fallback tokens <0xHH>.
// Sorted and duplicate-free by construction.
inline std::vector<int32_t> control_token_ids(const Vocab& vocab) {
    std::vector<int32_t> ids;
    for (size_t i = 0; i < vocab.entries.size(); ++i) {
        if (is_control_token(vocab.entries[i])) {
            ids.push_back(static_cast<int32_t>(i));
        }
    }
    return ids;
}

// --- delimiter analysis ------------------------------------------------------

struct DelimiterStats {
    int64_t delimiter_count = 0;   // tokens containing c alongside other characters
    int64_t standalone_count = 0;  // tokens equal to c, or boundary-marker + c
    double ratio = 0.0;            // delimiter / max(standalone, 1)
};

// A token counts as standalone when it is exactly the character, or the
// character preceded only by the sentencepiece word-boundary marker.
inline DelimiterStats delimiter_stats(const Vocab& vocab, char32_t c) {
    static constexpr std::string_view kBoundaryMarker = "\xE2\x96\x81";  // U+2581
    const std::string needle = utf8_encode(c);
    const std::string boundary_form = std::string(kBoundaryMarker) + needle;
    DelimiterStats stats;
    for (const std::string& token : vocab.entries) {
        if (token == needle || token == boundary_form) {
            ++stats.standalone_count;
            continue;
        }
        if (token.find(needle) != std::string::npos) {
            ++stats.delimiter_count;
        }
    }
    stats.ratio = static_cast<double>(stats.delimiter_count) /
                  static_cast<double>(std::max<int64_t>(stats.standalone_count, 1));
    if (stats.delimiter_count == 0 && stats.standalone_count == 0) {
        stats.ratio = 0.0;
    }
    return stats;
}

// --- distribution statistics ---------------------------------------------------

struct DistStats {
    double entropy_nats = 0.0;
    double control_mass = 0.0;
    std::vector<std::pair<int32_t, double>> topk;  // probability non-increasing
};

// probs is indexed by token id and must sum to 1 within 1e-6.
inline DistStats distribution_stats(std::span<const double> probs,
                                    std::span<const int32_t> control_ids,
                                    int k = 10) {
    double sum = 0.0;
    for (const double p : probs) {
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
        throw DataError("distribution not normalized: sum = " + std::to_string(sum));
    }
    DistStats stats;
    for (const double p : probs) {
        if (p > 0.0) {
            stats.entropy_nats -= p * std::log(p);
        }
    }
    for (const int32_t id : control_ids) {
        if (id >= 0 && static_cast<size_t>(id) < probs.size()) {
            stats.control_mass += probs[static_cast<size_t>(id)];
        }
    }
    std::vector<int32_t> order(probs.size());
    for (size_t i = 0; i < probs.size(); ++i) {
        order[i] = static_cast<int32_t>(i);
    }
    const size_t take = std::min<size_t>(static_cast<size_t>(std::max(k, 0)), probs.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<ptrdiff_t>(take),
                      order.end(), [&](int32_t a, int32_t b) {
                          const double pa = probs[static_cast<size_t>(a)];
                          const double pb = probs[static_cast<size_t>(b)];
                          if (pa != pb) return pa > pb;
                          return a < b;
                      });
    for (size_t i = 0; i < take; ++i) {
        stats.topk.emplace_back(order[i], probs[static_cast<size_t>(order[i])]);
    }
    return stats;
}

}  // namespace sca
