#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "sca/rng.hpp"
#include "sca/target.hpp"
#include "sca/util.hpp"

namespace sca {

// Vocabulary layout mirrors a byte-fallback tokenizer: id 0 <unk>, 1 <s>,
// 2 </s>, 3..258 the 256 byte tokens, then words harvested from the corpus.
struct MockVocab {
    static constexpr int32_t kUnkId = 0;
    static constexpr int32_t kBosId = 1;
    static constexpr int32_t kEosId = 2;
    static constexpr int32_t kByteBase = 3;
    static constexpr int32_t kFirstWordId = 259;

    std::vector<std::string> tokens;
    std::unordered_map<std::string, int32_t> word_ids;

    MockVocab() {
        tokens = {"<unk>", "<s>", "</s>"};
        for (int b = 0; b < 256; ++b) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "<0x%02X>", b);
            tokens.emplace_back(buf);
        }
    }

    int32_t byte_id(uint8_t b) const { return kByteBase + b; }
    bool is_byte(int32_t id) const { return id >= kByteBase && id < kFirstWordId; }
    bool is_word(int32_t id) const { return id >= kFirstWordId; }
    size_t size() const { return tokens.size(); }

    int32_t add_word(const std::string& w) {
        const auto [it, inserted] = word_ids.emplace(w, static_cast<int32_t>(tokens.size()));
        if (inserted) {
            tokens.push_back(w);
        }
        return it->second;
    }

    // Control ids in the tokenstats sense: markers plus byte fallbacks.
    std::vector<int32_t> control_ids() const {
        std::vector<int32_t> ids(kFirstWordId);
        for (int32_t i = 0; i < kFirstWordId; ++i) {
            ids[i] = i;
        }
        return ids;
    }
};

enum class CanaryKind { email, phone, url, code, template_, chat };

inline std::string_view canary_kind_name(CanaryKind k) {
    switch (k) {
        case CanaryKind::email: return "email";
        case CanaryKind::phone: return "phone";
        case CanaryKind::url: return "url";
        case CanaryKind::code: return "code";
        case CanaryKind::template_: return "template";
        case CanaryKind::chat: return "chat";
    }
    return "unknown";
}

inline CanaryKind canary_kind_from_name(std::string_view name) {
    if (name == "email") return CanaryKind::email;
    if (name == "phone") return CanaryKind::phone;
    if (name == "url") return CanaryKind::url;
    if (name == "code") return CanaryKind::code;
    if (name == "template") return CanaryKind::template_;
    if (name == "chat") return CanaryKind::chat;
    throw DataError("unknown canary kind: " + std::string(name));
}

struct Canary {
    CanaryKind kind = CanaryKind::email;
    std::string text;
    size_t corpus_token_pos = 0;  // index of the canary's first token
    size_t corpus_byte_pos = 0;
};

// Canary manifest: JSONL of {"kind": ..., "text": ...}.
inline std::vector<Canary> load_canaries(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open canary manifest: " + path.string());
    }
    std::vector<Canary> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("kind") || !j.contains("text")) {
            throw DataError("bad canary manifest line " + std::to_string(lineno));
        }
        Canary c;
        c.kind = canary_kind_from_name(j["kind"].get<std::string>());
        c.text = j["text"].get<std::string>();
        out.push_back(std::move(c));
    }
    return out;
}

namespace detail {
struct TokenKeyHash {
    size_t operator()(const std::vector<int32_t>& key) const {
        size_t h = 0xcbf29ce484222325ULL;
        for (const int32_t v : key) {
            h ^= static_cast<size_t>(v) + 0x9e3779b9 + (h << 6) + (h >> 2);
        }
        return h;
    }
};
}  // namespace detail

// Deterministic memorizing toy LM. Text is tokenized into corpus words
// (maximal alphanumeric runs) and single bytes; generation mixes a smoothed
// unigram background with suffix-indexed corpus continuations, boosts
// control/byte tokens while the recent context is special-character heavy,
// and honors request logit bias. Immutable after build.
class MemorizingModel {
public:
    using SuffixIndex =
        std::unordered_map<std::vector<int32_t>, std::vector<size_t>, detail::TokenKeyHash>;

    static MemorizingModel build(std::string corpus_text, std::vector<Canary> canaries,
                                 int context_order = 3, double p_mem = 0.9,
                                 double special_boost = 2.0, uint64_t seed = 1) {
        if (corpus_text.empty()) {
            throw ConfigError("corpus must be non-empty");
        }
        if (context_order < 1) {
            throw ConfigError("context order must be >= 1");
        }
        if (p_mem < 0.0 || p_mem > 1.0) {
            throw ConfigError("p_mem must be in [0, 1]");
        }
        MemorizingModel model;
        model.k_ = context_order;
        model.p_mem_ = p_mem;
        model.special_boost_ = special_boost;
        model.seed_ = seed;
        model.corpus_text_ = std::move(corpus_text);

        std::vector<size_t> token_starts;
        model.corpus_ = scan(model.corpus_text_, model.vocab_, &model.vocab_, &token_starts);

        for (Canary& c : canaries) {
            const size_t byte_pos = model.corpus_text_.find(c.text);
            if (byte_pos == std::string::npos) {
                throw ConfigError("canary not present in corpus: " + c.text);
            }
            c.corpus_byte_pos = byte_pos;
            const auto it =
                std::lower_bound(token_starts.begin(), token_starts.end(), byte_pos);
            c.corpus_token_pos = static_cast<size_t>(it - token_starts.begin());
        }
        model.canaries_ = std::move(canaries);

        // Suffix indexes for orders 1..k; values are continuation positions.
        model.index_.resize(static_cast<size_t>(model.k_) + 1);
        for (int order = 1; order <= model.k_; ++order) {
            auto& index = model.index_[static_cast<size_t>(order)];
            for (size_t p = static_cast<size_t>(order); p < model.corpus_.size(); ++p) {
                std::vector<int32_t> key(model.corpus_.begin() + static_cast<ptrdiff_t>(p - order),
                                         model.corpus_.begin() + static_cast<ptrdiff_t>(p));
                index[std::move(key)].push_back(p);
            }
        }

        // Smoothed unigram background (unnormalized log space).
        std::vector<int64_t> counts(model.vocab_.size(), 0);
        for (const int32_t id : model.corpus_) {
            ++counts[static_cast<size_t>(id)];
        }
        model.unigram_logits_.resize(model.vocab_.size());
        constexpr double kAlpha = 0.01;
        for (size_t i = 0; i < counts.size(); ++i) {
            model.unigram_logits_[i] = std::log(static_cast<double>(counts[i]) + kAlpha);
        }
        return model;
    }

    static MemorizingModel from_params(const MockModelParams& params) {
        std::vector<Canary> canaries;
        if (!params.canaries_path.empty()) {
            canaries = load_canaries(params.canaries_path);
        }
        return build(read_file_text(params.corpus_path), std::move(canaries),
                     params.context_order, params.p_mem, params.special_boost,
                     params.model_seed);
    }

    ModelResponse generate(const GenerationRequest& request) const {
        validate(request);
        ModelResponse response;
        std::vector<int32_t> context = tokenize(request.prompt);
        std::string window_text = request.prompt;

        Rng rng(derive_seed(seed_, "generate", request.sampling_seed.value_or(0)));
        const size_t vocab_size = vocab_.size();
        std::vector<double> logits(vocab_size);
        std::vector<double> probs(vocab_size);
        const double temperature = std::max(request.temperature, 0.01);

        bool hit_eos = false;
        while (response.token_count < request.max_tokens) {
            for (size_t i = 0; i < vocab_size; ++i) {
                logits[i] = unigram_logits_[i];
            }
            if (special_window(window_text)) {
                for (int32_t id = 0; id < MockVocab::kFirstWordId; ++id) {
                    logits[static_cast<size_t>(id)] += special_boost_;
                }
            }
            if (temperature != 1.0) {
                for (double& l : logits) {
                    l /= temperature;
                }
            }
            for (const auto& [id, bias] : request.logit_bias) {
                if (id >= 0 && static_cast<size_t>(id) < vocab_size) {
                    logits[static_cast<size_t>(id)] += bias;
                }
            }

            const int32_t candidate = memorized_candidate(context, rng);

            softmax(logits, probs);
            if (candidate >= 0) {
                apply_memorization(probs, static_cast<size_t>(candidate));
            }

            std::vector<double> step_logprobs(vocab_size);
            for (size_t i = 0; i < vocab_size; ++i) {
                step_logprobs[i] = probs[i] > 0.0
                                       ? std::log(probs[i])
                                       : -std::numeric_limits<double>::infinity();
            }
            response.token_logprobs.push_back(std::move(step_logprobs));

            const int32_t token = sample(probs, rng);
            ++response.token_count;
            if (token == MockVocab::kEosId) {
                hit_eos = true;
                break;
            }
            const std::string piece = token_text(token);
            response.text += piece;
            window_text += piece;
            context.push_back(token);
        }
        response.finish_reason = hit_eos ? FinishReason::stop : FinishReason::length;
        response.latency_ms = response.token_count;  // deterministic pseudo-latency
        return response;
    }

    // --- tokenizer -----------------------------------------------------------

    // Maximal [A-Za-z0-9]+ runs become word tokens; any other byte is a byte
    // token. Unknown words fall back to their bytes, so tokenize/detokenize
    // round-trips arbitrary text.
    std::vector<int32_t> tokenize(std::string_view text) const {
        return scan(text, vocab_, nullptr, nullptr);
    }

    std::string detokenize(std::span<const int32_t> ids) const {
        std::string out;
        for (const int32_t id : ids) {
            out += token_text(id);
        }
        return out;
    }

    std::string token_text(int32_t id) const {
        if (id < MockVocab::kByteBase) {
            return "";  // markers carry no surface text
        }
        if (vocab_.is_byte(id)) {
            return std::string(1, static_cast<char>(id - MockVocab::kByteBase));
        }
        return vocab_.tokens.at(static_cast<size_t>(id));
    }

    // --- read-only state -------------------------------------------------------

    const MockVocab& vocab() const { return vocab_; }
    const std::vector<int32_t>& corpus_tokens() const { return corpus_; }
    const std::string& corpus_text() const { return corpus_text_; }
    const std::vector<Canary>& canaries() const { return canaries_; }
    int context_order() const { return k_; }
    double p_mem() const { return p_mem_; }
    const SuffixIndex& suffix_index(int order) const {
        return index_.at(static_cast<size_t>(order));
    }

private:
    MemorizingModel() = default;

    // harvest == nullptr: lookup-only with byte fallback for unknown words.
    static std::vector<int32_t> scan(std::string_view text, const MockVocab& vocab,
                                     MockVocab* harvest, std::vector<size_t>* starts) {
        std::vector<int32_t> out;
        size_t i = 0;
        const auto alnum = [](char c) {
            return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z') ||
                   (c >= 'a' && c <= 'z');
        };
        while (i < text.size()) {
            const size_t begin = i;
            if (alnum(text[i])) {
                while (i < text.size() && alnum(text[i])) {
                    ++i;
                }
                const std::string word(text.substr(begin, i - begin));
                if (harvest != nullptr) {
                    if (starts) starts->push_back(begin);
                    out.push_back(harvest->add_word(word));
                } else if (const auto it = vocab.word_ids.find(word);
                           it != vocab.word_ids.end()) {
                    out.push_back(it->second);
                } else {
                    for (size_t b = begin; b < i; ++b) {
                        out.push_back(vocab.byte_id(static_cast<uint8_t>(text[b])));
                    }
                }
            } else {
                if (harvest != nullptr && starts) starts->push_back(begin);
                out.push_back(vocab.byte_id(static_cast<uint8_t>(text[i])));
                ++i;
            }
        }
        return out;
    }

    // True when >= 80% of the last 16 code points are special characters.
    static bool special_window(std::string_view text) {
        constexpr size_t kWindow = 16;
        const size_t tail_bytes = std::min<size_t>(text.size(), kWindow * 4);
        const std::vector<char32_t> cps =
            utf8_decode(text.substr(text.size() - tail_bytes));
        if (cps.empty()) {
            return false;
        }
        const size_t n = std::min(cps.size(), kWindow);
        size_t special = 0;
        for (size_t i = cps.size() - n; i < cps.size(); ++i) {
            if (is_special_char(cps[i])) {
                ++special;
            }
        }
        return special * 5 >= n * 4;
    }

    // Longest-suffix lookup with backoff; when several corpus positions share
    // the suffix, one is drawn with the step RNG.
    int32_t memorized_candidate(const std::vector<int32_t>& context, Rng& rng) const {
        const int max_order = std::min<int>(k_, static_cast<int>(context.size()));
        for (int order = max_order; order >= 1; --order) {
            std::vector<int32_t> key(context.end() - order, context.end());
            const auto& index = index_[static_cast<size_t>(order)];
            const auto it = index.find(key);
            if (it != index.end()) {
                const std::vector<size_t>& positions = it->second;
                const size_t pos = positions[rng.uniform_index(positions.size())];
                return corpus_[pos];
            }
        }
        return -1;
    }

    // Final distribution: p_mem on the candidate, (1 - p_mem) on everything
    // else renormalized, so the continuation is followed with probability
    // exactly p_mem regardless of boosts or request bias.
    void apply_memorization(std::vector<double>& probs, size_t candidate) const {
        const double rest = 1.0 - probs[candidate];
        if (rest <= 0.0) {
            std::fill(probs.begin(), probs.end(), 0.0);
            probs[candidate] = 1.0;
            return;
        }
        const double scale = (1.0 - p_mem_) / rest;
        for (double& p : probs) {
            p *= scale;
        }
        probs[candidate] = p_mem_;
    }

    static void softmax(const std::vector<double>& logits, std::vector<double>& probs) {
        const double max_logit = *std::max_element(logits.begin(), logits.end());
        double z = 0.0;
        for (size_t i = 0; i < logits.size(); ++i) {
            probs[i] = std::exp(logits[i] - max_logit);
            z += probs[i];
        }
        for (double& p : probs) {
            p /= z;
        }
    }

    static int32_t sample(const std::vector<double>& probs, Rng& rng) {
        const double u = rng.uniform_real(0.0, 1.0);
        double acc = 0.0;
        int32_t last_positive = 0;
        for (size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] <= 0.0) {
                continue;
            }
            last_positive = static_cast<int32_t>(i);
            acc += probs[i];
            if (u < acc) {
                return last_positive;
            }
        }
        return last_positive;
    }

    MockVocab vocab_;
    std::string corpus_text_;
    std::vector<int32_t> corpus_;
    std::vector<Canary> canaries_;
    std::vector<SuffixIndex> index_;  // index_[order], orders 1..k
    std::vector<double> unigram_logits_;
    int k_ = 3;
    double p_mem_ = 0.9;
    double special_boost_ = 2.0;
    uint64_t seed_ = 1;
};

// Target adapter over the mock model.
class MockTarget : public Target {
public:
    explicit MockTarget(TargetConfig config)
        : config_(std::move(config)), model_(MemorizingModel::from_params(config_.mock)) {}

    MockTarget(TargetConfig config, MemorizingModel model)
        : config_(std::move(config)), model_(std::move(model)) {}

    ModelResponse send(const GenerationRequest& request) override {
        if (!request.logit_bias.empty() && !config_.supports_logit_bias) {
            throw ConfigError("target does not support logit bias");
        }
        return model_.generate(request);
    }

    const TargetConfig& config() const override { return config_; }

    std::vector<int32_t> default_bias_ids() const override {
        return model_.vocab().control_ids();
    }

    const MemorizingModel& model() const { return model_; }

private:
    TargetConfig config_;
    MemorizingModel model_;
};

}  // namespace sca
