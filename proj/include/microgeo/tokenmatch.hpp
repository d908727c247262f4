#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "microgeo/corpus.hpp"
#include "microgeo/error.hpp"
#include "microgeo/unicode.hpp"

namespace microgeo {

/// How a token must appear in the text.
///  - word: bounded on both sides by a non-word character or the string edge.
///  - substring: plain containment.
///  - automatic: word for tokens of two or more code points, substring for single characters.
enum class MatchMode { automatic, word, substring };

inline MatchMode parse_match_mode(std::string_view s) {
    if (s == "auto" || s == "automatic") return MatchMode::automatic;
    if (s == "word") return MatchMode::word;
    if (s == "substring") return MatchMode::substring;
    throw ConfigError("unknown match mode '" + std::string(s) + "'");
}

inline const char* to_string(MatchMode m) {
    switch (m) {
        case MatchMode::word: return "word";
        case MatchMode::substring: return "substring";
        default: return "auto";
    }
}

struct MatchConfig {
    bool casefold = true;
};

struct TokenSet {
    std::string name;
    std::vector<std::string> tokens;
    MatchMode mode = MatchMode::automatic;
    /// Overrides MatchConfig::casefold when set.
    std::optional<bool> casefold;

    void validate() const {
        if (name.empty()) throw ConfigError("token set needs a name");
        if (tokens.empty()) throw ConfigError("token set '" + name + "' has no tokens");
        for (const auto& t : tokens) {
            if (t.empty()) throw ConfigError("token set '" + name + "' contains an empty token");
        }
    }

    bool effective_casefold(const MatchConfig& config) const { return casefold.value_or(config.casefold); }
};

inline std::string normalize_text(std::string_view text, const MatchConfig& config) {
    return unicode::normalize(text, config.casefold);
}

/// A token set with its tokens normalized once, ready to test many texts.
class TokenMatcher {
public:
    TokenMatcher(const TokenSet& set, const MatchConfig& config)
        : name_(set.name), casefold_(set.effective_casefold(config)) {
        set.validate();
        for (const auto& raw : set.tokens) {
            Entry e;
            e.text = unicode::normalize(raw, casefold_);
            if (e.text.empty()) throw ConfigError("token in set '" + set.name + "' normalizes to nothing");
            e.word = set.mode == MatchMode::word ||
                     (set.mode == MatchMode::automatic && unicode::code_point_count(e.text) >= 2);
            entries_.push_back(std::move(e));
        }
    }

    const std::string& name() const noexcept { return name_; }
    bool casefold() const noexcept { return casefold_; }

    /// `normalized` must already be normalized with this matcher's casefold setting.
    bool matches_normalized(std::string_view normalized) const {
        for (const auto& e : entries_) {
            if (e.word ? contains_word(normalized, e.text) : normalized.find(e.text) != std::string_view::npos) {
                return true;
            }
        }
        return false;
    }

    bool matches(std::string_view text) const { return matches_normalized(unicode::normalize(text, casefold_)); }

private:
    struct Entry {
        std::string text;
        bool word = false;
    };

    static bool contains_word(std::string_view hay, std::string_view needle) {
        for (std::size_t pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + 1)) {
            const auto before = unicode::code_point_before(hay, pos);
            const auto after = unicode::code_point_at(hay, pos + needle.size());
            if ((before < 0 || !unicode::is_word_char(before)) && (after < 0 || !unicode::is_word_char(after))) {
                return true;
            }
        }
        return false;
    }

    std::string name_;
    bool casefold_;
    std::vector<Entry> entries_;
};

inline bool matches(std::string_view text, const TokenSet& set, const MatchConfig& config = {}) {
    return TokenMatcher(set, config).matches(text);
}

/// Tweets whose text matches `set`, in input order.
inline std::vector<Tweet> select(const std::vector<Tweet>& tweets, const TokenSet& set, const MatchConfig& config = {}) {
    const TokenMatcher matcher(set, config);
    std::vector<Tweet> out;
    for (const auto& t : tweets) {
        if (matcher.matches(t.text)) out.push_back(t);
    }
    return out;
}

/// A named target/reference pairing from a config file.
struct Comparison {
    std::string name;
    std::string target;
    std::string reference;
    std::string note;
};

/// Token sets and comparisons loaded from one config document.
struct TokenConfig {
    std::map<std::string, TokenSet> sets;
    std::vector<Comparison> comparisons;

    const TokenSet& set(const std::string& name) const {
        auto it = sets.find(name);
        if (it == sets.end()) throw ConfigError("unknown token set '" + name + "'");
        return it->second;
    }
};

/// Reads
///   {"token_sets": [{"name", "tokens": [...], "mode"?: "auto|word|substring", "casefold"?: bool}],
///    "comparisons"?: [{"name", "target", "reference", "note"?}]}
inline TokenConfig parse_token_config(const nlohmann::json& doc) {
    TokenConfig cfg;
    try {
        for (const auto& js : doc.at("token_sets")) {
            TokenSet set;
            set.name = js.at("name").get<std::string>();
            set.tokens = js.at("tokens").get<std::vector<std::string>>();
            if (js.contains("mode")) set.mode = parse_match_mode(js.at("mode").get<std::string>());
            if (js.contains("casefold")) set.casefold = js.at("casefold").get<bool>();
            set.validate();
            if (cfg.sets.contains(set.name)) throw ConfigError("duplicate token set '" + set.name + "'");
            cfg.sets.emplace(set.name, std::move(set));
        }
        if (doc.contains("comparisons")) {
            for (const auto& jc : doc.at("comparisons")) {
                Comparison c;
                c.name = jc.at("name").get<std::string>();
                c.target = jc.at("target").get<std::string>();
                c.reference = jc.at("reference").get<std::string>();
                c.note = jc.value("note", "");
                cfg.set(c.target);
                cfg.set(c.reference);
                if (c.target == c.reference) throw ConfigError("comparison '" + c.name + "' uses one set twice");
                cfg.comparisons.push_back(std::move(c));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid token config: ") + e.what());
    }
    return cfg;
}

inline TokenConfig load_token_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open token config '" + path + "'");
    try {
        return parse_token_config(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("token config '" + path + "' is not valid JSON: " + e.what());
    }
}

}  // namespace microgeo
