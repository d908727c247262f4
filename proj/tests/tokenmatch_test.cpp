#include <gtest/gtest.h>

#include <random>

#include "microgeo/tokenmatch.hpp"

using namespace microgeo;

namespace {

TokenSet set_of(std::vector<std::string> tokens, MatchMode mode = MatchMode::automatic) {
    return TokenSet{.name = "s", .tokens = std::move(tokens), .mode = mode};
}

std::vector<Tweet> tweets_of(std::initializer_list<const char*> texts) {
    std::vector<Tweet> out;
    int k = 0;
    for (const char* t : texts) out.push_back(Tweet{.id = std::to_string(k++), .text = t, .lang = "es"});
    return out;
}

std::vector<std::string> ids(const std::vector<Tweet>& ts) {
    std::vector<std::string> out;
    for (const auto& t : ts) out.push_back(t.id);
    return out;
}

}  // namespace

TEST(NormalizeText, Examples) {
    const MatchConfig cfg;
    EXPECT_EQ(normalize_text("La Boca", cfg), "la boca");
    EXPECT_EQ(normalize_text("querés", cfg), "querés");
    EXPECT_EQ(normalize_text("querés", cfg), "querés");  // decomposed input composes
    EXPECT_EQ(normalize_text("QUERÉS", cfg), "querés");
    EXPECT_EQ(normalize_text("La Boca", MatchConfig{.casefold = false}), "La Boca");
}

TEST(NormalizeText, Idempotent) {
    for (const char* s : {"Ñandú ÅNGSTRÖM", "straße", "Å", "ẛ̣", "😊📈 Fútbol", "plain ascii"}) {
        for (bool fold : {true, false}) {
            const MatchConfig cfg{.casefold = fold};
            const auto once = normalize_text(s, cfg);
            EXPECT_EQ(normalize_text(once, cfg), once) << s;
        }
    }
}

TEST(Matches, Examples) {
    EXPECT_TRUE(matches("Vamos a La Boca!", set_of({"la boca"}, MatchMode::word)));
    EXPECT_FALSE(matches("losa caída", set_of({"los"}, MatchMode::word)));
    EXPECT_TRUE(matches("losa caída", set_of({"los"}, MatchMode::substring)));
    EXPECT_TRUE(matches("quieres venir?", set_of({"quieres", "tienes", "puedes"})));
    EXPECT_FALSE(matches("querés venir?", set_of({"quieres"})));
}

TEST(Matches, DefaultModeByTokenLength) {
    EXPECT_TRUE(matches("vamos", set_of({"v"})));      // single code point: substring
    EXPECT_FALSE(matches("solos", set_of({"los"})));   // two or more: word
    EXPECT_TRUE(matches("ñ", set_of({"Ñ"})));
}

TEST(Matches, WordBoundaries) {
    const auto s = set_of({"los"});
    EXPECT_TRUE(matches("los", s));
    EXPECT_TRUE(matches("(los)", s));
    EXPECT_TRUE(matches("a los 3", s));
    EXPECT_FALSE(matches("los2", s));
    EXPECT_FALSE(matches("loś", s));       // combining accent continues the word
    EXPECT_FALSE(matches("ñlos", s));
    EXPECT_TRUE(matches("x solos los", s));  // later occurrence still found
    EXPECT_TRUE(matches("me gusta 😊!", set_of({"😊"}, MatchMode::word)));
    EXPECT_TRUE(matches("😊😊", set_of({"😊"}, MatchMode::word)));
    EXPECT_FALSE(matches("gusta😊", set_of({"😊"}, MatchMode::word)));
}

TEST(Matches, CasefoldOverride) {
    auto s = set_of({"B"});
    EXPECT_TRUE(matches("abc", s));
    s.casefold = false;
    EXPECT_FALSE(matches("abc", s));
    EXPECT_TRUE(matches("aBc", s));
    EXPECT_FALSE(matches("aBc", set_of({"b"}), MatchConfig{.casefold = false}));
}

TEST(TokenSet, Validation) {
    EXPECT_THROW(TokenMatcher(set_of({}), {}), ConfigError);
    EXPECT_THROW(TokenMatcher(set_of({"a", ""}), {}), ConfigError);
    EXPECT_THROW(TokenMatcher(TokenSet{.tokens = {"a"}}, {}), ConfigError);
}

TEST(Select, Examples) {
    const auto tango = set_of({"tango"});
    const auto futbol = set_of({"fútbol"});
    EXPECT_TRUE(select({}, tango).empty());
    const auto c = tweets_of({"bailamos tango", "nada", "Tango y fútbol"});
    EXPECT_EQ(ids(select(c, tango)), (std::vector<std::string>{"0", "2"}));
    EXPECT_EQ(ids(select(c, futbol)), (std::vector<std::string>{"2"}));
}

TEST(Select, Properties) {
    std::mt19937_64 rng(23);
    const std::vector<std::string> words{"las", "los", "la", "boca", "solos", "vos", "b", "ab", "tango", "Las", "LOS"};
    std::vector<Tweet> corpus;
    for (int k = 0; k < 400; ++k) {
        std::string text;
        const auto len = 1 + rng() % 6;
        for (std::size_t w = 0; w < len; ++w) text += words[rng() % words.size()] + (rng() % 2 ? " " : ",");
        corpus.push_back(Tweet{.id = std::to_string(k), .text = text});
    }
    const auto small = set_of({"los"});
    const auto big = set_of({"los", "las"});
    const auto sel = select(corpus, small);
    EXPECT_EQ(ids(select(sel, small)), ids(sel));
    const auto big_ids = ids(select(corpus, big));
    for (const auto& id : ids(sel)) EXPECT_NE(std::find(big_ids.begin(), big_ids.end(), id), big_ids.end());
    const auto sub_ids = ids(select(corpus, set_of({"los", "las"}, MatchMode::substring)));
    for (const auto& id : big_ids) EXPECT_NE(std::find(sub_ids.begin(), sub_ids.end(), id), sub_ids.end());
    EXPECT_GT(sub_ids.size(), big_ids.size());
}

TEST(TokenConfig, ParsesSetsAndComparisons) {
    const auto cfg = parse_token_config(nlohmann::json::parse(R"({
        "token_sets": [
            {"name": "las", "tokens": ["las"]},
            {"name": "los", "tokens": ["los"], "mode": "word", "casefold": false}
        ],
        "comparisons": [{"name": "articles", "target": "las", "reference": "los"}]
    })"));
    EXPECT_EQ(cfg.set("los").mode, MatchMode::word);
    EXPECT_EQ(cfg.set("los").casefold, false);
    ASSERT_EQ(cfg.comparisons.size(), 1u);
    EXPECT_EQ(cfg.comparisons[0].target, "las");
    EXPECT_THROW(cfg.set("nope"), ConfigError);
    EXPECT_THROW(parse_token_config(nlohmann::json::parse(
                     R"({"token_sets":[{"name":"a","tokens":["x"]},{"name":"a","tokens":["y"]}]})")),
                 ConfigError);
    EXPECT_THROW(parse_token_config(nlohmann::json::parse(R"({"token_sets":[{"name":"a","tokens":["x"],"mode":"regex"}]})")),
                 ConfigError);
}
