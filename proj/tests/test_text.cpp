#include <doctest.h>

#include "ratas/text.hpp"

using namespace ratas;

TEST_CASE("tokenize lowercases and drops single characters") {
    auto tokens = text::tokenize("The encoder's 2 layers, NLP-ready!");
    CHECK(tokens == std::vector<std::string>{"the", "encoder", "layers", "nlp", "ready"});
}

TEST_CASE("content_tokens removes function words but never everything") {
    auto tokens = text::content_tokens("the gateway retry policy");
    CHECK(tokens.count("gateway"));
    CHECK(tokens.count("retry"));
    CHECK_FALSE(tokens.count("the"));

    auto fallback = text::content_tokens("and the of");
    CHECK_FALSE(fallback.empty());
}

TEST_CASE("coverage is the fraction of rule tokens present") {
    CHECK(text::coverage("explain the retry policy", "the policy is bad") ==
          doctest::Approx(1.0 / 3.0));
    CHECK(text::coverage("explain the retry policy",
                         "we explain the retry policy") == doctest::Approx(1.0));
    CHECK(text::coverage("anything", "") == doctest::Approx(0.0));
}

TEST_CASE("split_sentences keeps terminators and skips decimals") {
    auto parts = text::split_sentences("First rule. Second rule; third one.");
    REQUIRE(parts.size() == 3);
    CHECK(parts[0] == "First rule.");
    CHECK(parts[1] == "Second rule;");
    CHECK(parts[2] == "third one.");

    CHECK(text::split_sentences("Accuracy was 3.5 percent.").size() == 1);
}

TEST_CASE("split_paragraphs splits on blank lines, even with stray spaces") {
    auto parts = text::split_paragraphs("one\ntwo\n  \nthree\n\n\nfour");
    REQUIRE(parts.size() == 3);
    CHECK(parts[0] == "one\ntwo");
    CHECK(parts[1] == "three");
    CHECK(parts[2] == "four");
}

TEST_CASE("contains_normalized ignores whitespace differences") {
    CHECK(text::contains_normalized("a  b\n c", "b c"));
    CHECK_FALSE(text::contains_normalized("a b c", "b d"));
    CHECK(text::contains_normalized("anything", ""));
}

TEST_CASE("count_words counts whitespace-separated runs") {
    CHECK(text::count_words("") == 0);
    CHECK(text::count_words("  one   two\nthree ") == 3);
}

TEST_CASE("format_fixed is stable") {
    CHECK(text::format_fixed(0.8, 4) == "0.8000");
    CHECK(text::format_fixed(1.0 / 3.0, 2) == "0.33");
}
