// Copyright 2026 the groundqa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "groundqa/chunking.hpp"
#include "groundqa/error.hpp"
#include "groundqa/text.hpp"
#include "test_support.hpp"

namespace groundqa {
namespace {

std::vector<std::string> texts_of(const std::vector<SentenceSpan>& spans) {
    std::vector<std::string> out;
    for (const auto& s : spans) out.push_back(s.text);
    return out;
}

TEST(SplitSentences, TerminalPunctuation) {
    EXPECT_EQ(texts_of(split_sentences("A. B? C!")), (std::vector<std::string>{"A.", "B?", "C!"}));
}

TEST(SplitSentences, AbbreviationsSuppressBreaks) {
    EXPECT_EQ(split_sentences("Dr. Smith left. He returned.").size(), 2u);
    EXPECT_EQ(split_sentences("Use a tool, e.g. a hammer. Then stop.").size(), 2u);
    EXPECT_EQ(split_sentences("Books by J. R. R. Tolkien sell well. Yes.").size(), 2u);
}

TEST(SplitSentences, BlankLineAlwaysBreaks) {
    EXPECT_EQ(texts_of(split_sentences("Heading\n\nBody text")), (std::vector<std::string>{"Heading", "Body text"}));
}

TEST(SplitSentences, EmptyInput) {
    EXPECT_TRUE(split_sentences("").empty());
    EXPECT_TRUE(split_sentences("   \n ").empty());
}

TEST(SplitSentences, SpansAreOrderedAndCoverAllVisibleText) {
    const std::string src = "  First one.  Second?\nThird!\n\nFourth  has no end";
    const auto spans = split_sentences(src);
    std::string visible;
    for (std::size_t i = 0; i < spans.size(); ++i) {
        EXPECT_EQ(spans[i].index, i);
        EXPECT_EQ(src.substr(spans[i].start_offset, spans[i].end_offset - spans[i].start_offset), spans[i].text);
        if (i > 0) EXPECT_GE(spans[i].start_offset, spans[i - 1].end_offset);
        visible += text::non_space_chars(spans[i].text);
    }
    EXPECT_EQ(visible, text::non_space_chars(src));
}

TEST(ConsecutiveDistances, IdenticalSentencesAreZero) {
    HashedTokenEmbedder e(64);
    const auto spans = split_sentences("Same words here. Same words here.");
    const auto d = consecutive_distances(spans, e, 0);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_NEAR(d[0], 0.0, 1e-6);
}

TEST(ConsecutiveDistances, OrthogonalStubGivesOnes) {
    testing::TopicEmbedder e({{"alpha"}, {"beta"}, {"gamma"}});
    const auto spans = split_sentences("Alpha alpha. Beta. Gamma gamma gamma. Alpha.");
    const auto d = consecutive_distances(spans, e, 0);
    ASSERT_EQ(d.size(), spans.size() - 1);
    for (double x : d) EXPECT_NEAR(x, 1.0, 1e-9);
}

TEST(ConsecutiveDistances, BufferGroupsNeighbours) {
    testing::TopicEmbedder e({{"alpha"}, {"beta"}});
    const auto spans = split_sentences("Alpha. Alpha. Beta. Beta.");
    // buffer 1: groups {0,1}, {0,1,2}, {1,2,3}, {2,3}.
    const auto d = consecutive_distances(spans, e, 1);
    ASSERT_EQ(d.size(), 3u);
    auto cos = [](double a0, double a1, double b0, double b1) {
        return (a0 * b0 + a1 * b1) / (std::hypot(a0, a1) * std::hypot(b0, b1));
    };
    EXPECT_NEAR(d[0], 1.0 - cos(2, 0, 2, 1), 1e-6);
    EXPECT_NEAR(d[1], 1.0 - cos(2, 1, 1, 2), 1e-6);
    EXPECT_NEAR(d[2], 1.0 - cos(1, 2, 0, 2), 1e-6);
}

TEST(ConsecutiveDistances, NeedsTwoSentences) {
    HashedTokenEmbedder e(16);
    const auto spans = split_sentences("Only one.");
    EXPECT_ERROR_CODE(consecutive_distances(spans, e, 0), ErrorCode::kInvalidArgument);
}

TEST(Quantile, LinearInterpolation) {
    const std::vector<double> v{4, 1, 3, 2};
    EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(quantile(v, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
    EXPECT_DOUBLE_EQ(quantile(v, 0.9), 3.7);  // position 2.7 between 3 and 4
}

TEST(Breakpoints, StandardDeviationHandExample) {
    const std::vector<double> d{0.1, 0.1, 0.9, 0.1};
    // mean 0.3, population stddev sqrt(0.12) = 0.34641, threshold 0.64641.
    const double mean = (0.1 + 0.1 + 0.9 + 0.1) / 4;
    const double sd = std::sqrt((3 * 0.2 * 0.2 + 0.6 * 0.6) / 4);
    ASSERT_NEAR(mean + sd, 0.6464101615, 1e-9);
    EXPECT_EQ(compute_breakpoints(d, {BreakpointMethod::kStandardDeviation, 1.0, 0}), (std::set<std::size_t>{2}));
}

TEST(Breakpoints, PercentileHandExample) {
    const std::vector<double> d{0.1, 0.2, 0.9, 0.15};
    // Sorted 0.1 0.15 0.2 0.9; position 2.7 -> 0.2 + 0.7 * 0.7 = 0.69.
    EXPECT_EQ(compute_breakpoints(d, {BreakpointMethod::kPercentile, 0.9, 0}), (std::set<std::size_t>{2}));
}

TEST(Breakpoints, GradientMarksTheRise) {
    const std::vector<double> d{0.1, 0.1, 0.8, 0.1, 0.1};
    // Rises: [0, 0, 0.7, -0.7, 0]; 0.75 quantile is 0, so only index 2 exceeds it.
    EXPECT_EQ(compute_breakpoints(d, {BreakpointMethod::kGradient, 0.75, 0}), (std::set<std::size_t>{2}));
}

TEST(Breakpoints, ConstantInputHasNone) {
    const std::vector<double> d{0.4, 0.4, 0.4};
    for (auto m : {BreakpointMethod::kStandardDeviation, BreakpointMethod::kPercentile, BreakpointMethod::kGradient}) {
        EXPECT_TRUE(compute_breakpoints(d, {m, 0.5, 0}).empty());
    }
}

TEST(Breakpoints, StrictComparisonAtThreshold) {
    // Quantile 0.5 of {0, 1} is 0.5: nothing equals it, 1 exceeds it.
    EXPECT_EQ(compute_breakpoints(std::vector<double>{0, 1}, {BreakpointMethod::kPercentile, 0.5, 0}),
              (std::set<std::size_t>{1}));
    // Quantile 1.0 of {0, 1} is 1: the maximum never exceeds itself.
    EXPECT_TRUE(compute_breakpoints(std::vector<double>{0, 1}, {BreakpointMethod::kPercentile, 1.0, 0}).empty());
}

TEST(Breakpoints, CountIsMonotoneInAmount) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> d(200);
    for (auto& x : d) x = u(rng);
    std::size_t prev = d.size();
    for (double amount : {0.1, 0.5, 1.0, 1.5, 2.0, 3.0, 10.0}) {
        const auto n = compute_breakpoints(d, {BreakpointMethod::kStandardDeviation, amount, 0}).size();
        EXPECT_LE(n, prev);
        prev = n;
    }
    EXPECT_EQ(prev, 0u);
}

TEST(Breakpoints, ConfigValidation) {
    EXPECT_ERROR_CODE((SemanticChunkConfig{BreakpointMethod::kStandardDeviation, 0.0, 0}.validate()),
                      ErrorCode::kInvalidArgument);
    EXPECT_ERROR_CODE((SemanticChunkConfig{BreakpointMethod::kPercentile, 1.5, 0}.validate()),
                      ErrorCode::kInvalidArgument);
    EXPECT_ERROR_CODE((RecursiveChunkConfig{100, 100}.validate()), ErrorCode::kInvalidArgument);
    EXPECT_ERROR_CODE(compute_breakpoints(std::vector<double>{}, SemanticChunkConfig{}), ErrorCode::kInvalidArgument);
    EXPECT_EQ(parse_breakpoint_method("gradient"), BreakpointMethod::kGradient);
    EXPECT_ERROR_CODE(parse_breakpoint_method("fuzzy"), ErrorCode::kInvalidArgument);
}

TEST(SemanticChunk, PlantedBlocksGiveThreeChunks) {
    const auto corpus = testing::planted_topic_corpus();
    testing::TopicEmbedder e(corpus.topic_words);
    const auto spans = split_sentences(corpus.text);
    ASSERT_EQ(spans.size(), 12u);
    const auto d = consecutive_distances(spans, e, 0);
    const std::vector<double> expected{0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0};
    ASSERT_EQ(d.size(), expected.size());
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(d[i], expected[i], 1e-9);

    const auto chunks = semantic_chunk(corpus.text, {BreakpointMethod::kStandardDeviation, 1.0, 0}, e);
    ASSERT_EQ(chunks.size(), 3u);
    EXPECT_EQ(chunks[0].text,
              "The river carried the boat. Fish swam in the water. A boat drifted down the river. The water was "
              "cold for fish.");
    EXPECT_EQ(chunks[1].start_offset, spans[4].start_offset);
    EXPECT_EQ(chunks[2].end_offset, corpus.text.size());
}

TEST(SemanticChunk, HugeAmountGivesOneChunk) {
    const auto corpus = testing::planted_topic_corpus();
    testing::TopicEmbedder e(corpus.topic_words);
    const auto chunks = semantic_chunk(corpus.text, {BreakpointMethod::kStandardDeviation, 10.0, 0}, e);
    ASSERT_EQ(chunks.size(), 1u);
    EXPECT_EQ(chunks[0].text, text::normalize_whitespace(corpus.text));
}

TEST(SemanticChunk, TrivialInputs) {
    HashedTokenEmbedder e(16);
    EXPECT_TRUE(semantic_chunk("", SemanticChunkConfig{}, e).empty());
    const auto one = semantic_chunk("  Just one sentence here.  ", SemanticChunkConfig{}, e);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].text, "Just one sentence here.");
    EXPECT_EQ(e.calls(), 0u);
}

TEST(SemanticChunk, DeterministicAndOrdered) {
    HashedTokenEmbedder e(128);
    std::string text;
    for (int i = 0; i < 40; ++i) text += "Sentence number " + std::to_string(i % 7) + " mentions topic" +
                                        std::to_string(i / 10) + ". ";
    const auto a = semantic_chunk(text, SemanticChunkConfig{}, e);
    const auto b = semantic_chunk(text, SemanticChunkConfig{}, e);
    ASSERT_EQ(a.size(), b.size());
    std::string visible;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].text, b[i].text);
        if (i > 0) EXPECT_GT(a[i].start_offset, a[i - 1].start_offset);
        EXPECT_EQ(a[i].text, text::normalize_whitespace(text.substr(a[i].start_offset,
                                                                     a[i].end_offset - a[i].start_offset)));
        visible += text::non_space_chars(a[i].text);
    }
    EXPECT_EQ(visible, text::non_space_chars(text));
}

TEST(RecursiveChunk, ShortTextIsOneChunk) {
    const auto chunks = recursive_chunk("short text", {100, 20});
    ASSERT_EQ(chunks.size(), 1u);
    EXPECT_EQ(chunks[0].text, "short text");
}

TEST(RecursiveChunk, CharacterFallbackWithoutSeparators) {
    const std::string text(2000, 'x');
    const auto chunks = recursive_chunk(text, {1000, 0});
    ASSERT_EQ(chunks.size(), 2u);
    EXPECT_EQ(chunks[0].text.size(), 1000u);
    EXPECT_EQ(chunks[1].text.size(), 1000u);
}

std::string random_prose(std::size_t min_chars, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::string out;
    while (out.size() < min_chars) {
        std::string word;
        const auto len = 2 + rng() % 8;
        for (std::size_t i = 0; i < len; ++i) word.push_back(static_cast<char>('a' + rng() % 26));
        out += word;
        const auto r = rng() % 20;
        out += r == 0 ? ". " : r == 1 ? "\n" : r == 2 ? "\n\n" : " ";
    }
    return out;
}

TEST(RecursiveChunk, OverlapRepeatsTheTailOfThePreviousChunk) {
    const std::string text = random_prose(1500, 11).substr(0, 1500);
    const auto chunks = recursive_chunk(text, {750, 200});
    ASSERT_GE(chunks.size(), 2u);
    const auto& first = chunks[0].text;
    const auto& second = chunks[1].text;
    ASSERT_GE(first.size(), 200u);
    EXPECT_EQ(second.substr(0, 200), first.substr(first.size() - 200));
}

TEST(RecursiveChunk, PropertiesOnRandomText) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::string text = random_prose(3000 + seed * 300, seed);
        for (const RecursiveChunkConfig cfg : {RecursiveChunkConfig{750, 200}, RecursiveChunkConfig{1000, 250},
                                               RecursiveChunkConfig{300, 0}}) {
            const auto chunks = recursive_chunk(text, cfg);
            std::vector<char> covered(text.size(), 0);
            for (std::size_t i = 0; i < chunks.size(); ++i) {
                const auto& c = chunks[i];
                EXPECT_FALSE(text::strip(c.text).empty());
                EXPECT_LE(c.text.size(), cfg.chunk_size + cfg.overlap);
                EXPECT_EQ(c.text, text.substr(c.start_offset, c.end_offset - c.start_offset));
                if (i > 0) EXPECT_GT(c.start_offset, chunks[i - 1].start_offset);
                for (auto p = c.start_offset; p < c.end_offset; ++p) covered[p] = 1;
            }
            for (std::size_t p = 0; p < text.size(); ++p) {
                if (!text::is_space(text[p])) ASSERT_TRUE(covered[p]) << "seed " << seed << " offset " << p;
            }
        }
    }
}

TEST(RecursiveChunk, PrefersParagraphBreaks) {
    const std::string a(400, 'a'), b(400, 'b');
    const auto chunks = recursive_chunk(a + "\n\n" + b, {500, 0});
    ASSERT_EQ(chunks.size(), 2u);
    EXPECT_EQ(text::strip(chunks[0].text), a);
    EXPECT_EQ(text::strip(chunks[1].text), b);
}

TEST(ChunkText, DispatchAndDescribe) {
    HashedTokenEmbedder e(16);
    EXPECT_EQ(chunk_text("One. Two.", RecursiveChunkConfig{100, 10}, e).size(), 1u);
    EXPECT_EQ(e.calls(), 0u);
    EXPECT_EQ(describe(RecursiveChunkConfig{750, 200}), "recursive/750/200");
    EXPECT_EQ(describe(SemanticChunkConfig{BreakpointMethod::kStandardDeviation, 1.0, 1}),
              "semantic/standard_deviation/1");
}

}  // namespace
}  // namespace groundqa
