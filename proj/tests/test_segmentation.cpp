#include <doctest.h>

#include <numeric>
#include <string>
#include <vector>

#include "afie/errors.hpp"
#include "afie/segmentation.hpp"
#include "afie/token_counter.hpp"

#include "test_support.hpp"

using namespace afie;
using testsupport::WordCounter;
using testsupport::split_words;
using testsupport::words_text;

TEST_CASE("split_paragraph keeps the word sequence") {
    WordCounter counter;
    std::string text = words_text(10);
    auto pieces = split_paragraph(text, 3, counter);
    REQUIRE(pieces.size() == 4);

    std::vector<std::string> joined_words;
    for (const auto& piece : pieces) {
        CHECK(counter.count(piece) <= 3);
        for (auto& word : split_words(piece)) joined_words.push_back(word);
    }
    CHECK(joined_words == split_words(text));
}

TEST_CASE("split_paragraph under the byte counter") {
    HeuristicTokenCounter counter;
    auto pieces = split_paragraph("aaaa bbbb cccc", 1, counter);
    CHECK(pieces == std::vector<std::string>{"aaaa", "bbbb", "cccc"});
}

TEST_CASE("split_paragraph cuts an oversized single word") {
    HeuristicTokenCounter counter;
    auto pieces = split_paragraph("abcdefghijkl", 1, counter);
    std::string rejoined;
    for (const auto& piece : pieces) {
        CHECK(counter.count(piece) <= 1);
        rejoined += piece;
    }
    CHECK(rejoined == "abcdefghijkl");
}

TEST_CASE("split_paragraph returns the text unchanged when it fits") {
    WordCounter counter;
    auto pieces = split_paragraph("one two three", 10, counter);
    CHECK(pieces == std::vector<std::string>{"one two three"});
}

TEST_CASE("split_table repeats the header and partitions the body") {
    WordCounter counter;
    Table table{{{"h1", "h2"},
                 {"r1a", "r1b"},
                 {"r2a", "r2b"},
                 {"r3a", "r3b"},
                 {"r4a", "r4b"},
                 {"r5a", "r5b"},
                 {"r6a", "r6b"}}};
    // Plain serialization of header + k rows costs 2 + 2k words.
    std::vector<std::string> warnings;
    auto pieces = split_table(table, 6, SerializationFormat::Plain, counter, &warnings);
    CHECK(warnings.empty());
    REQUIRE(pieces.size() == 3);

    std::vector<std::vector<std::string>> body;
    for (const auto& piece : pieces) {
        REQUIRE(!piece.rows.empty());
        CHECK(piece.rows[0] == table.rows[0]);
        CHECK(counter.count(serialize_table(piece, SerializationFormat::Plain)) <= 6);
        body.insert(body.end(), piece.rows.begin() + 1, piece.rows.end());
    }
    CHECK(body == std::vector<std::vector<std::string>>(table.rows.begin() + 1,
                                                        table.rows.end()));
}

TEST_CASE("split_table reports a header-plus-row that cannot fit") {
    WordCounter counter;
    Table table{{{"h1", "h2"}, {words_text(30, "big"), "x"}}};
    std::vector<std::string> warnings;
    auto pieces = split_table(table, 6, SerializationFormat::Plain, counter, &warnings);
    REQUIRE(pieces.size() == 1);
    CHECK(pieces[0].rows == table.rows);
    CHECK(!warnings.empty());
}

TEST_CASE("merge_elements packs greedily up to the limit") {
    WordCounter counter;
    std::vector<std::pair<int, std::string>> elements = {
        {0, words_text(800, "a")},
        {1, words_text(900, "b")},
        {2, words_text(700, "c")},
        {3, words_text(2400, "d")},
    };
    auto segments = merge_elements(elements, 2500, counter);
    REQUIRE(segments.size() == 2);
    CHECK(segments[0].source_element_ids == std::vector<int>{0, 1, 2});
    CHECK(segments[0].token_count == 2400);
    CHECK(segments[0].segment_index == 0);
    CHECK(segments[1].source_element_ids == std::vector<int>{3});
    CHECK(segments[1].token_count == 2400);
    CHECK(segments[1].segment_index == 1);
    // Element texts are joined with single newlines.
    CHECK(segments[0].text ==
          elements[0].second + "\n" + elements[1].second + "\n" + elements[2].second);
}

TEST_CASE("merge_elements keeps an oversized element alone") {
    WordCounter counter;
    std::vector<std::pair<int, std::string>> elements = {
        {0, words_text(10)},
        {1, words_text(4000, "huge")},
        {2, words_text(10, "z")},
    };
    auto segments = merge_elements(elements, 2500, counter);
    REQUIRE(segments.size() == 3);
    CHECK(segments[1].source_element_ids == std::vector<int>{1});
    CHECK(segments[1].token_count == 4000);
}

TEST_CASE("segment_document merges a small document into one segment") {
    HeuristicTokenCounter counter;
    SegmentationConfig config;
    config.counter = &counter;
    Document doc = testsupport::fixture_document();

    auto segments = segment_document(doc, config);
    REQUIRE(segments.size() == 1);
    CHECK(segments[0].segment_index == 0);
    CHECK(segments[0].source_element_ids == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(segments[0].token_count == counter.count(segments[0].text));
    CHECK(segments[0].text.find("Revenue of ACME for 2022Q4") != std::string::npos);
    // The table is serialized as plain rows inside the segment.
    CHECK(segments[0].text.find("Cash 2,500 2,400") != std::string::npos);
}

TEST_CASE("segment_document splits oversized elements and renumbers ids") {
    WordCounter counter;
    SegmentationConfig config;
    config.element_limit = 100;
    config.segment_limit = 150;
    config.counter = &counter;

    Document doc;
    doc.id = "big";
    doc.company = "c";
    doc.period = "p";
    doc.elements.push_back(Element{0, Paragraph{words_text(250, "a")}});
    doc.elements.push_back(Element{1, Paragraph{words_text(40, "b")}});
    Table table;
    table.rows.push_back({"h1", "h2"});
    for (int r = 0; r < 120; ++r) {
        table.rows.push_back({"x" + std::to_string(r), "y" + std::to_string(r)});
    }
    doc.elements.push_back(Element{2, std::move(table)});

    std::vector<std::string> warnings;
    auto segments = segment_document(doc, config, &warnings);
    CHECK(warnings.empty());
    REQUIRE(!segments.empty());

    std::vector<int> all_ids;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        CHECK(segments[i].segment_index == static_cast<int>(i));
        CHECK(segments[i].token_count <= config.segment_limit);
        CHECK(segments[i].token_count == counter.count(segments[i].text));
        all_ids.insert(all_ids.end(), segments[i].source_element_ids.begin(),
                       segments[i].source_element_ids.end());
    }
    // Post-split pieces are renumbered consecutively in document order.
    std::vector<int> expected(all_ids.size());
    std::iota(expected.begin(), expected.end(), 0);
    CHECK(all_ids == expected);
    CHECK(all_ids.size() > doc.elements.size());
}

TEST_CASE("segment_document rejects bad configuration and empty documents") {
    HeuristicTokenCounter counter;
    Document doc = testsupport::fixture_document();

    SegmentationConfig no_counter;
    CHECK_THROWS_AS(segment_document(doc, no_counter), ConfigError);

    SegmentationConfig inverted;
    inverted.counter = &counter;
    inverted.element_limit = 3000;
    inverted.segment_limit = 2500;
    CHECK_THROWS_AS(segment_document(doc, inverted), ConfigError);

    SegmentationConfig config;
    config.counter = &counter;
    Document empty;
    empty.id = "empty";
    CHECK_THROWS_AS(segment_document(empty, config), EmptyDocumentError);
}

TEST_CASE("table format changes the serialized segment text") {
    HeuristicTokenCounter counter;
    Document doc = testsupport::fixture_document();

    SegmentationConfig config;
    config.counter = &counter;
    config.format = SerializationFormat::Xml;
    auto segments = segment_document(doc, config);
    REQUIRE(segments.size() == 1);
    CHECK(segments[0].text.find("<cell>Cash</cell>") != std::string::npos);
}
