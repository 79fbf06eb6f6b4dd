#include <doctest.h>
#include <nlohmann/json.hpp>

#include <sstream>

#include "support/fixtures.hpp"
#include "udt/hash.hpp"
#include "udt/html_text.hpp"
#include "udt/ingest.hpp"
#include "udt/unicode.hpp"

using namespace udt;

namespace {

SourceMeta default_source() {
    return SourceMeta{"https://default", "snap", Domain::web_en};
}

}  // namespace

TEST_CASE("plaintext ingestion is archival and lossless") {
    const std::string payload = "First line.\n\nSecond paragraph with trailing newline.\n";
    std::istringstream in(payload);
    auto result = ingest_raw(in, RawSourceFormat::plaintext, default_source());
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].text == payload);
    CHECK(result.records[0].tier == Tier::L0);
    CHECK(result.skipped.empty());
}

TEST_CASE("jsonl ingestion maps fields and skips bad documents") {
    std::string lines;
    for (int i = 0; i < 5; ++i) {
        lines += "{\"text\": \"doc " + std::to_string(i) + "\", \"url\": \"https://u/" +
                 std::to_string(i) + "\"}\n";
    }
    SUBCASE("five objects map urls") {
        std::istringstream in(lines);
        auto result = ingest_raw(in, RawSourceFormat::jsonl, default_source());
        REQUIRE(result.records.size() == 5);
        CHECK(result.records[2].source.url == "https://u/2");
        CHECK(result.records[2].source.snapshot == "snap");  // default retained
    }
    SUBCASE("a missing text field is skipped with a reason") {
        std::string with_bad = lines;
        with_bad.insert(0, "{\"url\": \"https://nobody\"}\n");
        std::istringstream in(with_bad);
        auto result = ingest_raw(in, RawSourceFormat::jsonl, default_source());
        CHECK(result.records.size() == 5);
        REQUIRE(result.skipped.size() == 1);
        CHECK(result.skipped[0].index == 1);
        CHECK(result.skipped[0].reason.find("text") != std::string::npos);
    }
    SUBCASE("malformed json line is skipped, stream continues") {
        std::string with_bad = "{oops\n" + lines;
        std::istringstream in(with_bad);
        auto result = ingest_raw(in, RawSourceFormat::jsonl, default_source());
        CHECK(result.records.size() == 5);
        CHECK(result.skipped.size() == 1);
    }
}

TEST_CASE("crawl_record envelope carries url and snapshot") {
    std::string lines =
        "{\"url\": \"https://c/1\", \"snapshot\": \"2024-33\", \"payload\": \"body one\"}\n"
        "{\"url\": \"https://c/2\", \"payload\": \"missing snapshot\"}\n";
    std::istringstream in(lines);
    auto result = ingest_raw(in, RawSourceFormat::crawl_record, default_source());
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].source.url == "https://c/1");
    CHECK(result.records[0].source.snapshot == "2024-33");
    CHECK(result.records[0].text == "body one");
    CHECK(result.skipped.size() == 1);
}

TEST_CASE("archival fidelity: ingested texts reconstruct the input exactly") {
    hash::Rng64 rng(11);
    std::string concat;
    std::string lines;
    for (int i = 0; i < 40; ++i) {
        std::string text = testing::word_salad(rng, 5 + rng.below(30), 50, "w");
        concat += text;
        lines += "{\"text\": " + nlohmann::json(text).dump() + "}\n";
    }
    std::istringstream in(lines);
    auto result = ingest_raw(in, RawSourceFormat::jsonl, default_source());
    std::string out;
    for (const auto& r : result.records) {
        out += r.text;
    }
    CHECK(out == concat);
}

TEST_CASE("extract_text block rules, script removal, entities") {
    CHECK(extract_text("<p>a</p><p>b</p>") == "a\nb");
    CHECK(extract_text("<script>x=1</script>hi") == "hi");
    CHECK(extract_text("&amp;&lt;") == "&<");
    CHECK(extract_text("<style>p { color: red }</style>body") == "body");
    CHECK(extract_text("<ul><li>one</li><li>two</li></ul>") == "one\ntwo");
    CHECK(extract_text("line<br>break") == "line\nbreak");
    CHECK(extract_text("<!-- note -->visible") == "visible");
    CHECK(extract_text("<div class=\"x\">in div</div>") == "in div");
    CHECK(extract_text("a &#60; b &#x3C; c") == "a < b < c");
    CHECK(extract_text("5 &lt; 7 and x &gt; y") == "5 < 7 and x > y");
    CHECK(extract_text("caf&eacute;") == "café");
    CHECK(extract_text("&unknownentity; stays") == "&unknownentity; stays");
    CHECK(extract_text("a < b") == "a < b");  // bare '<' is not a tag
    CHECK(extract_text("<SCRIPT>hidden</SCRIPT>shown") == "shown");
}

TEST_CASE("extract_text idempotence and script/style absence on generated markup") {
    hash::Rng64 rng(23);
    const char* tags[] = {"p", "div", "li", "span", "em", "h2", "tr", "table"};
    for (int iter = 0; iter < 400; ++iter) {
        std::string html;
        const size_t parts = 1 + rng.below(30);
        for (size_t i = 0; i < parts; ++i) {
            switch (rng.below(8)) {
                case 0: {
                    const char* tag = tags[rng.below(8)];
                    html += "<" + std::string(tag) + ">";
                    break;
                }
                case 1: {
                    const char* tag = tags[rng.below(8)];
                    html += "</" + std::string(tag) + ">";
                    break;
                }
                case 2:
                    html += "<script>var x = '" + std::to_string(rng.next() % 100) +
                            "';</script>";
                    break;
                case 3:
                    html += "<style>body { margin: 0 }</style>";
                    break;
                case 4:
                    html += "<!-- comment " + std::to_string(rng.below(10)) + " -->";
                    break;
                case 5:
                    html += "&amp; &lt; &gt; &#65;";
                    break;
                default:
                    html += testing::word_salad(rng, 1 + rng.below(8), 40, "t") + " ";
            }
        }
        std::string once = extract_text(html);
        CHECK(once.find("<script") == std::string::npos);
        CHECK(once.find("<style") == std::string::npos);
        const bool decodable_left =
            once.find('<') != std::string::npos || once.find('&') != std::string::npos;
        if (!decodable_left) {
            CHECK(extract_text(once) == once);
        }
    }
}

TEST_CASE("archive_stats counts documents, bytes, domains, duplicate ids") {
    SUBCASE("empty shard") {
        auto report = archive_stats({});
        CHECK(report.document_count == 0);
        CHECK(report.byte_count == 0);
        CHECK(report.per_domain.empty());
        CHECK(report.duplicate_id_count == 0);
    }
    SUBCASE("duplicate ids counted as extra occurrences") {
        std::vector<Record> records;
        auto a = testing::l0_record("same", "https://a");
        for (int i = 0; i < 8; ++i) {
            records.push_back(testing::l0_record("doc " + std::to_string(i), "https://u"));
        }
        records.push_back(a);
        records.push_back(a);
        auto report = archive_stats(records);
        CHECK(report.document_count == 10);
        CHECK(report.duplicate_id_count == 1);
    }
    SUBCASE("per-domain counts") {
        std::vector<Record> records;
        for (int i = 0; i < 3; ++i) {
            records.push_back(
                testing::l0_record("e" + std::to_string(i), "https://e", "s", Domain::web_en));
        }
        for (int i = 0; i < 2; ++i) {
            records.push_back(
                testing::l0_record("m" + std::to_string(i), "https://m", "s", Domain::math));
        }
        auto report = archive_stats(records);
        CHECK(report.per_domain.at("web_en") == 3);
        CHECK(report.per_domain.at("math") == 2);
        CHECK(report.byte_count == 3 * 2 + 2 * 2);
    }
}
