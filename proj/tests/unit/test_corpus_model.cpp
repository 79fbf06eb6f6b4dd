#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "support/fixtures.hpp"
#include "udt/error.hpp"
#include "udt/hash.hpp"
#include "udt/lineage.hpp"
#include "udt/record.hpp"
#include "udt/shard.hpp"
#include "udt/unicode.hpp"

using namespace udt;

namespace {

OpStamp stamp(const std::string& name, uint64_t params = 1) {
    OpStamp op;
    op.name = name;
    op.version = "1.0.0";
    op.params_hash = params;
    op.timestamp = 1700000000;
    return op;
}

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("udt_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("new_record ids are deterministic and source-sensitive") {
    SourceMeta source{"https://u", "s", Domain::web_en};
    auto a = new_record("hello", source);
    auto b = new_record("hello", source);
    CHECK(a.id == b.id);
    CHECK(a.id.size() == 32);
    for (char c : a.id) {
        CHECK(((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')));
    }

    auto c = new_record("hello", SourceMeta{"https://u1", "s", Domain::web_en});
    auto d = new_record("hello", SourceMeta{"https://u2", "s", Domain::web_en});
    CHECK(c.id != d.id);

    auto empty = new_record("", source);
    CHECK(empty.tier == Tier::L0);
    CHECK(empty.text.empty());
    CHECK(empty.parents.empty());
}

TEST_CASE("new_record rejects invalid UTF-8") {
    SourceMeta source{"https://u", "", Domain::other};
    CHECK_THROWS_AS(new_record("ok \xff\xfe bad", source), EncodingError);
}

TEST_CASE("promote builds lineage and enforces tier order") {
    auto l0 = testing::l0_record("base text", "https://p");
    auto l1 = promote(l0, Tier::L1, stamp("clean"), "cleaned text");
    CHECK(l1.tier == Tier::L1);
    CHECK(l1.parents == std::vector<std::string>{l0.id});
    CHECK(l1.ops.size() == 1);
    CHECK(l1.ops[0].name == "clean");

    auto l2 = promote(l1, Tier::L2, stamp("select"), l1.text);
    CHECK(l2.tier == Tier::L2);
    CHECK(l2.ops.size() == 2);

    CHECK_THROWS_AS(promote(l2, Tier::L1, stamp("bad"), "x"), TierRegressionError);

    // Same-tier re-edit appends the op.
    auto l2b = promote(l2, Tier::L2, stamp("re-edit"), "edited");
    CHECK(l2b.tier == Tier::L2);
    CHECK(l2b.ops.size() == 3);
    CHECK(l2b.parents == std::vector<std::string>{l2.id});
}

TEST_CASE("derived ids depend on parents, op and text") {
    auto l0a = testing::l0_record("a", "https://a");
    auto l0b = testing::l0_record("b", "https://b");
    auto x = promote(l0a, Tier::L1, stamp("op"), "same");
    auto y = promote(l0b, Tier::L1, stamp("op"), "same");
    CHECK(x.id != y.id);
    auto z1 = promote(l0a, Tier::L1, stamp("op"), "same");
    CHECK(x.id == z1.id);
    auto z2 = promote(l0a, Tier::L1, stamp("op", 2), "same");
    CHECK(x.id != z2.id);
}

TEST_CASE("write_shard / read_shard round trip") {
    auto dir = temp_dir("shard_rt");
    std::vector<Record> records;
    for (int i = 0; i < 3; ++i) {
        auto r = testing::record_at_tier("text " + std::to_string(i), "https://u" + std::to_string(i),
                                         Tier::L1);
        r.scores["quality"] = 0.25 * i;
        r.lang = "en";
        r.meta["k"] = "v";
        records.push_back(r);
    }
    auto manifest = write_shard(records, dir / "s.jsonl");
    CHECK(manifest.record_count == 3);
    CHECK(manifest.tier == Tier::L1);

    auto result = read_shard(dir / "s.jsonl");
    REQUIRE(result.errors.empty());
    REQUIRE(result.records.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(result.records[i] == records[i]);
    }

    auto loaded = read_manifest(dir / "s.jsonl");
    CHECK(loaded == manifest);
}

TEST_CASE("write_shard rejects mixed tiers and handles the empty shard") {
    auto dir = temp_dir("shard_mixed");
    auto manifest = write_shard({}, dir / "empty.jsonl");
    CHECK(manifest.record_count == 0);
    CHECK(manifest.byte_count == 0);
    CHECK(manifest.checksum == hash::hex64(hash::kFnvOffset));

    std::vector<Record> mixed{testing::record_at_tier("a", "https://a", Tier::L1),
                              testing::record_at_tier("b", "https://b", Tier::L2)};
    CHECK_THROWS_AS(write_shard(mixed, dir / "m.jsonl"), ShardTierError);
}

TEST_CASE("read_shard reports malformed lines with their line numbers") {
    auto dir = temp_dir("shard_corrupt");
    auto path = dir / "c.jsonl";
    {
        std::ofstream out(path);
        for (int i = 0; i < 10; ++i) {
            if (i == 4) {
                out << "{not json\n";
            } else {
                out << record_to_json_line(
                           testing::l0_record("doc " + std::to_string(i), "https://u"))
                    << "\n";
            }
        }
    }
    auto result = read_shard(path);
    CHECK(result.records.size() == 9);
    REQUIRE(result.errors.size() == 1);
    CHECK(result.errors[0].line_number == 5);

    CHECK_THROWS_AS(read_shard(dir / "missing.jsonl"), IoError);

    auto empty_path = dir / "empty.jsonl";
    std::ofstream(empty_path).close();
    auto empty = read_shard(empty_path);
    CHECK(empty.records.empty());
    CHECK(empty.errors.empty());
}

TEST_CASE("record JSONL schema is key-exact") {
    auto r = testing::l0_record("t", "https://u", "snap", Domain::math);
    auto line = record_to_json_line(r);
    const std::string expected_prefix = "{\"id\":\"" + r.id + "\",\"text\":\"t\",\"tier\":\"L0\","
                                        "\"source\":{\"url\":\"https://u\",\"snapshot\":\"snap\","
                                        "\"domain\":\"math\"},\"lang\":null,\"scores\":{},"
                                        "\"parents\":[],\"ops\":[],\"meta\":{}}";
    CHECK(line == expected_prefix);
}

TEST_CASE("shard round trip is identity on generated unicode content") {
    auto dir = temp_dir("shard_prop");
    hash::Rng64 rng(7);
    std::vector<Record> records;
    for (int i = 0; i < 60; ++i) {
        std::string text;
        const size_t len = rng.below(80);
        for (size_t k = 0; k < len; ++k) {
            switch (rng.below(6)) {
                case 0: unicode::append(text, 0x1F600 + static_cast<uint32_t>(rng.below(60))); break;
                case 1: unicode::append(text, 0x4E00 + static_cast<uint32_t>(rng.below(500))); break;
                case 2: unicode::append(text, 0xE9); break;
                case 3: text += '\n'; break;
                case 4: text += '"'; break;
                default: text += static_cast<char>('a' + rng.below(26));
            }
        }
        records.push_back(testing::l0_record(text, "https://u/" + std::to_string(i)));
    }
    write_shard(records, dir / "u.jsonl");
    auto result = read_shard(dir / "u.jsonl");
    REQUIRE(result.errors.empty());
    REQUIRE(result.records.size() == records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        CHECK(result.records[i].text == records[i].text);
        CHECK(result.records[i].id == records[i].id);
    }
}

TEST_CASE("trace_lineage walks to L0 and reports danglers") {
    RecordStore store;
    auto l0 = testing::l0_record("root", "https://r");
    auto l1 = promote(l0, Tier::L1, stamp("f"), "root cleaned");
    auto l2 = promote(l1, Tier::L2, stamp("s"), l1.text);
    auto l3 = promote(l2, Tier::L3, stamp("r"), "rewritten body");
    store.insert(l0);
    store.insert(l1);
    store.insert(l2);
    store.insert(l3);

    SUBCASE("an L0 record is its own lineage") {
        auto lineage = trace_lineage(l0.id, store);
        CHECK(lineage.nodes.size() == 1);
        CHECK(lineage.nodes[0].id == l0.id);
    }
    SUBCASE("a four-tier chain comes back in tier order") {
        auto lineage = trace_lineage(l3.id, store);
        REQUIRE(lineage.nodes.size() == 4);
        CHECK(lineage.nodes[0].tier == Tier::L0);
        CHECK(lineage.nodes[1].tier == Tier::L1);
        CHECK(lineage.nodes[2].tier == Tier::L2);
        CHECK(lineage.nodes[3].tier == Tier::L3);
        CHECK(lineage.roots() == std::vector<std::string>{l0.id});
        // Tier monotonicity along every edge.
        for (const auto& node : lineage.nodes) {
            for (const auto& pid : node.parents) {
                const Record* parent = store.find(pid);
                REQUIRE(parent != nullptr);
                CHECK(parent->tier <= node.tier);
            }
        }
    }
    SUBCASE("a deleted parent is a broken-lineage error naming the id") {
        RecordStore partial;
        partial.insert(l3);
        partial.insert(l2);
        // l1 missing
        partial.insert(l0);
        try {
            trace_lineage(l3.id, partial);
            FAIL("expected BrokenLineageError");
        } catch (const BrokenLineageError& e) {
            CHECK(e.missing_id() == l1.id);
        }
    }
    SUBCASE("unknown root id") {
        CHECK_THROWS_AS(trace_lineage("00000000000000000000000000000000", store),
                        BrokenLineageError);
    }
    SUBCASE("diamond ancestry is traced once per node") {
        auto side = promote(l0, Tier::L1, stamp("g"), "other cleaning");
        auto merged = promote(l1, Tier::L2, stamp("merge"), "merged", {side.id});
        RecordStore s2;
        s2.insert(l0);
        s2.insert(l1);
        s2.insert(side);
        s2.insert(merged);
        auto lineage = trace_lineage(merged.id, s2);
        CHECK(lineage.nodes.size() == 4);
        std::set<std::string> ids;
        for (const auto& n : lineage.nodes) {
            CHECK(ids.insert(n.id).second);  // acyclic: no id revisited
        }
    }
}
