#include "support/fixtures.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

namespace udt::testing {

namespace {

const char* kVocab[] = {
    "river",    "stone",    "window",   "garden",   "winter",  "library", "coffee",
    "bridge",   "engine",   "soup",     "bread",    "street",  "morning", "evening",
    "student",  "teacher",  "history",  "science",  "measure", "pattern", "signal",
    "quiet",    "warm",     "cold",     "early",    "late",    "long",    "short",
    "simple",   "careful",  "electric", "wooden",   "gentle",  "steady",  "bright",
    "market",   "village",  "mountain", "valley",   "harbor",  "weather", "journey",
    "letter",   "number",   "question", "answer",   "problem", "method",  "result",
    "evidence", "practice", "balance",  "machine",  "ticket",  "kitchen", "teacup",
    "walks",    "reads",    "builds",   "carries",  "changes", "follows", "repeats",
    "improves", "collects", "explains", "observes", "records", "travels", "returns",
};
constexpr size_t kVocabSize = sizeof(kVocab) / sizeof(kVocab[0]);

std::string sentence(hash::Rng64& rng) {
    const size_t len = 6 + rng.below(9);
    std::string s;
    for (size_t i = 0; i < len; ++i) {
        std::string word = kVocab[rng.below(kVocabSize)];
        if (i == 0) {
            word[0] = static_cast<char>(word[0] - 'a' + 'A');
        }
        if (i > 0) {
            s += ' ';
        }
        s += word;
    }
    s += '.';
    return s;
}

}  // namespace

std::string english_prose(hash::Rng64& rng, size_t sentences) {
    std::string out;
    size_t in_line = 0;
    size_t line_quota = 2 + rng.below(2);
    size_t lines_in_para = 0;
    for (size_t i = 0; i < sentences; ++i) {
        if (in_line == line_quota) {
            out += '\n';
            in_line = 0;
            line_quota = 2 + rng.below(2);
            if (++lines_in_para == 3 && i + 2 < sentences) {
                out += '\n';
                lines_in_para = 0;
            }
        } else if (i > 0) {
            out += ' ';
        }
        out += sentence(rng);
        ++in_line;
    }
    return out;
}

std::string word_salad(hash::Rng64& rng, size_t words, size_t vocab, const std::string& prefix) {
    std::string out;
    for (size_t i = 0; i < words; ++i) {
        if (i > 0) {
            out += ' ';
        }
        out += prefix + std::to_string(rng.below(vocab));
    }
    return out;
}

std::string mutate_words(const std::string& text, hash::Rng64& rng, size_t count) {
    std::vector<std::string> words;
    std::stringstream ss(text);
    std::string w;
    while (ss >> w) {
        words.push_back(w);
    }
    for (size_t i = 0; i < count && !words.empty(); ++i) {
        words[rng.below(words.size())] = "changed" + std::to_string(rng.next() % 1000);
    }
    std::string out;
    for (size_t i = 0; i < words.size(); ++i) {
        if (i > 0) {
            out += ' ';
        }
        out += words[i];
    }
    return out;
}

Record l0_record(const std::string& text, const std::string& url, const std::string& snapshot,
                 Domain domain) {
    SourceMeta source;
    source.url = url;
    source.snapshot = snapshot;
    source.domain = domain;
    return new_record(text, source);
}

Record record_at_tier(const std::string& text, const std::string& url, Tier tier) {
    Record r = l0_record(text, url);
    int level = 0;
    while (r.tier < tier) {
        ++level;
        OpStamp op;
        op.name = "test_lift";
        op.version = "1.0.0";
        op.params_hash = static_cast<uint64_t>(level);
        op.timestamp = 0;
        r = promote(r, static_cast<Tier>(level), op, text);
    }
    return r;
}

E2eFixture make_e2e_fixture(uint64_t seed) {
    E2eFixture fx;
    hash::Rng64 rng(seed);
    std::vector<std::pair<std::string, std::string>> docs;  // (text, url)

    // 110 good documents.
    std::vector<std::string> good_texts;
    for (size_t i = 0; i < 110; ++i) {
        std::string text = english_prose(rng, 10 + rng.below(8));
        good_texts.push_back(text);
        docs.emplace_back(text, "https://example.org/good/" + std::to_string(i));
        ++fx.good_docs;
    }
    // 25 near-duplicates of good docs (2 words changed).
    for (size_t i = 0; i < 25; ++i) {
        std::string text = mutate_words(good_texts[i], rng, 2);
        docs.emplace_back(text, "https://example.org/neardup/" + std::to_string(i));
        ++fx.near_dup_docs;
    }
    // 5 exact duplicates under different urls.
    for (size_t i = 0; i < 5; ++i) {
        docs.emplace_back(good_texts[30 + i], "https://example.org/copy/" + std::to_string(i));
    }
    // 25 too-short documents.
    for (size_t i = 0; i < 25; ++i) {
        docs.emplace_back("Tiny note " + std::to_string(i) + ".",
                          "https://example.org/short/" + std::to_string(i));
        ++fx.junk_docs;
    }
    // 15 documents of unpunctuated short lines.
    for (size_t i = 0; i < 15; ++i) {
        std::string text;
        for (int line = 0; line < 14; ++line) {
            text += "nav item " + std::to_string(rng.below(40)) + "\n";
        }
        docs.emplace_back(text, "https://example.org/nav/" + std::to_string(i));
        ++fx.junk_docs;
    }
    // 10 documents dominated by one repeated line.
    for (size_t i = 0; i < 10; ++i) {
        std::string text;
        std::string repeated = sentence(rng);
        for (int line = 0; line < 12; ++line) {
            text += repeated + "\n";
        }
        docs.emplace_back(text, "https://example.org/dup/" + std::to_string(i));
        ++fx.junk_docs;
    }
    // 10 good documents polluted with blacklist lines (still kept after C4).
    for (size_t i = 0; i < 10; ++i) {
        std::string text = "Please enable JavaScript to continue\n" + english_prose(rng, 12) +
                           "\nRead our cookie policy here\n";
        docs.emplace_back(text, "https://example.org/noisy/" + std::to_string(i));
        ++fx.good_docs;
    }

    const char* snapshots[] = {"2024-10", "2024-18", "2024-26"};
    for (size_t i = 0; i < docs.size(); ++i) {
        nlohmann::ordered_json j;
        j["text"] = docs[i].first;
        j["url"] = docs[i].second;
        j["snapshot"] = snapshots[i % 3];
        fx.raw_jsonl_lines.push_back(j.dump());
    }

    for (size_t i = 0; i < 200; ++i) {
        fx.pos_seed_texts.push_back(english_prose(rng, 8));
        fx.neg_seed_texts.push_back(word_salad(rng, 60, 400, "junk"));
    }
    return fx;
}

}  // namespace udt::testing
