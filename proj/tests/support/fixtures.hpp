#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "udt/hash.hpp"
#include "udt/record.hpp"

namespace udt::testing {

/// Deterministic English-looking prose: `sentences` sentences of 6-14 words,
/// wrapped into lines of a few sentences each, blank line between paragraphs.
std::string english_prose(hash::Rng64& rng, size_t sentences);

/// Space-joined words drawn from a small vocabulary ("w<i>") of size
/// `vocab`; used for shingling/classifier corpora.
std::string word_salad(hash::Rng64& rng, size_t words, size_t vocab, const std::string& prefix);

/// Replaces `count` words (whitespace tokens) at deterministic positions.
std::string mutate_words(const std::string& text, hash::Rng64& rng, size_t count);

Record l0_record(const std::string& text, const std::string& url,
                 const std::string& snapshot = "2024-10", Domain domain = Domain::web_en);

/// Record lifted to an arbitrary tier through dummy promotions (tests that
/// need an L1/L2 input without running the real pipeline).
Record record_at_tier(const std::string& text, const std::string& url, Tier tier);

struct E2eFixture {
    std::vector<std::string> raw_jsonl_lines;  // ingestable corpus
    std::vector<std::string> pos_seed_texts;   // classifier seeds
    std::vector<std::string> neg_seed_texts;
    size_t good_docs = 0;
    size_t junk_docs = 0;
    size_t near_dup_docs = 0;
};

/// 200-document corpus with planted near-duplicates, junk documents that the
/// L1 filters reject, and classifier seed sets.
E2eFixture make_e2e_fixture(uint64_t seed);

}  // namespace udt::testing
