#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "udt/record.hpp"

namespace udt {

struct Chunk {
    std::string chunk_id;   // "<record_id>#<seq>"
    std::string record_id;
    uint64_t start = 0;     // byte offsets into the source text
    uint64_t end = 0;
    std::string text;
};

/// Splits a record into retrieval chunks: paragraphs greedily packed up to
/// max_chunk_chars (code points); over-long paragraphs split at sentence
/// boundaries, then hard-split. Chunk spans partition the text (separators
/// between spans are the consumed paragraph breaks).
std::vector<Chunk> chunk_document(const Record& record, uint64_t max_chunk_chars = 1200);

struct Posting {
    uint32_t chunk_index = 0;  // into TermIndex::chunk_ids, ascending
    uint32_t term_frequency = 0;
};

/// Term-based inverted index with BM25 scoring support.
class TermIndex {
public:
    void add_chunk(const Chunk& chunk);
    static TermIndex build(const std::vector<Chunk>& chunks);

    /// BM25 (k1 = 1.2, b = 0.75); ties broken by ascending chunk id; at most
    /// k results, all with score > 0.
    std::vector<std::pair<std::string, double>> query(const std::vector<std::string>& terms,
                                                      size_t k) const;

    size_t chunk_count() const { return chunk_ids_.size(); }
    const std::vector<std::string>& chunk_ids() const { return chunk_ids_; }
    const std::map<std::string, std::vector<Posting>>& postings() const { return postings_; }
    double avg_doc_length() const;

    void save(const std::filesystem::path& path) const;
    static TermIndex load(const std::filesystem::path& path);

    static constexpr double kBm25K1 = 1.2;
    static constexpr double kBm25B = 0.75;

private:
    std::vector<std::string> chunk_ids_;       // insertion order
    std::vector<uint32_t> doc_lengths_;        // tokens per chunk
    std::map<std::string, std::vector<Posting>> postings_;
};

enum class FactStatus { unverified, verified, contradicted };

std::string_view fact_status_name(FactStatus s);

struct FactRecord {
    std::string subject;
    std::string relation;
    std::string object;
    std::string evidence;  // chunk id
    FactStatus status = FactStatus::unverified;

    bool operator==(const FactRecord&) const = default;
};

struct Triple {
    std::string subject;
    std::string relation;
    std::string object;

    auto operator<=>(const Triple&) const = default;
};

/// Casefolded, whitespace-collapsed triple for trusted-store matching.
Triple normalize_triple(const Triple& t);

/// Trusted reference triples loaded from JSONL lines {"s","r","o"}.
class TrustedStore {
public:
    void add(const Triple& t);
    static TrustedStore load_jsonl(const std::filesystem::path& path);

    bool contains(const Triple& normalized) const;
    /// Objects recorded for a normalized (subject, relation).
    std::vector<std::string> objects_for(const std::string& subject,
                                         const std::string& relation) const;

private:
    std::set<Triple> triples_;  // normalized
};

/// Registered facts keyed to evidence chunks.
class FactStore {
public:
    void add_chunk_id(const std::string& chunk_id);
    bool has_chunk(const std::string& chunk_id) const;

    /// Registers (s, r, o) with evidence; idempotent on the full quadruple.
    /// Throws on a dangling evidence chunk id.
    FactRecord& register_fact(const std::string& subject, const std::string& relation,
                              const std::string& object, const std::string& evidence);

    const std::vector<FactRecord>& facts() const { return facts_; }
    std::vector<FactRecord>& facts() { return facts_; }

private:
    std::set<std::string> chunk_ids_;
    std::vector<FactRecord> facts_;
};

/// unverified -> verified when the normalized triple is in the trusted
/// store; -> contradicted when the store holds a different object for the
/// same (subject, relation); otherwise stays unverified. Re-verifying a
/// terminal-status fact throws.
FactRecord verify_fact(const FactRecord& fact, const TrustedStore& trusted);

}  // namespace udt
