#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "udt/record.hpp"

namespace udt {

/// Set of 64-bit word n-gram hashes.
struct ShingleSet {
    std::unordered_set<uint64_t> hashes;
};

/// MinHash signature: values[i] is the minimum of the i-th hash function
/// over the shingle set. Per-slot collision probability equals the Jaccard
/// similarity of the underlying sets.
struct MinHashSignature {
    std::vector<uint64_t> values;
    uint64_t seed = 0;
};

struct DedupConfig {
    uint64_t shingle_n = 5;
    uint64_t num_hashes = 112;
    uint64_t bands = 14;
    uint64_t rows = 8;
    uint64_t seed = 0;
    double threshold = 0.75;
    // Verify candidates with exact shingle Jaccard instead of the signature
    // estimate (oracle mode; needs shingle sets kept in memory).
    bool verify_exact = false;
};

enum class DedupScope { global, per_snapshot };

/// Exact duplicate removal on normalized text (Unicode-whitespace trim).
/// First occurrence in stream order is kept; later copies map to it.
struct ExactDedupResult {
    std::vector<Record> unique;
    std::map<std::string, std::string> dup_map;  // dropped id -> kept id
};

ExactDedupResult exact_dedup(const std::vector<Record>& records);

/// Lowercased word n-grams hashed to 64 bits, set semantics.
/// Fewer than n words yields the empty set.
ShingleSet shingle(const std::string& text, uint64_t n = 5);

/// values[i] = min over shingles of h_i(shingle); h_i keyed from (seed, i).
/// Empty input yields the all-max sentinel signature.
MinHashSignature minhash_signature(const ShingleSet& s, uint64_t k = 112, uint64_t seed = 0);

/// Fraction of agreeing slots. Throws on length or seed mismatch.
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

/// Banded LSH: a pair is a candidate iff the two signatures agree on every
/// slot of at least one band. Emitted pairs are re-checked slot-by-slot, so
/// band-key hash collisions never leak through.
std::set<std::pair<std::string, std::string>> lsh_candidates(
    const std::map<std::string, MinHashSignature>& sigs, uint64_t bands = 14, uint64_t rows = 8);

struct NearDedupReport {
    uint64_t input = 0;
    uint64_t kept = 0;
    uint64_t duplicates = 0;
    uint64_t candidate_pairs = 0;
    uint64_t verified_pairs = 0;
    uint64_t clusters = 0;  // components with >1 member
};

struct NearDedupResult {
    std::vector<Record> kept;
    std::map<std::string, std::string> dup_map;
    NearDedupReport report;
};

/// MinHash-LSH near-duplicate removal. Candidate pairs are verified at
/// cfg.threshold; connected components collapse to their earliest member in
/// stream order. per_snapshot scope never compares across snapshot ids and
/// requires every record to carry one.
NearDedupResult dedup_near(const std::vector<Record>& records, DedupScope scope,
                           const DedupConfig& cfg = {});

}  // namespace udt
