#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace udt {

/// Data quality tier. Total order L0 < L1 < L2 < L3 < L4.
enum class Tier : uint8_t { L0 = 0, L1 = 1, L2 = 2, L3 = 3, L4 = 4 };

std::string_view tier_name(Tier t);
std::optional<Tier> tier_from_name(std::string_view name);

enum class Domain : uint8_t { web_en, web_zh, math, code, other };

std::string_view domain_name(Domain d);
std::optional<Domain> domain_from_name(std::string_view name);

struct SourceMeta {
    std::string url;
    std::string snapshot;  // crawl snapshot id; empty for non-crawl sources
    Domain domain = Domain::other;

    bool operator==(const SourceMeta&) const = default;
};

/// One applied operator, for lineage audit.
struct OpStamp {
    std::string name;
    std::string version;       // semver
    uint64_t params_hash = 0;  // deterministic from the operator's configuration
    int64_t timestamp = 0;     // UTC seconds

    bool operator==(const OpStamp&) const = default;
};

/// One document. Immutable value; safe to share between workers.
struct Record {
    std::string id;  // 32 lowercase hex chars, content-derived
    std::string text;
    Tier tier = Tier::L0;
    SourceMeta source;
    std::string lang;  // ISO-639-1; empty = unset
    std::map<std::string, double> scores;
    std::vector<std::string> parents;  // ordered parent record ids
    std::vector<OpStamp> ops;          // ordered operator chain
    std::map<std::string, std::string> meta;

    bool operator==(const Record&) const = default;
};

/// Content-derived id for an L0 record: first 128 bits of SHA-256 over a
/// length-prefixed encoding of (url, snapshot, payload bytes).
std::string record_id_l0(std::string_view text, const SourceMeta& source);

/// Id for a derived (L1+) record: length-prefixed (parent ids, op name,
/// op params hash, output text).
std::string record_id_derived(const std::vector<std::string>& parents, const OpStamp& op,
                              std::string_view text);

/// Registers raw content as a tier-L0 record. Identical (text, source)
/// yields the identical id. Throws EncodingError on invalid UTF-8.
Record new_record(std::string text, SourceMeta source);

/// Derives a child record at `new_tier` (>= record.tier) with a fresh
/// deterministic id, parents = [record.id] ++ extra_parents and the op
/// appended to the chain. Same-tier promotion re-edits in place.
/// Throws TierRegressionError if new_tier < record.tier.
Record promote(const Record& record, Tier new_tier, const OpStamp& op, std::string new_text,
               const std::vector<std::string>& extra_parents = {});

/// Hash of an operator's configuration (canonical JSON text) for OpStamp.
uint64_t op_params_hash(std::string_view canonical_config);

}  // namespace udt
