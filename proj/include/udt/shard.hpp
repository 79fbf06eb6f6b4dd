#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "udt/record.hpp"

namespace udt {

struct ShardManifest {
    std::string path;
    Tier tier = Tier::L0;
    uint64_t record_count = 0;
    uint64_t byte_count = 0;
    std::string checksum;  // 64-bit hex over concatenated record ids

    bool operator==(const ShardManifest&) const = default;
};

/// Serializes a record as one JSON line, schema-exact key order:
/// id, text, tier, source{url,snapshot,domain}, lang, scores, parents, ops, meta.
std::string record_to_json_line(const Record& r);

/// Parses one JSON line back into a Record. Throws udt::Error on malformed input.
Record record_from_json_line(std::string_view line);

/// Single-writer streaming shard output. Records must share one tier.
/// finish() writes <path>.manifest.json atomically (write + rename).
class ShardWriter {
public:
    explicit ShardWriter(const std::filesystem::path& path);
    ~ShardWriter();

    void add(const Record& r);
    ShardManifest finish();

private:
    std::filesystem::path path_;
    std::ofstream out_;
    bool have_tier_ = false;
    bool finished_ = false;
    Tier tier_ = Tier::L0;
    uint64_t count_ = 0;
    uint64_t bytes_ = 0;
    uint64_t checksum_state_;
};

ShardManifest write_shard(const std::vector<Record>& records, const std::filesystem::path& path);

struct LineError {
    uint64_t line_number = 0;  // 1-based
    std::string message;
};

struct ShardReadResult {
    std::vector<Record> records;
    std::vector<LineError> errors;
};

/// Reads a JSONL shard in file order; malformed lines are reported, not fatal.
/// Throws IoError if the file cannot be opened.
ShardReadResult read_shard(const std::filesystem::path& path);

ShardManifest read_manifest(const std::filesystem::path& shard_path);
void write_manifest_atomic(const ShardManifest& m, const std::filesystem::path& shard_path);

/// In-memory id-addressed view over a set of shards.
class RecordStore {
public:
    RecordStore() = default;

    /// Loads one shard file, or every *.jsonl under a directory (recursive).
    /// Returns the number of records loaded. First occurrence of an id wins.
    size_t load(const std::filesystem::path& path);

    void insert(Record r);

    const Record* find(std::string_view id) const;
    size_t size() const { return records_.size(); }

    const std::map<std::string, Record, std::less<>>& records() const { return records_; }

private:
    std::map<std::string, Record, std::less<>> records_;
};

}  // namespace udt
