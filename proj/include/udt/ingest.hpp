#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "udt/record.hpp"

namespace udt {

enum class RawSourceFormat { plaintext, jsonl, crawl_record };

std::optional<RawSourceFormat> raw_format_from_name(std::string_view name);

struct SkipReport {
    uint64_t index = 0;  // document index within the input (1-based line for jsonl/crawl)
    std::string reason;
};

struct IngestResult {
    std::vector<Record> records;  // tier L0
    std::vector<SkipReport> skipped;
};

/// Converts raw input into archival L0 records.
///   plaintext    — the whole stream is one document; text kept byte-exact.
///   jsonl        — one object per line; "text" required, "url"/"snapshot"
///                  override the defaults when present.
///   crawl_record — JSONL envelope {url, snapshot, payload}.
/// Undecodable documents are skipped with a reason; the stream continues.
IngestResult ingest_raw(std::istream& input, RawSourceFormat format,
                        const SourceMeta& default_source);

struct IngestReport {
    uint64_t document_count = 0;
    uint64_t byte_count = 0;
    std::map<std::string, uint64_t> per_domain;
    uint64_t duplicate_id_count = 0;  // extra occurrences beyond the first per id
};

IngestReport archive_stats(const std::vector<Record>& records);
IngestReport archive_stats_for_shard(const std::filesystem::path& shard_path);

}  // namespace udt
