#include "udt/ingest.hpp"

#include <nlohmann/json.hpp>

#include <set>
#include <sstream>

#include "udt/error.hpp"
#include "udt/shard.hpp"
#include "udt/unicode.hpp"

namespace udt {

std::optional<RawSourceFormat> raw_format_from_name(std::string_view name) {
    if (name == "plaintext") return RawSourceFormat::plaintext;
    if (name == "jsonl") return RawSourceFormat::jsonl;
    if (name == "crawl" || name == "crawl_record") return RawSourceFormat::crawl_record;
    return std::nullopt;
}

namespace {

void ingest_plaintext(std::istream& input, const SourceMeta& source, IngestResult& out) {
    std::ostringstream buf;
    buf << input.rdbuf();
    std::string text = buf.str();
    if (!unicode::is_valid_utf8(text)) {
        out.skipped.push_back({1, "invalid UTF-8"});
        return;
    }
    out.records.push_back(new_record(std::move(text), source));
}

void ingest_json_lines(std::istream& input, RawSourceFormat format,
                       const SourceMeta& default_source, IngestResult& out) {
    std::string line;
    uint64_t line_no = 0;
    const bool crawl = format == RawSourceFormat::crawl_record;
    const char* text_key = crawl ? "payload" : "text";
    while (std::getline(input, line)) {
        ++line_no;
        if (unicode::trim(line).empty()) {
            continue;
        }
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            out.skipped.push_back({line_no, "malformed JSON object"});
            continue;
        }
        if (!j.contains(text_key) || !j[text_key].is_string()) {
            out.skipped.push_back({line_no, std::string("missing \"") + text_key + "\" field"});
            continue;
        }
        SourceMeta source = default_source;
        if (crawl) {
            if (!j.contains("url") || !j["url"].is_string() || !j.contains("snapshot") ||
                !j["snapshot"].is_string()) {
                out.skipped.push_back({line_no, "crawl record missing url/snapshot"});
                continue;
            }
            source.url = j["url"].get<std::string>();
            source.snapshot = j["snapshot"].get<std::string>();
        } else {
            if (j.contains("url") && j["url"].is_string()) {
                source.url = j["url"].get<std::string>();
            }
            if (j.contains("snapshot") && j["snapshot"].is_string()) {
                source.snapshot = j["snapshot"].get<std::string>();
            }
        }
        std::string text = j[text_key].get<std::string>();
        if (!unicode::is_valid_utf8(text)) {
            out.skipped.push_back({line_no, "invalid UTF-8"});
            continue;
        }
        out.records.push_back(new_record(std::move(text), std::move(source)));
    }
}

}  // namespace

IngestResult ingest_raw(std::istream& input, RawSourceFormat format,
                        const SourceMeta& default_source) {
    IngestResult out;
    if (format == RawSourceFormat::plaintext) {
        ingest_plaintext(input, default_source, out);
    } else {
        ingest_json_lines(input, format, default_source, out);
    }
    return out;
}

IngestReport archive_stats(const std::vector<Record>& records) {
    IngestReport report;
    std::map<std::string, uint64_t> seen;
    for (const auto& r : records) {
        ++report.document_count;
        report.byte_count += r.text.size();
        ++report.per_domain[std::string(domain_name(r.source.domain))];
        auto& n = seen[r.id];
        if (n > 0) {
            ++report.duplicate_id_count;
        }
        ++n;
    }
    return report;
}

IngestReport archive_stats_for_shard(const std::filesystem::path& shard_path) {
    auto result = read_shard(shard_path);
    return archive_stats(result.records);
}

}  // namespace udt
