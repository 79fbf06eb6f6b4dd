#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "udt/record.hpp"

namespace udt {

struct FilterConfig {
    double line_end_punct_max = 0.12;
    double dup_line_char_min = 0.10;
    double short_line_ratio_max = 0.67;
    uint64_t short_line_len = 30;  // chars
    uint64_t min_doc_chars = 200;
    uint64_t max_doc_chars = 1000000;
    std::vector<std::string> blacklist_phrases{"javascript", "cookie policy"};
    std::vector<uint32_t> terminal_punct{'.', '!', '?', '"', '\''};
    // Lines matching any of these exactly are dropped by repair_format.
    std::vector<std::string> boilerplate_line_patterns{
        "^[0-9]{1,4}$",
        "^Home\\s*>.*$",
        "^Next page$",
        "^Previous page$",
    };
};

enum class RejectReason {
    punct_ratio,
    dup_lines,
    short_lines,
    too_short,
    too_long,
    language,
    no_terminal_punct,
};

std::string_view reject_reason_name(RejectReason r);

struct FilterVerdict {
    bool kept = true;
    std::optional<RejectReason> reason;
    std::map<std::string, double> metrics;  // always carries the three ratios
};

/// Format repair mapper: strips control codes and zero-width code points
/// (\n and \t survive), drops exact boilerplate lines, collapses runs of
/// 3+ newlines down to 2. Record count is unchanged; output never grows.
std::string repair_format(const std::string& text, const FilterConfig& cfg = {});

/// Drops every line containing a blacklist phrase (case-insensitive
/// substring); surviving lines are byte-preserved in order.
std::string c4_line_filter(const std::string& text,
                           const std::vector<std::string>& blacklist);

/// Record-level heuristic quality verdict over format-repaired text.
/// Checks run in a fixed order; the first failure is the reason:
/// punct_ratio <= line_end_punct_max, dup-line char ratio >= dup_line_char_min,
/// short-line ratio >= short_line_ratio_max, length bounds, then short docs
/// with no terminal punctuation at all.
FilterVerdict doc_quality_filter(const std::string& text, const FilterConfig& cfg);

struct LangProfile {
    std::string lang;
    std::map<std::string, double> trigram_freqs;  // L1-normalized

    /// Counts character trigrams of `text` into an L1-normalized profile.
    static LangProfile train(const std::string& lang, const std::string& text);
};

/// Argmax cosine similarity between the text's trigram frequency vector and
/// each profile; ties break toward the lexicographically smaller lang code.
/// Texts shorter than 3 chars yield ("und", 0.0).
std::pair<std::string, double> detect_language(const std::string& text,
                                               const std::vector<LangProfile>& profiles);

struct L1PipelineReport {
    uint64_t total = 0;
    uint64_t kept = 0;
    std::map<std::string, uint64_t> rejected;  // reason -> count
    double token_estimate_removed_fraction = 0.0;
};

struct L1PipelineResult {
    std::vector<Record> kept;  // tier L1
    L1PipelineReport report;
};

/// L0 -> L1: repair_format, c4_line_filter, language gate, quality filter;
/// survivors are promoted with `op`. Empty `profiles` disables the language
/// gate. Throws ShardTierError if an input record is not L0.
L1PipelineResult run_l1_pipeline(const std::vector<Record>& shard, const FilterConfig& cfg,
                                 const std::string& target_lang,
                                 const std::vector<LangProfile>& profiles, const OpStamp& op);

}  // namespace udt
