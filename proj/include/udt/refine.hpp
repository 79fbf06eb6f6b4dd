#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "udt/gen_client.hpp"
#include "udt/record.hpp"

namespace udt {

enum class ValidationReason {
    latex_unbalanced,
    truncated,
    too_short,
    low_density,
    seed_duplicate,
    semantic_drift,
};

std::string_view validation_reason_name(ValidationReason r);

struct ValidationVerdict {
    bool accepted = false;
    std::vector<ValidationReason> reasons;  // empty iff accepted
};

struct RefineConfig {
    uint64_t min_chars = 50;
    double min_alnum_fraction = 0.5;
    double seed_duplicate_jaccard_max = 0.8;  // synthesis kinds
    double edit_overlap_min = 0.6;            // edit kind
    uint64_t max_output_chars = 4000;
    int max_retries = 3;
    int retry_backoff_ms = 100;  // doubled per attempt
};

/// Normalizes seed math: \( \) -> $ $, \[ \] -> $$ $$, common Unicode math
/// symbols mapped to macros inside math spans, whitespace inside math spans
/// collapsed. Text outside math spans is untouched.
std::string normalize_seed(const std::string& text);

/// Instantiates the prompt template for (seed, kind). Level, style and
/// persona pair are drawn deterministically from (rng_seed, seed id).
RefinementRequest plan_refinement(const Record& seed, TaskKind kind, uint64_t rng_seed,
                                  const RefineConfig& cfg = {});

struct TransformOutcome {
    bool ok = false;
    std::string text;
    bool over_length = false;  // response exceeded max_output_chars
    std::string error;         // endpoint failure after retries
};

/// Executes one request against the client, retrying transient failures up
/// to cfg.max_retries with exponential backoff. Over-length responses are
/// cut at max_output_chars and flagged for the validator.
TransformOutcome apply_transformer(const RefinementRequest& request, GenerationClient& client,
                                   const RefineConfig& cfg = {});

/// All checks must pass: LaTeX balance, sentence-final (non-truncated)
/// ending, minimum length, alphanumeric density, seed 5-gram Jaccard below
/// the duplicate cutoff (synthesis kinds), content-word overlap with the
/// seed (edit kind).
ValidationVerdict validate_output(const std::string& candidate, const Record& seed, TaskKind kind,
                                  const RefineConfig& cfg = {}, bool known_truncated = false);

/// True iff $, $$ and \begin/\end environments are properly matched/nested.
bool latex_balanced(const std::string& text);

struct L3PipelineReport {
    uint64_t tasks = 0;
    uint64_t accepted = 0;
    uint64_t failed_tasks = 0;  // endpoint failures after retries
    // kind -> reason -> count over rejected candidates.
    std::map<std::string, std::map<std::string, uint64_t>> rejections;
};

struct L3PipelineResult {
    std::vector<Record> refined;  // tier L3, meta["kind"] set
    L3PipelineReport report;
};

/// L2 -> L3: for each seed x kind, plan, generate, validate; accepted
/// candidates are promoted with parents = [seed id].
L3PipelineResult run_l3_pipeline(const std::vector<Record>& shard,
                                 const std::vector<TaskKind>& kinds, GenerationClient& client,
                                 const RefineConfig& cfg, uint64_t rng_seed, const OpStamp& op);

/// Prompt template text for one task kind (versioned asset).
std::string_view prompt_template(TaskKind kind);
extern const char* const kPromptTemplateVersion;

}  // namespace udt
