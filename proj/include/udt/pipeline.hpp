#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "udt/classifier.hpp"
#include "udt/dedup.hpp"
#include "udt/filter.hpp"
#include "udt/gen_client.hpp"
#include "udt/ingest.hpp"
#include "udt/refine.hpp"

namespace udt {

enum class PipelineStage { ingest, filter, dedup, select, refine };

std::string_view pipeline_stage_name(PipelineStage s);
std::optional<PipelineStage> pipeline_stage_from_name(std::string_view name);

/// Whole-run configuration, loaded from a single JSON file. Unknown keys are
/// rejected; flags may override individual fields.
struct PipelineConfig {
    struct Io {
        std::string input;
        std::string output;
        std::string report;  // run-report path; default <output>/run_report.json
        unsigned worker_count = 0;  // 0 = available parallelism
    } io;

    struct Seeds {
        uint64_t rng_seed = 42;
        uint64_t hash_seed = 0;
        // When set, every OpStamp of the run uses this UTC timestamp, making
        // reruns byte-identical (the run report keeps wall-clock times).
        std::optional<int64_t> stamp_time;
    } seeds;

    struct Ingest {
        RawSourceFormat format = RawSourceFormat::jsonl;
        Domain domain = Domain::web_en;
        std::string default_url;
        std::string default_snapshot;
    } ingest;

    FilterConfig filter;
    std::string target_lang = "en";
    std::string profiles_dir;  // empty = built-in profiles

    DedupConfig dedup;
    DedupScope dedup_scope = DedupScope::global;

    struct Classify {
        std::string model_path;  // load when set
        std::string train_pos;   // else train from these shard dirs
        std::string train_neg;
        ClassifierHyper hyper;
        SelectPolicy policy = ThresholdPolicy{0.5};
    } classify;

    RefineConfig refine;
    std::vector<TaskKind> refine_kinds{TaskKind::edit};
    std::string gen_endpoint;      // HTTP endpoint URL
    std::string gen_mock_script;   // or a mock script path

    /// Canonical JSON of this config (for config_hash and OpStamp params).
    std::string canonical_json() const;
    uint64_t config_hash() const;

    static PipelineConfig from_json_file(const std::filesystem::path& path);
    static PipelineConfig from_json(const std::string& text);
};

struct RunReport {
    std::string command;
    std::string config_hash;
    int64_t started = 0;
    int64_t ended = 0;
    // stage -> counter -> value
    std::map<std::string, std::map<std::string, int64_t>> stage_counters;
    std::string exit_status = "ok";

    std::string to_json() const;
    void write(const std::filesystem::path& path) const;
};

/// Executes the requested stages in order, each consuming the previous
/// stage's output directory (the first stage reads io.input). Stage order
/// must respect tier order; violations are config errors raised before any
/// work. A stage failure stops the run, leaves prior outputs intact and is
/// recorded in the report.
RunReport run_pipeline(const PipelineConfig& config, const std::vector<PipelineStage>& stages);

}  // namespace udt
