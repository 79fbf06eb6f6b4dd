#include "udt/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "udt/error.hpp"
#include "udt/hash.hpp"
#include "udt/lang_profiles.hpp"
#include "udt/shard.hpp"

namespace udt {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view pipeline_stage_name(PipelineStage s) {
    switch (s) {
        case PipelineStage::ingest: return "ingest";
        case PipelineStage::filter: return "filter";
        case PipelineStage::dedup: return "dedup";
        case PipelineStage::select: return "select";
        case PipelineStage::refine: return "refine";
    }
    return "ingest";
}

std::optional<PipelineStage> pipeline_stage_from_name(std::string_view name) {
    if (name == "ingest") return PipelineStage::ingest;
    if (name == "filter") return PipelineStage::filter;
    if (name == "dedup") return PipelineStage::dedup;
    if (name == "select") return PipelineStage::select;
    if (name == "refine") return PipelineStage::refine;
    return std::nullopt;
}

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& section) {
    for (const auto& [key, value] : obj.items()) {
        if (allowed.find(key) == allowed.end()) {
            throw ConfigError("unknown config key \"" + key + "\" in " + section);
        }
    }
}

int64_t now_utc_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ConfigError("config is not a JSON object");
    }
    reject_unknown_keys(j,
                        {"io", "seeds", "ingest", "filter", "dedup", "classify", "refine",
                         "organize", "schedule"},
                        "config root");
    PipelineConfig cfg;
    if (j.contains("io")) {
        const auto& io = j["io"];
        reject_unknown_keys(io, {"input", "output", "report", "worker_count"}, "io");
        cfg.io.input = io.value("input", "");
        cfg.io.output = io.value("output", "");
        cfg.io.report = io.value("report", "");
        cfg.io.worker_count = io.value("worker_count", 0u);
    }
    if (j.contains("seeds")) {
        const auto& seeds = j["seeds"];
        reject_unknown_keys(seeds, {"rng_seed", "hash_seed", "stamp_time"}, "seeds");
        cfg.seeds.rng_seed = seeds.value("rng_seed", uint64_t{42});
        cfg.seeds.hash_seed = seeds.value("hash_seed", uint64_t{0});
        if (seeds.contains("stamp_time")) {
            cfg.seeds.stamp_time = seeds["stamp_time"].get<int64_t>();
        }
    }
    if (j.contains("ingest")) {
        const auto& ing = j["ingest"];
        reject_unknown_keys(ing, {"format", "domain", "default_url", "default_snapshot"},
                            "ingest");
        if (ing.contains("format")) {
            auto f = raw_format_from_name(ing["format"].get<std::string>());
            if (!f) {
                throw ConfigError("ingest.format must be plaintext|jsonl|crawl");
            }
            cfg.ingest.format = *f;
        }
        if (ing.contains("domain")) {
            auto d = domain_from_name(ing["domain"].get<std::string>());
            if (!d) {
                throw ConfigError("ingest.domain is unknown");
            }
            cfg.ingest.domain = *d;
        }
        cfg.ingest.default_url = ing.value("default_url", "");
        cfg.ingest.default_snapshot = ing.value("default_snapshot", "");
    }
    if (j.contains("filter")) {
        const auto& f = j["filter"];
        reject_unknown_keys(f,
                            {"line_end_punct_max", "dup_line_char_min", "short_line_ratio_max",
                             "short_line_len", "min_doc_chars", "max_doc_chars",
                             "blacklist_phrases", "boilerplate_line_patterns", "target_lang",
                             "profiles_dir"},
                            "filter");
        cfg.filter.line_end_punct_max = f.value("line_end_punct_max", cfg.filter.line_end_punct_max);
        cfg.filter.dup_line_char_min = f.value("dup_line_char_min", cfg.filter.dup_line_char_min);
        cfg.filter.short_line_ratio_max =
            f.value("short_line_ratio_max", cfg.filter.short_line_ratio_max);
        cfg.filter.short_line_len = f.value("short_line_len", cfg.filter.short_line_len);
        cfg.filter.min_doc_chars = f.value("min_doc_chars", cfg.filter.min_doc_chars);
        cfg.filter.max_doc_chars = f.value("max_doc_chars", cfg.filter.max_doc_chars);
        if (f.contains("blacklist_phrases")) {
            cfg.filter.blacklist_phrases = f["blacklist_phrases"].get<std::vector<std::string>>();
        }
        if (f.contains("boilerplate_line_patterns")) {
            cfg.filter.boilerplate_line_patterns =
                f["boilerplate_line_patterns"].get<std::vector<std::string>>();
        }
        cfg.target_lang = f.value("target_lang", cfg.target_lang);
        cfg.profiles_dir = f.value("profiles_dir", cfg.profiles_dir);
    }
    if (j.contains("dedup")) {
        const auto& d = j["dedup"];
        reject_unknown_keys(d, {"scope", "threshold", "bands", "rows", "num_hashes", "seed"},
                            "dedup");
        if (d.contains("scope")) {
            const std::string scope = d["scope"].get<std::string>();
            if (scope == "global") {
                cfg.dedup_scope = DedupScope::global;
            } else if (scope == "per_snapshot" || scope == "per-snapshot") {
                cfg.dedup_scope = DedupScope::per_snapshot;
            } else {
                throw ConfigError("dedup.scope must be global|per-snapshot");
            }
        }
        cfg.dedup.threshold = d.value("threshold", cfg.dedup.threshold);
        cfg.dedup.bands = d.value("bands", cfg.dedup.bands);
        cfg.dedup.rows = d.value("rows", cfg.dedup.rows);
        cfg.dedup.num_hashes = d.value("num_hashes", cfg.dedup.bands * cfg.dedup.rows);
        cfg.dedup.seed = d.value("seed", cfg.dedup.seed);
    }
    if (j.contains("classify")) {
        const auto& c = j["classify"];
        reject_unknown_keys(c,
                            {"model", "train_pos", "train_neg", "epochs", "learning_rate",
                             "l2_penalty", "rng_seed", "batch_size", "policy"},
                            "classify");
        cfg.classify.model_path = c.value("model", "");
        cfg.classify.train_pos = c.value("train_pos", "");
        cfg.classify.train_neg = c.value("train_neg", "");
        cfg.classify.hyper.epochs = c.value("epochs", cfg.classify.hyper.epochs);
        cfg.classify.hyper.learning_rate = c.value("learning_rate", cfg.classify.hyper.learning_rate);
        cfg.classify.hyper.l2_penalty = c.value("l2_penalty", cfg.classify.hyper.l2_penalty);
        cfg.classify.hyper.rng_seed = c.value("rng_seed", cfg.classify.hyper.rng_seed);
        cfg.classify.hyper.batch_size = c.value("batch_size", cfg.classify.hyper.batch_size);
        if (c.contains("policy")) {
            const auto& p = c["policy"];
            reject_unknown_keys(p, {"threshold", "top_fraction", "min_bucket", "cutpoints"},
                                "classify.policy");
            if (p.contains("threshold")) {
                cfg.classify.policy = ThresholdPolicy{p["threshold"].get<double>()};
            } else if (p.contains("top_fraction")) {
                cfg.classify.policy = TopFractionPolicy{p["top_fraction"].get<double>()};
            } else if (p.contains("min_bucket")) {
                MinBucketPolicy mb;
                mb.min_bucket = p["min_bucket"].get<int>();
                if (p.contains("cutpoints")) {
                    auto arr = p["cutpoints"].get<std::vector<double>>();
                    if (arr.size() != mb.scale.cutpoints.size()) {
                        throw ConfigError("policy.cutpoints must have 5 entries");
                    }
                    std::copy(arr.begin(), arr.end(), mb.scale.cutpoints.begin());
                }
                cfg.classify.policy = mb;
            } else {
                throw ConfigError("classify.policy needs threshold|top_fraction|min_bucket");
            }
        }
    }
    if (j.contains("refine")) {
        const auto& r = j["refine"];
        reject_unknown_keys(r,
                            {"kinds", "endpoint", "mock_script", "min_chars",
                             "min_alnum_fraction", "seed_duplicate_jaccard_max",
                             "edit_overlap_min", "max_output_chars", "max_retries",
                             "retry_backoff_ms"},
                            "refine");
        if (r.contains("kinds")) {
            cfg.refine_kinds.clear();
            for (const auto& k : r["kinds"]) {
                auto kind = task_kind_from_name(k.get<std::string>());
                if (!kind) {
                    throw ConfigError("unknown refine kind " + k.get<std::string>());
                }
                cfg.refine_kinds.push_back(*kind);
            }
        }
        cfg.gen_endpoint = r.value("endpoint", "");
        cfg.gen_mock_script = r.value("mock_script", "");
        cfg.refine.min_chars = r.value("min_chars", cfg.refine.min_chars);
        cfg.refine.min_alnum_fraction = r.value("min_alnum_fraction", cfg.refine.min_alnum_fraction);
        cfg.refine.seed_duplicate_jaccard_max =
            r.value("seed_duplicate_jaccard_max", cfg.refine.seed_duplicate_jaccard_max);
        cfg.refine.edit_overlap_min = r.value("edit_overlap_min", cfg.refine.edit_overlap_min);
        cfg.refine.max_output_chars = r.value("max_output_chars", cfg.refine.max_output_chars);
        cfg.refine.max_retries = r.value("max_retries", cfg.refine.max_retries);
        cfg.refine.retry_backoff_ms = r.value("retry_backoff_ms", cfg.refine.retry_backoff_ms);
    }
    // "organize" and "schedule" sections are accepted for completeness but
    // drive their own subcommands, not pipeline stages.
    return cfg;
}

PipelineConfig PipelineConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::string PipelineConfig::canonical_json() const {
    // io paths and worker counts are environmental: they must not reach the
    // OpStamp params hash, or rerunning into a different directory would
    // change every derived record id.
    ordered_json j;
    j["seeds"] = {{"rng_seed", seeds.rng_seed}, {"hash_seed", seeds.hash_seed}};
    if (seeds.stamp_time) {
        j["seeds"]["stamp_time"] = *seeds.stamp_time;
    }
    j["ingest"] = {{"format", static_cast<int>(ingest.format)},
                   {"domain", domain_name(ingest.domain)},
                   {"default_url", ingest.default_url},
                   {"default_snapshot", ingest.default_snapshot}};
    j["filter"] = {{"line_end_punct_max", filter.line_end_punct_max},
                   {"dup_line_char_min", filter.dup_line_char_min},
                   {"short_line_ratio_max", filter.short_line_ratio_max},
                   {"short_line_len", filter.short_line_len},
                   {"min_doc_chars", filter.min_doc_chars},
                   {"max_doc_chars", filter.max_doc_chars},
                   {"blacklist_phrases", filter.blacklist_phrases},
                   {"boilerplate_line_patterns", filter.boilerplate_line_patterns},
                   {"target_lang", target_lang},
                   {"profiles_dir", profiles_dir}};
    j["dedup"] = {{"scope", dedup_scope == DedupScope::global ? "global" : "per_snapshot"},
                  {"threshold", dedup.threshold},
                  {"bands", dedup.bands},
                  {"rows", dedup.rows},
                  {"num_hashes", dedup.num_hashes},
                  {"seed", dedup.seed}};
    ordered_json policy;
    if (const auto* t = std::get_if<ThresholdPolicy>(&classify.policy)) {
        policy = {{"threshold", t->threshold}};
    } else if (const auto* f = std::get_if<TopFractionPolicy>(&classify.policy)) {
        policy = {{"top_fraction", f->fraction}};
    } else {
        const auto& mb = std::get<MinBucketPolicy>(classify.policy);
        policy = {{"min_bucket", mb.min_bucket}, {"cutpoints", mb.scale.cutpoints}};
    }
    j["classify"] = {{"model", classify.model_path},
                     {"train_pos", classify.train_pos},
                     {"train_neg", classify.train_neg},
                     {"epochs", classify.hyper.epochs},
                     {"learning_rate", classify.hyper.learning_rate},
                     {"l2_penalty", classify.hyper.l2_penalty},
                     {"rng_seed", classify.hyper.rng_seed},
                     {"batch_size", classify.hyper.batch_size},
                     {"policy", policy}};
    std::vector<std::string> kind_names;
    for (auto k : refine_kinds) {
        kind_names.emplace_back(task_kind_name(k));
    }
    j["refine"] = {{"kinds", kind_names},
                   {"endpoint", gen_endpoint},
                   {"mock_script", gen_mock_script},
                   {"min_chars", refine.min_chars},
                   {"min_alnum_fraction", refine.min_alnum_fraction},
                   {"seed_duplicate_jaccard_max", refine.seed_duplicate_jaccard_max},
                   {"edit_overlap_min", refine.edit_overlap_min},
                   {"max_output_chars", refine.max_output_chars},
                   {"max_retries", refine.max_retries},
                   {"retry_backoff_ms", refine.retry_backoff_ms},
                   {"template_version", kPromptTemplateVersion}};
    return j.dump();
}

uint64_t PipelineConfig::config_hash() const {
    return hash::fnv1a(canonical_json());
}

std::string RunReport::to_json() const {
    ordered_json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["started"] = started;
    j["ended"] = ended;
    ordered_json stages = ordered_json::object();
    for (const auto& [stage, counters] : stage_counters) {
        ordered_json c = ordered_json::object();
        for (const auto& [name, value] : counters) {
            c[name] = value;
        }
        stages[stage] = std::move(c);
    }
    j["stages"] = std::move(stages);
    j["exit_status"] = exit_status;
    return j.dump(2);
}

void RunReport::write(const std::filesystem::path& path) const {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write run report: " + tmp.string());
        }
        out << to_json() << '\n';
    }
    std::filesystem::rename(tmp, path);
}

namespace {

struct StageIo {
    std::filesystem::path in_dir;
    std::filesystem::path out_dir;
};

/// Loads records in shard-file order (files sorted by path), preserving the
/// stream order that dedup representatives depend on.
std::vector<Record> load_records(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(dir)) {
        for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".jsonl" &&
                entry.path().filename() != "dup_map.jsonl") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(dir);
    }
    std::vector<Record> records;
    for (const auto& file : files) {
        auto result = read_shard(file);
        for (auto& r : result.records) {
            records.push_back(std::move(r));
        }
    }
    return records;
}

OpStamp make_stamp(const PipelineConfig& config, std::string name) {
    OpStamp op;
    op.name = std::move(name);
    op.version = "1.0.0";
    op.params_hash = op_params_hash(config.canonical_json());
    op.timestamp = config.seeds.stamp_time ? *config.seeds.stamp_time : now_utc_seconds();
    return op;
}

void write_dup_map(const std::map<std::string, std::string>& dup_map,
                   const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write dup map: " + path.string());
    }
    for (const auto& [dup, kept] : dup_map) {
        ordered_json j;
        j["dup"] = dup;
        j["kept"] = kept;
        out << j.dump() << '\n';
    }
}

}  // namespace

RunReport run_pipeline(const PipelineConfig& config, const std::vector<PipelineStage>& stages) {
    if (stages.empty()) {
        throw ConfigError("run_pipeline: no stages requested");
    }
    for (size_t i = 1; i < stages.size(); ++i) {
        if (static_cast<int>(stages[i]) <= static_cast<int>(stages[i - 1])) {
            throw ConfigError(std::string("run_pipeline: stage order violation: ") +
                              std::string(pipeline_stage_name(stages[i])) + " after " +
                              std::string(pipeline_stage_name(stages[i - 1])));
        }
    }
    if (config.io.output.empty()) {
        throw ConfigError("run_pipeline: io.output is required");
    }

    RunReport report;
    report.command = "pipeline";
    report.config_hash = hash::hex64(config.config_hash());
    report.started = now_utc_seconds();

    const std::filesystem::path out_root = config.io.output;
    std::filesystem::create_directories(out_root);
    std::filesystem::path current_input = config.io.input;

    const auto stage_dir = [&](PipelineStage s) -> std::filesystem::path {
        switch (s) {
            case PipelineStage::ingest: return out_root / "L0";
            case PipelineStage::filter: return out_root / "L1";
            case PipelineStage::dedup: return out_root / "L1_dedup";
            case PipelineStage::select: return out_root / "L2";
            case PipelineStage::refine: return out_root / "L3";
        }
        return out_root;
    };

    try {
        for (PipelineStage stage : stages) {
            const std::string name(pipeline_stage_name(stage));
            auto& counters = report.stage_counters[name];
            const auto out_dir = stage_dir(stage);
            std::filesystem::create_directories(out_dir);

            switch (stage) {
                case PipelineStage::ingest: {
                    std::vector<std::filesystem::path> files;
                    if (std::filesystem::is_directory(current_input)) {
                        for (const auto& entry :
                             std::filesystem::directory_iterator(current_input)) {
                            if (entry.is_regular_file()) {
                                files.push_back(entry.path());
                            }
                        }
                        std::sort(files.begin(), files.end());
                    } else {
                        files.push_back(current_input);
                    }
                    ShardWriter writer(out_dir / "shard.jsonl");
                    int64_t in_docs = 0;
                    int64_t skipped = 0;
                    for (const auto& file : files) {
                        std::ifstream in(file, std::ios::binary);
                        if (!in) {
                            throw IoError("cannot open input: " + file.string());
                        }
                        SourceMeta source;
                        source.url = config.ingest.default_url.empty()
                                         ? "file://" + file.filename().string()
                                         : config.ingest.default_url;
                        source.snapshot = config.ingest.default_snapshot;
                        source.domain = config.ingest.domain;
                        auto result = ingest_raw(in, config.ingest.format, source);
                        in_docs += static_cast<int64_t>(result.records.size() +
                                                        result.skipped.size());
                        skipped += static_cast<int64_t>(result.skipped.size());
                        for (const auto& r : result.records) {
                            writer.add(r);
                        }
                    }
                    auto manifest = writer.finish();
                    counters["in"] = in_docs;
                    counters["out"] = static_cast<int64_t>(manifest.record_count);
                    counters["skipped"] = skipped;
                    break;
                }
                case PipelineStage::filter: {
                    auto records = load_records(current_input);
                    auto profiles = config.profiles_dir.empty()
                                        ? builtin_lang_profiles()
                                        : load_lang_profiles(config.profiles_dir);
                    auto result = run_l1_pipeline(records, config.filter, config.target_lang,
                                                  profiles, make_stamp(config, "l1_filter"));
                    write_shard(result.kept, out_dir / "shard.jsonl");
                    counters["in"] = static_cast<int64_t>(result.report.total);
                    counters["out"] = static_cast<int64_t>(result.report.kept);
                    for (const auto& [reason, count] : result.report.rejected) {
                        counters["rejected_" + reason] = static_cast<int64_t>(count);
                    }
                    break;
                }
                case PipelineStage::dedup: {
                    auto records = load_records(current_input);
                    auto exact = exact_dedup(records);
                    auto near = dedup_near(exact.unique, config.dedup_scope, config.dedup);
                    write_shard(near.kept, out_dir / "shard.jsonl");
                    auto dup_map = exact.dup_map;
                    dup_map.insert(near.dup_map.begin(), near.dup_map.end());
                    write_dup_map(dup_map, out_dir / "dup_map.jsonl");
                    counters["in"] = static_cast<int64_t>(records.size());
                    counters["out"] = static_cast<int64_t>(near.kept.size());
                    counters["exact_dups"] = static_cast<int64_t>(exact.dup_map.size());
                    counters["near_dups"] = static_cast<int64_t>(near.dup_map.size());
                    break;
                }
                case PipelineStage::select: {
                    auto records = load_records(current_input);
                    QualityModel model;
                    if (!config.classify.model_path.empty()) {
                        model = QualityModel::load(config.classify.model_path);
                    } else if (!config.classify.train_pos.empty() &&
                               !config.classify.train_neg.empty()) {
                        std::vector<std::string> pos;
                        std::vector<std::string> neg;
                        for (const auto& r : load_records(config.classify.train_pos)) {
                            pos.push_back(r.text);
                        }
                        for (const auto& r : load_records(config.classify.train_neg)) {
                            neg.push_back(r.text);
                        }
                        model = train_classifier(pos, neg, config.classify.hyper);
                    } else {
                        throw ConfigError(
                            "select stage needs classify.model or train_pos/train_neg");
                    }
                    auto result = select(records, model, config.classify.policy,
                                         make_stamp(config, "l2_select"));
                    write_shard(result.kept, out_dir / "shard.jsonl");
                    counters["in"] = static_cast<int64_t>(records.size());
                    counters["out"] = static_cast<int64_t>(result.report.kept);
                    counters["rejected"] = static_cast<int64_t>(result.report.rejected);
                    break;
                }
                case PipelineStage::refine: {
                    auto records = load_records(current_input);
                    std::unique_ptr<GenerationClient> client;
                    if (!config.gen_mock_script.empty()) {
                        client = std::make_unique<MockClient>(
                            MockClient::from_script_file(config.gen_mock_script));
                    } else if (!config.gen_endpoint.empty()) {
                        const char* token = std::getenv("UDT_GEN_TOKEN");
                        client = std::make_unique<HttpGenerationClient>(
                            config.gen_endpoint, "/generate", token ? token : "");
                    } else {
                        client = std::make_unique<MockClient>();  // identity echo
                    }
                    auto result =
                        run_l3_pipeline(records, config.refine_kinds, *client, config.refine,
                                        config.seeds.rng_seed, make_stamp(config, "l3_refine"));
                    write_shard(result.refined, out_dir / "shard.jsonl");
                    counters["in"] = static_cast<int64_t>(records.size());
                    counters["out"] = static_cast<int64_t>(result.report.accepted);
                    counters["tasks"] = static_cast<int64_t>(result.report.tasks);
                    counters["failed_tasks"] = static_cast<int64_t>(result.report.failed_tasks);
                    break;
                }
            }
            current_input = out_dir;
        }
    } catch (const std::exception& e) {
        report.exit_status = std::string("failed: ") + e.what();
        report.ended = now_utc_seconds();
        const std::filesystem::path report_path = config.io.report.empty()
                                                      ? out_root / "run_report.json"
                                                      : std::filesystem::path(config.io.report);
        report.write(report_path);
        throw;
    }

    report.ended = now_utc_seconds();
    const std::filesystem::path report_path = config.io.report.empty()
                                                  ? out_root / "run_report.json"
                                                  : std::filesystem::path(config.io.report);
    report.write(report_path);
    return report;
}

}  // namespace udt
