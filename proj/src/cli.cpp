#include "udt/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "udt/classifier.hpp"
#include "udt/dedup.hpp"
#include "udt/error.hpp"
#include "udt/filter.hpp"
#include "udt/hash.hpp"
#include "udt/ingest.hpp"
#include "udt/lang_profiles.hpp"
#include "udt/lineage.hpp"
#include "udt/organize.hpp"
#include "udt/pipeline.hpp"
#include "udt/refine.hpp"
#include "udt/schedule.hpp"
#include "udt/shard.hpp"

namespace udt {

using nlohmann::ordered_json;

namespace {

std::vector<Record> load_dir_records(const std::filesystem::path& dir) {
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
        for (const auto& err : result.errors) {
            ordered_json j;
            j["file"] = file.string();
            j["line"] = err.line_number;
            j["error"] = err.message;
            std::cerr << j.dump() << '\n';
        }
        for (auto& r : result.records) {
            records.push_back(std::move(r));
        }
    }
    return records;
}

OpStamp cli_stamp(std::string name, uint64_t params_hash, std::optional<int64_t> stamp_time) {
    OpStamp op;
    op.name = std::move(name);
    op.version = "1.0.0";
    op.params_hash = params_hash;
    op.timestamp = stamp_time ? *stamp_time
                              : std::chrono::duration_cast<std::chrono::seconds>(
                                    std::chrono::system_clock::now().time_since_epoch())
                                    .count();
    return op;
}

std::map<Domain, double> parse_mix(const std::string& spec) {
    std::map<Domain, double> mix;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) {
        auto eq = part.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--mix expects domain=fraction pairs: " + part);
        }
        auto domain = domain_from_name(part.substr(0, eq));
        if (!domain) {
            throw ConfigError("--mix has unknown domain: " + part.substr(0, eq));
        }
        mix[*domain] = std::stod(part.substr(eq + 1));
    }
    return mix;
}

std::vector<PoolStats> load_pools(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open pools file: " + path.string());
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_array()) {
        throw ConfigError("pools file must be a JSON array");
    }
    std::vector<PoolStats> pools;
    for (const auto& p : j) {
        PoolStats ps;
        ps.pool_id = p.at("pool").get<std::string>();
        auto domain = domain_from_name(p.at("domain").get<std::string>());
        auto tier = tier_from_name(p.at("tier").get<std::string>());
        if (!domain || !tier) {
            throw ConfigError("pools file has unknown domain/tier for " + ps.pool_id);
        }
        ps.domain = *domain;
        ps.tier = *tier;
        ps.available_tokens = p.at("available_tokens").get<uint64_t>();
        pools.push_back(std::move(ps));
    }
    return pools;
}

// ---- subcommand handlers ------------------------------------------------

struct IngestArgs {
    std::string format = "jsonl";
    std::string domain = "web_en";
    std::string out;
    std::string url;
    std::string snapshot;
    std::vector<std::string> inputs;
};

int cmd_ingest(const IngestArgs& args) {
    auto format = raw_format_from_name(args.format);
    auto domain = domain_from_name(args.domain);
    if (!format || !domain) {
        throw ConfigError("ingest: unknown --format or --domain");
    }
    std::filesystem::create_directories(args.out);
    ShardWriter writer(std::filesystem::path(args.out) / "shard.jsonl");
    uint64_t total_skipped = 0;
    for (const auto& input : args.inputs) {
        std::ifstream in(input, std::ios::binary);
        if (!in) {
            throw IoError("cannot open input: " + input);
        }
        SourceMeta source;
        source.url = args.url.empty() ? "file://" + std::filesystem::path(input).filename().string()
                                      : args.url;
        source.snapshot = args.snapshot;
        source.domain = *domain;
        auto result = ingest_raw(in, *format, source);
        for (const auto& skip : result.skipped) {
            ordered_json j;
            j["file"] = input;
            j["index"] = skip.index;
            j["reason"] = skip.reason;
            std::cerr << j.dump() << '\n';
            ++total_skipped;
        }
        for (const auto& r : result.records) {
            writer.add(r);
        }
    }
    auto manifest = writer.finish();
    std::cout << "ingested " << manifest.record_count << " records (" << total_skipped
              << " skipped) -> " << args.out << "\n";
    return 0;
}

struct FilterArgs {
    std::string config;
    std::string lang = "en";
    std::string in;
    std::string out;
    std::string report;
    std::string profiles;
    std::optional<int64_t> stamp_time;
};

int cmd_filter(const FilterArgs& args) {
    PipelineConfig cfg;
    if (!args.config.empty()) {
        cfg = PipelineConfig::from_json_file(args.config);
    }
    cfg.target_lang = args.lang;
    if (!args.profiles.empty()) {
        cfg.profiles_dir = args.profiles;
    }
    if (args.stamp_time) {
        cfg.seeds.stamp_time = args.stamp_time;
    }
    auto records = load_dir_records(args.in);
    auto profiles = cfg.profiles_dir.empty() ? builtin_lang_profiles()
                                             : load_lang_profiles(cfg.profiles_dir);
    auto op = cli_stamp("l1_filter", op_params_hash(cfg.canonical_json()), cfg.seeds.stamp_time);
    auto result = run_l1_pipeline(records, cfg.filter, cfg.target_lang, profiles, op);
    std::filesystem::create_directories(args.out);
    write_shard(result.kept, std::filesystem::path(args.out) / "shard.jsonl");

    ordered_json report;
    report["total"] = result.report.total;
    report["kept"] = result.report.kept;
    ordered_json rejected = ordered_json::object();
    for (const auto& [reason, count] : result.report.rejected) {
        rejected[reason] = count;
    }
    report["rejected"] = std::move(rejected);
    report["token_estimate_removed_fraction"] = result.report.token_estimate_removed_fraction;
    if (!args.report.empty()) {
        std::ofstream out(args.report, std::ios::trunc);
        out << report.dump(2) << '\n';
    } else {
        std::cout << report.dump(2) << '\n';
    }
    return 0;
}

struct DedupArgs {
    std::string scope = "global";
    double threshold = 0.75;
    uint64_t bands = 14;
    uint64_t rows = 8;
    uint64_t seed = 0;
    std::string in;
    std::string out;
    std::string dup_map;
};

int cmd_dedup(const DedupArgs& args) {
    DedupScope scope;
    if (args.scope == "global") {
        scope = DedupScope::global;
    } else if (args.scope == "per-snapshot" || args.scope == "per_snapshot") {
        scope = DedupScope::per_snapshot;
    } else {
        throw ConfigError("dedup: --scope must be global or per-snapshot");
    }
    DedupConfig cfg;
    cfg.bands = args.bands;
    cfg.rows = args.rows;
    cfg.num_hashes = args.bands * args.rows;
    cfg.threshold = args.threshold;
    cfg.seed = args.seed;

    auto records = load_dir_records(args.in);
    auto exact = exact_dedup(records);
    auto near = dedup_near(exact.unique, scope, cfg);
    std::filesystem::create_directories(args.out);
    write_shard(near.kept, std::filesystem::path(args.out) / "shard.jsonl");

    auto dup_map = exact.dup_map;
    dup_map.insert(near.dup_map.begin(), near.dup_map.end());
    const std::filesystem::path dup_path = args.dup_map.empty()
                                               ? std::filesystem::path(args.out) / "dup_map.jsonl"
                                               : std::filesystem::path(args.dup_map);
    std::ofstream out(dup_path, std::ios::trunc);
    for (const auto& [dup, kept] : dup_map) {
        ordered_json j;
        j["dup"] = dup;
        j["kept"] = kept;
        out << j.dump() << '\n';
    }
    std::cout << "kept " << near.kept.size() << " of " << records.size() << " records ("
              << exact.dup_map.size() << " exact dups, " << near.dup_map.size()
              << " near dups)\n";
    return 0;
}

struct ClassifyTrainArgs {
    std::string pos;
    std::string neg;
    std::string out;
    std::string calibrate;
    ClassifierHyper hyper;
};

int cmd_classify_train(const ClassifyTrainArgs& args) {
    std::vector<std::string> pos;
    std::vector<std::string> neg;
    for (const auto& r : load_dir_records(args.pos)) {
        pos.push_back(r.text);
    }
    for (const auto& r : load_dir_records(args.neg)) {
        neg.push_back(r.text);
    }
    auto model = train_classifier(pos, neg, args.hyper);
    if (!args.calibrate.empty()) {
        model.set_scale(calibrate_scale(model, load_dir_records(args.calibrate)));
    }
    model.save(args.out);
    std::cout << "trained on " << pos.size() << "+" << neg.size() << " seeds -> " << args.out
              << "\n";
    return 0;
}

int cmd_classify_score(const std::string& model_path, const std::string& in) {
    auto model = QualityModel::load(model_path);
    for (const auto& r : load_dir_records(in)) {
        std::cout << r.id << "\t" << model.score(r.text) << "\n";
    }
    return 0;
}

int cmd_classify_eval(const std::string& model_path, const std::string& pos,
                      const std::string& neg) {
    auto model = QualityModel::load(model_path);
    std::vector<LabeledExample> holdout;
    for (const auto& r : load_dir_records(pos)) {
        holdout.push_back({r.text, true});
    }
    for (const auto& r : load_dir_records(neg)) {
        holdout.push_back({r.text, false});
    }
    auto metrics = evaluate_classifier(model, holdout);
    ordered_json j;
    j["precision"] = metrics.precision;
    j["recall"] = metrics.recall;
    j["f1"] = metrics.f1;
    j["accuracy"] = metrics.accuracy;
    std::cout << j.dump(2) << '\n';
    return 0;
}

struct SelectArgs {
    std::string model;
    std::string in;
    std::string out;
    std::string report;
    std::optional<double> threshold;
    std::optional<double> top_fraction;
    std::optional<int> min_bucket;
    std::optional<int64_t> stamp_time;
};

int cmd_select(const SelectArgs& args) {
    auto model = QualityModel::load(args.model);
    SelectPolicy policy = ThresholdPolicy{0.5};
    int given = 0;
    if (args.threshold) {
        policy = ThresholdPolicy{*args.threshold};
        ++given;
    }
    if (args.top_fraction) {
        policy = TopFractionPolicy{*args.top_fraction};
        ++given;
    }
    if (args.min_bucket) {
        MinBucketPolicy mb;
        mb.min_bucket = *args.min_bucket;
        if (model.scale()) {
            mb.scale = *model.scale();
        }
        policy = mb;
        ++given;
    }
    if (given > 1) {
        throw ConfigError("select: give exactly one of --threshold/--top-fraction/--min-bucket");
    }
    auto records = load_dir_records(args.in);
    auto op = cli_stamp("l2_select", op_params_hash("select"), args.stamp_time);
    auto result = select(records, model, policy, op);
    std::filesystem::create_directories(args.out);
    write_shard(result.kept, std::filesystem::path(args.out) / "shard.jsonl");
    ordered_json j;
    j["kept"] = result.report.kept;
    j["rejected"] = result.report.rejected;
    j["score_histogram"] = result.report.score_histogram;
    if (!args.report.empty()) {
        std::ofstream out(args.report, std::ios::trunc);
        out << j.dump(2) << '\n';
    } else {
        std::cout << j.dump(2) << '\n';
    }
    return 0;
}

struct RefineArgs {
    std::string kinds = "edit";
    std::string endpoint;
    std::string mock;
    std::string in;
    std::string out;
    std::string report;
    uint64_t seed = 42;
    std::optional<int64_t> stamp_time;
};

int cmd_refine(const RefineArgs& args) {
    std::vector<TaskKind> kinds;
    std::stringstream ss(args.kinds);
    std::string part;
    while (std::getline(ss, part, ',')) {
        auto kind = task_kind_from_name(part);
        if (!kind) {
            throw ConfigError("refine: unknown kind " + part);
        }
        kinds.push_back(*kind);
    }
    std::unique_ptr<GenerationClient> client;
    if (!args.mock.empty()) {
        client = std::make_unique<MockClient>(MockClient::from_script_file(args.mock));
    } else if (!args.endpoint.empty()) {
        const char* token = std::getenv("UDT_GEN_TOKEN");
        client = std::make_unique<HttpGenerationClient>(args.endpoint, "/generate",
                                                        token ? token : "");
    } else {
        client = std::make_unique<MockClient>();
    }
    RefineConfig cfg;
    auto records = load_dir_records(args.in);
    auto op = cli_stamp("l3_refine", op_params_hash("refine"), args.stamp_time);
    auto result = run_l3_pipeline(records, kinds, *client, cfg, args.seed, op);
    std::filesystem::create_directories(args.out);
    write_shard(result.refined, std::filesystem::path(args.out) / "shard.jsonl");
    ordered_json j;
    j["tasks"] = result.report.tasks;
    j["accepted"] = result.report.accepted;
    j["failed_tasks"] = result.report.failed_tasks;
    ordered_json rejections = ordered_json::object();
    for (const auto& [kind, reasons] : result.report.rejections) {
        ordered_json r = ordered_json::object();
        for (const auto& [reason, count] : reasons) {
            r[reason] = count;
        }
        rejections[kind] = std::move(r);
    }
    j["rejections"] = std::move(rejections);
    if (!args.report.empty()) {
        std::ofstream out(args.report, std::ios::trunc);
        out << j.dump(2) << '\n';
    } else {
        std::cout << j.dump(2) << '\n';
    }
    return 0;
}

int cmd_organize_chunk(const std::string& in, const std::string& out, uint64_t max_chars) {
    auto records = load_dir_records(in);
    std::ofstream os(out, std::ios::trunc);
    if (!os) {
        throw IoError("cannot write chunks: " + out);
    }
    uint64_t count = 0;
    for (const auto& r : records) {
        for (const auto& c : chunk_document(r, max_chars)) {
            ordered_json j;
            j["chunk_id"] = c.chunk_id;
            j["record_id"] = c.record_id;
            j["start"] = c.start;
            j["end"] = c.end;
            j["text"] = c.text;
            os << j.dump() << '\n';
            ++count;
        }
    }
    std::cout << "wrote " << count << " chunks\n";
    return 0;
}

std::vector<Chunk> load_chunks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open chunks: " + path.string());
    }
    std::vector<Chunk> chunks;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw Error("malformed chunk line in " + path.string());
        }
        Chunk c;
        c.chunk_id = j.at("chunk_id").get<std::string>();
        c.record_id = j.at("record_id").get<std::string>();
        c.start = j.at("start").get<uint64_t>();
        c.end = j.at("end").get<uint64_t>();
        c.text = j.at("text").get<std::string>();
        chunks.push_back(std::move(c));
    }
    return chunks;
}

int cmd_organize_index(const std::string& chunks_path, const std::string& out) {
    auto chunks = load_chunks(chunks_path);
    auto index = TermIndex::build(chunks);
    index.save(out);
    std::cout << "indexed " << chunks.size() << " chunks, " << index.postings().size()
              << " terms\n";
    return 0;
}

int cmd_organize_query(const std::string& index_path, const std::vector<std::string>& terms,
                       size_t k) {
    auto index = TermIndex::load(index_path);
    for (const auto& [chunk_id, score] : index.query(terms, k)) {
        std::cout << chunk_id << "\t" << score << "\n";
    }
    return 0;
}

std::vector<FactRecord> load_facts(const std::filesystem::path& path) {
    std::vector<FactRecord> facts;
    std::ifstream in(path);
    if (!in) {
        return facts;
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw Error("malformed fact line in " + path.string());
        }
        FactRecord f;
        f.subject = j.at("s").get<std::string>();
        f.relation = j.at("r").get<std::string>();
        f.object = j.at("o").get<std::string>();
        f.evidence = j.at("evidence").get<std::string>();
        const std::string status = j.value("status", "unverified");
        if (status == "verified") {
            f.status = FactStatus::verified;
        } else if (status == "contradicted") {
            f.status = FactStatus::contradicted;
        }
        facts.push_back(std::move(f));
    }
    return facts;
}

void save_facts(const std::vector<FactRecord>& facts, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write facts: " + path.string());
    }
    for (const auto& f : facts) {
        ordered_json j;
        j["s"] = f.subject;
        j["r"] = f.relation;
        j["o"] = f.object;
        j["evidence"] = f.evidence;
        j["status"] = fact_status_name(f.status);
        out << j.dump() << '\n';
    }
}

int cmd_fact_add(const std::string& chunks_path, const std::string& facts_path,
                 const std::string& s, const std::string& r, const std::string& o,
                 const std::string& evidence) {
    FactStore store;
    for (const auto& c : load_chunks(chunks_path)) {
        store.add_chunk_id(c.chunk_id);
    }
    for (auto& f : load_facts(facts_path)) {
        store.add_chunk_id(f.evidence);  // previously accepted evidence stays valid
        store.register_fact(f.subject, f.relation, f.object, f.evidence).status = f.status;
    }
    store.register_fact(s, r, o, evidence);
    save_facts(store.facts(), facts_path);
    std::cout << "facts: " << store.facts().size() << "\n";
    return 0;
}

int cmd_fact_verify(const std::string& facts_path, const std::string& trusted_path) {
    auto trusted = TrustedStore::load_jsonl(trusted_path);
    auto facts = load_facts(facts_path);
    uint64_t verified = 0;
    uint64_t contradicted = 0;
    for (auto& f : facts) {
        if (f.status != FactStatus::unverified) {
            continue;
        }
        f = verify_fact(f, trusted);
        if (f.status == FactStatus::verified) {
            ++verified;
        } else if (f.status == FactStatus::contradicted) {
            ++contradicted;
        }
    }
    save_facts(facts, facts_path);
    std::cout << "verified " << verified << ", contradicted " << contradicted << " of "
              << facts.size() << " facts\n";
    return 0;
}

struct ScheduleArgs {
    std::string strategy = "mix";
    uint64_t budget = 0;
    std::string mix;
    std::string pools;
    std::string verification_pools;
    std::string out;
    std::string estimator = "whitespace";
    uint64_t n_stages = 3;
    double verification_fraction = 0.30;
};

int cmd_schedule_build(const ScheduleArgs& args) {
    auto pools = load_pools(args.pools);
    Schedule schedule;
    if (args.strategy == "mix") {
        schedule = build_mix_schedule(pools, args.budget, parse_mix(args.mix));
    } else if (args.strategy == "tiered") {
        schedule = build_tiered_schedule(pools, args.budget, parse_mix(args.mix), args.n_stages);
    } else if (args.strategy == "decay") {
        if (args.verification_pools.empty()) {
            throw ConfigError("schedule build --strategy decay needs --verification-pools");
        }
        auto verification = load_pools(args.verification_pools);
        schedule =
            build_decay_mix(pools, verification, args.budget, args.verification_fraction);
    } else {
        throw ConfigError("schedule: --strategy must be mix|tiered|decay");
    }
    auto estimator = token_estimator_from_name(args.estimator);
    if (!estimator) {
        throw ConfigError("schedule: unknown --estimator");
    }
    schedule.estimator = *estimator;

    std::vector<PoolStats> all_pools = pools;
    if (!args.verification_pools.empty()) {
        auto verification = load_pools(args.verification_pools);
        all_pools.insert(all_pools.end(), verification.begin(), verification.end());
    }
    auto validation = validate_manifest(schedule, all_pools);
    if (!validation.ok()) {
        for (const auto& v : validation.violations) {
            std::cerr << "violation: " << v.message << "\n";
        }
        throw Error("schedule build produced an invalid manifest");
    }
    if (!args.out.empty()) {
        save_schedule(schedule, args.out);
        std::cout << "wrote schedule (" << schedule.total_tokens << " tokens, "
                  << schedule.stages.size() << " stages) -> " << args.out << "\n";
    } else {
        std::cout << schedule_to_json(schedule) << "\n";
    }
    return 0;
}

int cmd_lineage(const std::string& id, const std::vector<std::string>& store_paths) {
    RecordStore store;
    for (const auto& path : store_paths) {
        store.load(path);
    }
    auto lineage = trace_lineage(id, store);
    for (const auto& node : lineage.nodes) {
        std::cout << tier_name(node.tier) << " " << node.id;
        if (!node.ops.empty()) {
            std::cout << " via";
            for (const auto& op : node.ops) {
                std::cout << " " << op.name << "@" << op.version;
            }
        }
        std::cout << "\n";
    }
    return 0;
}

int cmd_stats(const std::string& in) {
    auto records = load_dir_records(in);
    auto report = archive_stats(records);
    ordered_json j;
    j["document_count"] = report.document_count;
    j["byte_count"] = report.byte_count;
    ordered_json domains = ordered_json::object();
    for (const auto& [domain, count] : report.per_domain) {
        domains[domain] = count;
    }
    j["per_domain"] = std::move(domains);
    j["duplicate_id_count"] = report.duplicate_id_count;
    std::cout << j.dump(2) << '\n';
    return 0;
}

struct PipelineArgs {
    std::string config;
    std::string stages;
    std::string report;
};

int cmd_pipeline(const PipelineArgs& args) {
    auto cfg = PipelineConfig::from_json_file(args.config);
    if (!args.report.empty()) {
        cfg.io.report = args.report;
    }
    std::vector<PipelineStage> stages;
    std::stringstream ss(args.stages);
    std::string part;
    while (std::getline(ss, part, ',')) {
        auto stage = pipeline_stage_from_name(part);
        if (!stage) {
            throw ConfigError("pipeline: unknown stage " + part);
        }
        stages.push_back(*stage);
    }
    auto report = run_pipeline(cfg, stages);
    std::cout << report.to_json() << '\n';
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& argv) {
    CLI::App app{"udt - tiered corpus curation toolkit"};
    app.require_subcommand(1);

    // ingest
    IngestArgs ingest_args;
    auto* ingest_cmd = app.add_subcommand("ingest", "Register raw inputs as L0 records");
    ingest_cmd->add_option("--format", ingest_args.format, "plaintext|jsonl|crawl");
    ingest_cmd->add_option("--domain", ingest_args.domain, "web_en|web_zh|math|code|other");
    ingest_cmd->add_option("--out", ingest_args.out, "output directory")->required();
    ingest_cmd->add_option("--url", ingest_args.url, "default source url");
    ingest_cmd->add_option("--snapshot", ingest_args.snapshot, "source snapshot id");
    ingest_cmd->add_option("inputs", ingest_args.inputs, "input files")->required();

    // filter
    FilterArgs filter_args;
    int64_t filter_stamp = -1;
    auto* filter_cmd = app.add_subcommand("filter", "L1 heuristic cleaning");
    filter_cmd->add_option("--config", filter_args.config, "pipeline config JSON");
    filter_cmd->add_option("--lang", filter_args.lang, "target language code");
    filter_cmd->add_option("--in", filter_args.in)->required();
    filter_cmd->add_option("--out", filter_args.out)->required();
    filter_cmd->add_option("--report", filter_args.report, "report JSON path");
    filter_cmd->add_option("--profiles", filter_args.profiles, "language profile dir");
    filter_cmd->add_option("--stamp-time", filter_stamp, "fixed OpStamp timestamp");

    // dedup
    DedupArgs dedup_args;
    auto* dedup_cmd = app.add_subcommand("dedup", "Exact + MinHash-LSH near-dup removal");
    dedup_cmd->add_option("--scope", dedup_args.scope, "global|per-snapshot");
    dedup_cmd->add_option("--threshold", dedup_args.threshold);
    dedup_cmd->add_option("--bands", dedup_args.bands);
    dedup_cmd->add_option("--rows", dedup_args.rows);
    dedup_cmd->add_option("--seed", dedup_args.seed);
    dedup_cmd->add_option("--in", dedup_args.in)->required();
    dedup_cmd->add_option("--out", dedup_args.out)->required();
    dedup_cmd->add_option("--dup-map", dedup_args.dup_map, "dup map JSONL path");

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "Quality classifier");
    classify_cmd->require_subcommand(1);
    ClassifyTrainArgs train_args;
    auto* train_cmd = classify_cmd->add_subcommand("train", "Train from seed shards");
    train_cmd->add_option("--pos", train_args.pos)->required();
    train_cmd->add_option("--neg", train_args.neg)->required();
    train_cmd->add_option("--out", train_args.out)->required();
    train_cmd->add_option("--calibrate", train_args.calibrate, "calibration shard dir");
    train_cmd->add_option("--epochs", train_args.hyper.epochs);
    train_cmd->add_option("--learning-rate", train_args.hyper.learning_rate);
    train_cmd->add_option("--l2", train_args.hyper.l2_penalty);
    train_cmd->add_option("--seed", train_args.hyper.rng_seed);
    train_cmd->add_option("--batch-size", train_args.hyper.batch_size);
    train_cmd->add_option("--hash-seed", train_args.hyper.hash_seed);

    std::string score_model;
    std::string score_in;
    auto* score_cmd = classify_cmd->add_subcommand("score", "Score records");
    score_cmd->add_option("--model", score_model)->required();
    score_cmd->add_option("--in", score_in)->required();

    std::string eval_model;
    std::string eval_pos;
    std::string eval_neg;
    auto* eval_cmd = classify_cmd->add_subcommand("eval", "Evaluate on a labeled holdout");
    eval_cmd->add_option("--model", eval_model)->required();
    eval_cmd->add_option("--pos", eval_pos)->required();
    eval_cmd->add_option("--neg", eval_neg)->required();

    // select (also reachable as `classify select`)
    SelectArgs select_args;
    double sel_threshold = -1.0;
    double sel_top_fraction = -1.0;
    int sel_min_bucket = -1;
    int64_t sel_stamp = -1;
    const auto add_select_options = [&](CLI::App* cmd) {
        cmd->add_option("--model", select_args.model)->required();
        cmd->add_option("--in", select_args.in)->required();
        cmd->add_option("--out", select_args.out)->required();
        cmd->add_option("--report", select_args.report);
        cmd->add_option("--threshold", sel_threshold);
        cmd->add_option("--top-fraction", sel_top_fraction);
        cmd->add_option("--min-bucket", sel_min_bucket);
        cmd->add_option("--stamp-time", sel_stamp);
    };
    auto* select_cmd = app.add_subcommand("select", "L1 -> L2 model-driven selection");
    add_select_options(select_cmd);
    auto* classify_select_cmd = classify_cmd->add_subcommand("select", "L1 -> L2 selection");
    add_select_options(classify_select_cmd);

    // refine
    RefineArgs refine_args;
    int64_t refine_stamp = -1;
    auto* refine_cmd = app.add_subcommand("refine", "L2 -> L3 edit/synthesis orchestration");
    refine_cmd->add_option("--kinds", refine_args.kinds, "comma list of task kinds");
    refine_cmd->add_option("--endpoint", refine_args.endpoint, "generation endpoint URL");
    refine_cmd->add_option("--mock", refine_args.mock, "mock script JSON");
    refine_cmd->add_option("--in", refine_args.in)->required();
    refine_cmd->add_option("--out", refine_args.out)->required();
    refine_cmd->add_option("--report", refine_args.report);
    refine_cmd->add_option("--seed", refine_args.seed);
    refine_cmd->add_option("--stamp-time", refine_stamp);

    // organize
    auto* organize_cmd = app.add_subcommand("organize", "L4 chunking, index, facts");
    organize_cmd->require_subcommand(1);
    std::string org_in;
    std::string org_out;
    uint64_t org_max_chars = 1200;
    auto* chunk_cmd = organize_cmd->add_subcommand("chunk", "Chunk records");
    chunk_cmd->add_option("--in", org_in)->required();
    chunk_cmd->add_option("--out", org_out)->required();
    chunk_cmd->add_option("--max-chars", org_max_chars);

    std::string idx_chunks;
    std::string idx_out;
    auto* index_cmd = organize_cmd->add_subcommand("index", "Build a term index");
    index_cmd->add_option("--chunks", idx_chunks)->required();
    index_cmd->add_option("--out", idx_out)->required();

    std::string query_index;
    std::vector<std::string> query_terms;
    size_t query_k = 10;
    auto* query_cmd = organize_cmd->add_subcommand("query", "BM25 query");
    query_cmd->add_option("--index", query_index)->required();
    query_cmd->add_option("terms", query_terms)->required();
    query_cmd->add_option("-k", query_k);

    auto* fact_cmd = organize_cmd->add_subcommand("fact", "Fact registration/verification");
    fact_cmd->require_subcommand(1);
    std::string fact_chunks;
    std::string fact_file;
    std::string fact_s;
    std::string fact_r;
    std::string fact_o;
    std::string fact_evidence;
    auto* fact_add_cmd = fact_cmd->add_subcommand("add", "Register a fact");
    fact_add_cmd->add_option("--chunks", fact_chunks)->required();
    fact_add_cmd->add_option("--facts", fact_file)->required();
    fact_add_cmd->add_option("-s", fact_s)->required();
    fact_add_cmd->add_option("-r", fact_r)->required();
    fact_add_cmd->add_option("-o", fact_o)->required();
    fact_add_cmd->add_option("--evidence", fact_evidence)->required();

    std::string verify_facts;
    std::string verify_trusted;
    auto* fact_verify_cmd = fact_cmd->add_subcommand("verify", "Verify against trusted triples");
    fact_verify_cmd->add_option("--facts", verify_facts)->required();
    fact_verify_cmd->add_option("--trusted", verify_trusted)->required();

    // schedule
    auto* schedule_cmd = app.add_subcommand("schedule", "Training-mixture schedules");
    schedule_cmd->require_subcommand(1);
    ScheduleArgs schedule_args;
    auto* build_cmd = schedule_cmd->add_subcommand("build", "Build a stage manifest");
    build_cmd->add_option("--strategy", schedule_args.strategy, "mix|tiered|decay");
    build_cmd->add_option("--budget", schedule_args.budget)->required();
    build_cmd->add_option("--mix", schedule_args.mix, "domain=fraction,...");
    build_cmd->add_option("--pools", schedule_args.pools, "pools JSON")->required();
    build_cmd->add_option("--verification-pools", schedule_args.verification_pools);
    build_cmd->add_option("--out", schedule_args.out);
    build_cmd->add_option("--estimator", schedule_args.estimator);
    build_cmd->add_option("--stages", schedule_args.n_stages);
    build_cmd->add_option("--verification-fraction", schedule_args.verification_fraction);

    // lineage
    auto* lineage_cmd = app.add_subcommand("lineage", "Lineage inspection");
    lineage_cmd->require_subcommand(1);
    std::string trace_id;
    std::vector<std::string> trace_stores;
    auto* trace_cmd = lineage_cmd->add_subcommand("trace", "Print the ancestry chain");
    trace_cmd->add_option("id", trace_id)->required();
    trace_cmd->add_option("--store", trace_stores, "shard files/dirs")->required();

    // stats
    std::string stats_in;
    auto* stats_cmd = app.add_subcommand("stats", "Archive statistics for a shard");
    stats_cmd->add_option("--in", stats_in)->required();

    // pipeline
    PipelineArgs pipeline_args;
    auto* pipeline_cmd = app.add_subcommand("pipeline", "Run configured stages in order");
    pipeline_cmd->add_option("--config", pipeline_args.config)->required();
    pipeline_cmd->add_option("--stages", pipeline_args.stages, "comma list, tier order")
        ->required();
    pipeline_cmd->add_option("--report", pipeline_args.report);

    std::vector<const char*> cargs;
    cargs.reserve(argv.size() + 1);
    cargs.push_back("udt");
    for (const auto& a : argv) {
        cargs.push_back(a.c_str());
    }

    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help; exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*ingest_cmd) {
            return cmd_ingest(ingest_args);
        }
        if (*filter_cmd) {
            if (filter_stamp >= 0) {
                filter_args.stamp_time = filter_stamp;
            }
            return cmd_filter(filter_args);
        }
        if (*dedup_cmd) {
            return cmd_dedup(dedup_args);
        }
        if (*train_cmd) {
            return cmd_classify_train(train_args);
        }
        if (*score_cmd) {
            return cmd_classify_score(score_model, score_in);
        }
        if (*eval_cmd) {
            return cmd_classify_eval(eval_model, eval_pos, eval_neg);
        }
        if (*select_cmd || *classify_select_cmd) {
            if (sel_threshold >= 0) select_args.threshold = sel_threshold;
            if (sel_top_fraction >= 0) select_args.top_fraction = sel_top_fraction;
            if (sel_min_bucket >= 0) select_args.min_bucket = sel_min_bucket;
            if (sel_stamp >= 0) select_args.stamp_time = sel_stamp;
            return cmd_select(select_args);
        }
        if (*refine_cmd) {
            if (refine_stamp >= 0) {
                refine_args.stamp_time = refine_stamp;
            }
            return cmd_refine(refine_args);
        }
        if (*chunk_cmd) {
            return cmd_organize_chunk(org_in, org_out, org_max_chars);
        }
        if (*index_cmd) {
            return cmd_organize_index(idx_chunks, idx_out);
        }
        if (*query_cmd) {
            return cmd_organize_query(query_index, query_terms, query_k);
        }
        if (*fact_add_cmd) {
            return cmd_fact_add(fact_chunks, fact_file, fact_s, fact_r, fact_o, fact_evidence);
        }
        if (*fact_verify_cmd) {
            return cmd_fact_verify(verify_facts, verify_trusted);
        }
        if (*build_cmd) {
            return cmd_schedule_build(schedule_args);
        }
        if (*trace_cmd) {
            return cmd_lineage(trace_id, trace_stores);
        }
        if (*stats_cmd) {
            return cmd_stats(stats_in);
        }
        if (*pipeline_cmd) {
            return cmd_pipeline(pipeline_args);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace udt
