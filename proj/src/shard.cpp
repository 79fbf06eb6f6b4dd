#include "udt/shard.hpp"

#include <nlohmann/json.hpp>

#include "udt/error.hpp"
#include "udt/hash.hpp"

namespace udt {

using ordered_json = nlohmann::ordered_json;

std::string record_to_json_line(const Record& r) {
    ordered_json j;
    j["id"] = r.id;
    j["text"] = r.text;
    j["tier"] = tier_name(r.tier);
    ordered_json src;
    src["url"] = r.source.url;
    src["snapshot"] = r.source.snapshot;
    src["domain"] = domain_name(r.source.domain);
    j["source"] = std::move(src);
    if (r.lang.empty()) {
        j["lang"] = nullptr;
    } else {
        j["lang"] = r.lang;
    }
    ordered_json scores = ordered_json::object();
    for (const auto& [k, v] : r.scores) {
        scores[k] = v;
    }
    j["scores"] = std::move(scores);
    j["parents"] = r.parents;
    ordered_json ops = ordered_json::array();
    for (const auto& op : r.ops) {
        ordered_json o;
        o["name"] = op.name;
        o["version"] = op.version;
        o["params_hash"] = hash::hex64(op.params_hash);
        o["timestamp"] = op.timestamp;
        ops.push_back(std::move(o));
    }
    j["ops"] = std::move(ops);
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : r.meta) {
        meta[k] = v;
    }
    j["meta"] = std::move(meta);
    return j.dump();
}

Record record_from_json_line(std::string_view line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw Error("record line is not a JSON object");
    }
    Record r;
    try {
        r.id = j.at("id").get<std::string>();
        r.text = j.at("text").get<std::string>();
        auto tier = tier_from_name(j.at("tier").get<std::string>());
        if (!tier) {
            throw Error("unknown tier label");
        }
        r.tier = *tier;
        const auto& src = j.at("source");
        r.source.url = src.at("url").get<std::string>();
        r.source.snapshot = src.at("snapshot").get<std::string>();
        auto dom = domain_from_name(src.at("domain").get<std::string>());
        if (!dom) {
            throw Error("unknown domain");
        }
        r.source.domain = *dom;
        if (j.contains("lang") && !j["lang"].is_null()) {
            r.lang = j["lang"].get<std::string>();
        }
        if (j.contains("scores")) {
            for (const auto& [k, v] : j["scores"].items()) {
                r.scores[k] = v.get<double>();
            }
        }
        if (j.contains("parents")) {
            r.parents = j["parents"].get<std::vector<std::string>>();
        }
        if (j.contains("ops")) {
            for (const auto& o : j["ops"]) {
                OpStamp op;
                op.name = o.at("name").get<std::string>();
                op.version = o.at("version").get<std::string>();
                op.params_hash = hash::parse_hex64(o.at("params_hash").get<std::string>());
                op.timestamp = o.at("timestamp").get<int64_t>();
                r.ops.push_back(std::move(op));
            }
        }
        if (j.contains("meta")) {
            for (const auto& [k, v] : j["meta"].items()) {
                r.meta[k] = v.get<std::string>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("record schema violation: ") + e.what());
    }
    return r;
}

ShardWriter::ShardWriter(const std::filesystem::path& path)
    : path_(path), checksum_state_(hash::kFnvOffset) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) {
        throw IoError("cannot open shard for writing: " + path.string());
    }
}

ShardWriter::~ShardWriter() = default;

void ShardWriter::add(const Record& r) {
    if (!have_tier_) {
        tier_ = r.tier;
        have_tier_ = true;
    } else if (r.tier != tier_) {
        throw ShardTierError("write_shard: mixed tiers " + std::string(tier_name(tier_)) + " and " +
                             std::string(tier_name(r.tier)));
    }
    std::string line = record_to_json_line(r);
    line.push_back('\n');
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
    if (!out_) {
        throw IoError("shard write failed: " + path_.string());
    }
    bytes_ += line.size();
    ++count_;
    checksum_state_ = hash::fnv1a(r.id, checksum_state_);
}

ShardManifest ShardWriter::finish() {
    if (finished_) {
        throw Error("ShardWriter::finish called twice");
    }
    finished_ = true;
    out_.flush();
    out_.close();
    if (out_.fail()) {
        throw IoError("shard close failed: " + path_.string());
    }
    ShardManifest m;
    m.path = path_.filename().string();
    m.tier = tier_;
    m.record_count = count_;
    m.byte_count = bytes_;
    m.checksum = hash::hex64(checksum_state_);
    write_manifest_atomic(m, path_);
    return m;
}

ShardManifest write_shard(const std::vector<Record>& records, const std::filesystem::path& path) {
    ShardWriter w(path);
    for (const auto& r : records) {
        w.add(r);
    }
    return w.finish();
}

ShardReadResult read_shard(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open shard: " + path.string());
    }
    ShardReadResult result;
    std::string line;
    uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            result.records.push_back(record_from_json_line(line));
        } catch (const Error& e) {
            result.errors.push_back({line_no, e.what()});
        }
    }
    return result;
}

static std::filesystem::path manifest_path(const std::filesystem::path& shard_path) {
    auto p = shard_path;
    p += ".manifest.json";
    return p;
}

ShardManifest read_manifest(const std::filesystem::path& shard_path) {
    std::ifstream in(manifest_path(shard_path));
    if (!in) {
        throw IoError("cannot open manifest for " + shard_path.string());
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw Error("malformed manifest for " + shard_path.string());
    }
    ShardManifest m;
    m.path = j.at("path").get<std::string>();
    auto tier = tier_from_name(j.at("tier").get<std::string>());
    if (!tier) {
        throw Error("manifest has unknown tier");
    }
    m.tier = *tier;
    m.record_count = j.at("record_count").get<uint64_t>();
    m.byte_count = j.at("byte_count").get<uint64_t>();
    m.checksum = j.at("checksum").get<std::string>();
    return m;
}

void write_manifest_atomic(const ShardManifest& m, const std::filesystem::path& shard_path) {
    ordered_json j;
    j["path"] = m.path;
    j["tier"] = tier_name(m.tier);
    j["record_count"] = m.record_count;
    j["byte_count"] = m.byte_count;
    j["checksum"] = m.checksum;

    auto final_path = manifest_path(shard_path);
    auto tmp_path = final_path;
    tmp_path += ".tmp";
    {
        std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write manifest: " + tmp_path.string());
        }
        out << j.dump(2) << '\n';
        out.flush();
        if (!out) {
            throw IoError("manifest write failed: " + tmp_path.string());
        }
    }
    std::filesystem::rename(tmp_path, final_path);
}

size_t RecordStore::load(const std::filesystem::path& path) {
    size_t loaded = 0;
    auto load_file = [&](const std::filesystem::path& file) {
        auto result = read_shard(file);
        for (auto& r : result.records) {
            auto id = r.id;
            if (records_.find(id) == records_.end()) {
                records_.emplace(std::move(id), std::move(r));
                ++loaded;
            }
        }
    };
    if (std::filesystem::is_directory(path)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::recursive_directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            load_file(f);
        }
    } else {
        load_file(path);
    }
    return loaded;
}

void RecordStore::insert(Record r) {
    auto id = r.id;
    records_.emplace(std::move(id), std::move(r));
}

const Record* RecordStore::find(std::string_view id) const {
    auto it = records_.find(id);
    return it == records_.end() ? nullptr : &it->second;
}

}  // namespace udt
