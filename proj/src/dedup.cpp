#include "udt/dedup.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "udt/error.hpp"
#include "udt/hash.hpp"
#include "udt/unicode.hpp"

namespace udt {

namespace {

std::string normalize_for_exact_dedup(const std::string& text) {
    // NFC would belong here; no Unicode normalization tables are available,
    // so normalization is whitespace trim only.
    return std::string(unicode::trim(text));
}

/// Union-find over dense indices.
class DisjointSets {
public:
    explicit DisjointSets(size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), size_t{0});
    }

    size_t find(size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return;
        }
        // Smaller stream index becomes the root, so the representative is
        // always the earliest record.
        if (b < a) {
            std::swap(a, b);
        }
        parent_[b] = a;
    }

private:
    std::vector<size_t> parent_;
};

}  // namespace

ExactDedupResult exact_dedup(const std::vector<Record>& records) {
    ExactDedupResult result;
    std::unordered_map<std::string, std::string> first_by_text;  // normalized text -> kept id
    for (const auto& r : records) {
        std::string key = normalize_for_exact_dedup(r.text);
        auto [it, inserted] = first_by_text.emplace(std::move(key), r.id);
        if (inserted) {
            result.unique.push_back(r);
        } else {
            result.dup_map[r.id] = it->second;
        }
    }
    return result;
}

ShingleSet shingle(const std::string& text, uint64_t n) {
    ShingleSet out;
    if (n == 0) {
        return out;
    }
    std::string lowered = unicode::ascii_lower(text);
    auto words = unicode::split_ws(lowered);
    if (words.size() < n) {
        return out;
    }
    out.hashes.reserve(words.size() - n + 1);
    for (size_t i = 0; i + n <= words.size(); ++i) {
        uint64_t h = hash::kFnvOffset;
        for (size_t k = 0; k < n; ++k) {
            h = hash::fnv1a(words[i + k], h);
            h = hash::fnv1a("\x1f", h);  // token separator
        }
        out.hashes.insert(hash::mix64(h));
    }
    return out;
}

MinHashSignature minhash_signature(const ShingleSet& s, uint64_t k, uint64_t seed) {
    MinHashSignature sig;
    sig.seed = seed;
    sig.values.assign(k, std::numeric_limits<uint64_t>::max());
    // Per-slot keys from a splitmix stream so the k hash functions are
    // independent and reproducible from (seed, i).
    std::vector<uint64_t> keys(k);
    hash::Rng64 rng(seed);
    for (auto& key : keys) {
        key = rng.next();
    }
    for (uint64_t shingle_hash : s.hashes) {
        for (uint64_t i = 0; i < k; ++i) {
            uint64_t h = hash::mix64(shingle_hash ^ keys[i]);
            if (h < sig.values[i]) {
                sig.values[i] = h;
            }
        }
    }
    return sig;
}

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.values.size() != b.values.size()) {
        throw Error("estimate_jaccard: signature length mismatch");
    }
    if (a.seed != b.seed) {
        throw Error("estimate_jaccard: signature seed mismatch");
    }
    if (a.values.empty()) {
        return 0.0;
    }
    size_t agree = 0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        if (a.values[i] == b.values[i]) {
            ++agree;
        }
    }
    return static_cast<double>(agree) / static_cast<double>(a.values.size());
}

namespace {

bool bands_agree(const MinHashSignature& a, const MinHashSignature& b, uint64_t band,
                 uint64_t rows) {
    const size_t offset = band * rows;
    for (size_t i = 0; i < rows; ++i) {
        if (a.values[offset + i] != b.values[offset + i]) {
            return false;
        }
    }
    return true;
}

uint64_t band_key(const MinHashSignature& sig, uint64_t band, uint64_t rows) {
    uint64_t h = hash::kFnvOffset ^ hash::mix64(band + 1);
    for (size_t i = 0; i < rows; ++i) {
        uint64_t v = sig.values[band * rows + i];
        h = hash::fnv1a(std::string_view(reinterpret_cast<const char*>(&v), sizeof(v)), h);
    }
    return h;
}

}  // namespace

std::set<std::pair<std::string, std::string>> lsh_candidates(
    const std::map<std::string, MinHashSignature>& sigs, uint64_t bands, uint64_t rows) {
    std::set<std::pair<std::string, std::string>> out;
    if (sigs.empty()) {
        return out;
    }
    for (const auto& [id, sig] : sigs) {
        if (sig.values.size() != bands * rows) {
            throw Error("lsh_candidates: bands x rows != signature length for record " + id);
        }
    }
    for (uint64_t band = 0; band < bands; ++band) {
        std::unordered_map<uint64_t, std::vector<const std::pair<const std::string,
                                                                 MinHashSignature>*>>
            buckets;
        for (const auto& entry : sigs) {
            buckets[band_key(entry.second, band, rows)].push_back(&entry);
        }
        for (const auto& [key, members] : buckets) {
            for (size_t i = 0; i < members.size(); ++i) {
                for (size_t j = i + 1; j < members.size(); ++j) {
                    // Re-check the actual slots: bucket membership alone could
                    // be a band-key collision.
                    if (!bands_agree(members[i]->second, members[j]->second, band, rows)) {
                        continue;
                    }
                    auto pair = std::minmax(members[i]->first, members[j]->first);
                    out.emplace(pair.first, pair.second);
                }
            }
        }
    }
    return out;
}

NearDedupResult dedup_near(const std::vector<Record>& records, DedupScope scope,
                           const DedupConfig& cfg) {
    if (cfg.bands * cfg.rows != cfg.num_hashes) {
        throw ConfigError("dedup_near: bands x rows must equal num_hashes");
    }
    NearDedupResult result;
    result.report.input = records.size();

    // Partition stream indices by snapshot under per_snapshot scope.
    std::map<std::string, std::vector<size_t>> partitions;
    for (size_t i = 0; i < records.size(); ++i) {
        if (scope == DedupScope::per_snapshot) {
            if (records[i].source.snapshot.empty()) {
                throw Error("dedup_near: record " + records[i].id +
                            " lacks a snapshot id under per_snapshot scope");
            }
            partitions[records[i].source.snapshot].push_back(i);
        } else {
            partitions[""].push_back(i);
        }
    }

    std::vector<ShingleSet> shingles(records.size());
    std::vector<MinHashSignature> sigs(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        shingles[i] = shingle(records[i].text, cfg.shingle_n);
        sigs[i] = minhash_signature(shingles[i], cfg.num_hashes, cfg.seed);
    }

    const auto exact_jaccard = [&](size_t a, size_t b) {
        const auto& sa = shingles[a].hashes;
        const auto& sb = shingles[b].hashes;
        if (sa.empty() && sb.empty()) {
            return 1.0;
        }
        size_t inter = 0;
        const auto& small = sa.size() <= sb.size() ? sa : sb;
        const auto& large = sa.size() <= sb.size() ? sb : sa;
        for (uint64_t h : small) {
            inter += large.count(h);
        }
        size_t uni = sa.size() + sb.size() - inter;
        return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
    };

    DisjointSets components(records.size());
    for (const auto& [snapshot, indices] : partitions) {
        std::map<std::string, MinHashSignature> part_sigs;
        std::map<std::string, size_t> index_of;
        for (size_t i : indices) {
            auto [it, inserted] = index_of.emplace(records[i].id, i);
            if (!inserted) {
                // Same id means same content by construction; trivially united.
                components.unite(it->second, i);
                continue;
            }
            part_sigs.emplace(records[i].id, sigs[i]);
        }
        auto candidates = lsh_candidates(part_sigs, cfg.bands, cfg.rows);
        result.report.candidate_pairs += candidates.size();
        for (const auto& [ida, idb] : candidates) {
            size_t a = index_of.at(ida);
            size_t b = index_of.at(idb);
            double sim = cfg.verify_exact ? exact_jaccard(a, b) : estimate_jaccard(sigs[a], sigs[b]);
            if (sim >= cfg.threshold) {
                ++result.report.verified_pairs;
                components.unite(a, b);
            }
        }
    }

    std::unordered_map<size_t, size_t> component_size;
    for (size_t i = 0; i < records.size(); ++i) {
        ++component_size[components.find(i)];
    }
    for (size_t i = 0; i < records.size(); ++i) {
        size_t root = components.find(i);
        if (root == i) {
            result.kept.push_back(records[i]);
        } else {
            result.dup_map[records[i].id] = records[root].id;
            ++result.report.duplicates;
        }
    }
    result.report.kept = result.kept.size();
    for (const auto& [root, size] : component_size) {
        if (size > 1) {
            ++result.report.clusters;
        }
    }
    return result;
}

}  // namespace udt
