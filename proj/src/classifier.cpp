#include "udt/classifier.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "udt/error.hpp"
#include "udt/hash.hpp"
#include "udt/unicode.hpp"

namespace udt {

namespace {

constexpr char kModelMagic[4] = {'U', 'D', 'Q', 'M'};
constexpr uint32_t kModelVersion = 1;

double sigmoid(double z) {
    if (z >= 0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

int bucket_score(double p, const OrdinalScale& scale) {
    int bucket = 0;
    for (double c : scale.cutpoints) {
        if (c <= p) {
            ++bucket;
        }
    }
    return bucket;
}

FeatureVector featurize(const std::string& text, uint64_t hash_seed) {
    std::string lowered = unicode::ascii_lower(text);
    auto words = unicode::split_ws(lowered);

    std::map<uint32_t, float> counts;
    for (size_t i = 0; i < words.size(); ++i) {
        counts[static_cast<uint32_t>(hash::seeded(words[i], hash_seed) % kFeatureDim)] += 1.0f;
        if (i + 1 < words.size()) {
            uint64_t h = hash::fnv1a(words[i]);
            h = hash::fnv1a("\x1f", h);
            h = hash::fnv1a(words[i + 1], h);
            counts[static_cast<uint32_t>(hash::mix64(h ^ hash_seed) % kFeatureDim)] += 1.0f;
        }
    }

    FeatureVector fv;
    fv.indices.reserve(counts.size());
    fv.values.reserve(counts.size());
    double norm_sq = 0.0;
    for (const auto& [idx, count] : counts) {
        fv.indices.push_back(idx);
        fv.values.push_back(count);
        norm_sq += static_cast<double>(count) * count;
    }
    if (norm_sq > 0.0) {
        const float inv = static_cast<float>(1.0 / std::sqrt(norm_sq));
        for (auto& v : fv.values) {
            v *= inv;
        }
    }
    return fv;
}

QualityModel::QualityModel() : weights_(kFeatureDim, 0.0f) {}

double QualityModel::score(const FeatureVector& features) const {
    double z = bias_;
    for (size_t i = 0; i < features.indices.size(); ++i) {
        z += static_cast<double>(weights_[features.indices[i]]) * features.values[i];
    }
    return sigmoid(z);
}

double QualityModel::score(const std::string& text) const {
    return score(featurize(text, hyper_.hash_seed));
}

QualityModel train_classifier(const std::vector<std::string>& pos,
                              const std::vector<std::string>& neg,
                              const ClassifierHyper& hyper) {
    if (pos.empty() || neg.empty()) {
        throw Error("train_classifier: both seed sets must be nonempty");
    }
    struct Sample {
        FeatureVector features;
        float label;
    };
    std::vector<Sample> samples;
    samples.reserve(pos.size() + neg.size());
    for (const auto& t : pos) {
        samples.push_back({featurize(t, hyper.hash_seed), 1.0f});
    }
    for (const auto& t : neg) {
        samples.push_back({featurize(t, hyper.hash_seed), 0.0f});
    }

    QualityModel model;
    model.hyper_ = hyper;
    auto& w = model.weights_;
    float& b = model.bias_;

    std::vector<size_t> order(samples.size());
    for (size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    hash::Rng64 rng(hyper.rng_seed);
    const uint32_t batch_size = std::max<uint32_t>(1, hyper.batch_size);

    for (uint32_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        // Hand-rolled Fisher-Yates: std::shuffle's draw sequence is
        // implementation-defined, which would break byte-reproducibility.
        for (size_t i = order.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(rng.below(i));
            std::swap(order[i - 1], order[j]);
        }
        double epoch_loss = 0.0;
        for (size_t start = 0; start < order.size(); start += batch_size) {
            const size_t end = std::min(order.size(), start + batch_size);
            const double inv_n = 1.0 / static_cast<double>(end - start);
            // Dense per-batch weight decay.
            if (hyper.l2_penalty > 0.0) {
                const float decay =
                    static_cast<float>(1.0 - hyper.learning_rate * hyper.l2_penalty);
                for (auto& wi : w) {
                    wi *= decay;
                }
            }
            for (size_t k = start; k < end; ++k) {
                const Sample& s = samples[order[k]];
                double z = b;
                for (size_t i = 0; i < s.features.indices.size(); ++i) {
                    z += static_cast<double>(w[s.features.indices[i]]) * s.features.values[i];
                }
                const double p = sigmoid(z);
                const double y = s.label;
                epoch_loss += -(y * std::log(std::max(p, 1e-12)) +
                                (1.0 - y) * std::log(std::max(1.0 - p, 1e-12)));
                const float step =
                    static_cast<float>(hyper.learning_rate * (p - y) * inv_n);
                for (size_t i = 0; i < s.features.indices.size(); ++i) {
                    w[s.features.indices[i]] -= step * s.features.values[i];
                }
                b -= step;
            }
        }
        if (std::isnan(epoch_loss)) {
            throw Error("train_classifier: loss diverged (NaN) at epoch " +
                        std::to_string(epoch));
        }
    }
    return model;
}

OrdinalScale calibrate_scale(const QualityModel& model, const std::vector<Record>& records) {
    if (records.empty()) {
        throw Error("calibrate_scale: empty calibration set");
    }
    std::vector<double> scores;
    scores.reserve(records.size());
    for (const auto& r : records) {
        scores.push_back(model.score(r.text));
    }
    std::sort(scores.begin(), scores.end());
    OrdinalScale scale;
    // Quintiles plus a 95th-percentile top cut, clamped into (0,1) and kept
    // strictly ascending.
    const std::array<double, 5> qs{0.2, 0.4, 0.6, 0.8, 0.95};
    double prev = 0.0;
    for (size_t i = 0; i < qs.size(); ++i) {
        size_t idx = std::min(scores.size() - 1,
                              static_cast<size_t>(qs[i] * static_cast<double>(scores.size())));
        double c = std::clamp(scores[idx], 1e-9, 1.0 - 1e-9);
        if (c <= prev) {
            c = std::nextafter(prev, 1.0);
        }
        scale.cutpoints[i] = c;
        prev = c;
    }
    return scale;
}

namespace {

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
void read_raw(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
}

}  // namespace

void QualityModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write model: " + path.string());
    }
    out.write(kModelMagic, 4);
    write_raw(out, kModelVersion);
    nlohmann::ordered_json h;
    h["epochs"] = hyper_.epochs;
    h["learning_rate"] = hyper_.learning_rate;
    h["l2_penalty"] = hyper_.l2_penalty;
    h["rng_seed"] = hyper_.rng_seed;
    h["batch_size"] = hyper_.batch_size;
    h["hash_seed"] = hyper_.hash_seed;
    h["features"] = "word_1_2grams";
    if (scale_) {
        h["cutpoints"] = scale_->cutpoints;
    }
    const std::string blob = h.dump();
    const uint64_t blob_len = blob.size();
    write_raw(out, blob_len);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    const uint64_t dim = weights_.size();
    write_raw(out, dim);
    out.write(reinterpret_cast<const char*>(weights_.data()),
              static_cast<std::streamsize>(weights_.size() * sizeof(float)));
    write_raw(out, bias_);
    if (!out) {
        throw IoError("model write failed: " + path.string());
    }
}

QualityModel QualityModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open model: " + path.string());
    }
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kModelMagic, 4) != 0) {
        throw Error("not a quality-model file: " + path.string());
    }
    uint32_t version = 0;
    read_raw(in, version);
    if (version != kModelVersion) {
        throw Error("unsupported model version " + std::to_string(version));
    }
    uint64_t blob_len = 0;
    read_raw(in, blob_len);
    std::string blob(blob_len, '\0');
    in.read(blob.data(), static_cast<std::streamsize>(blob_len));
    nlohmann::json h = nlohmann::json::parse(blob, nullptr, false);
    if (h.is_discarded()) {
        throw Error("malformed model hyper blob");
    }
    QualityModel model;
    model.hyper_.epochs = h.value("epochs", 5u);
    model.hyper_.learning_rate = h.value("learning_rate", 0.5);
    model.hyper_.l2_penalty = h.value("l2_penalty", 1e-6);
    model.hyper_.rng_seed = h.value("rng_seed", uint64_t{42});
    model.hyper_.batch_size = h.value("batch_size", 32u);
    model.hyper_.hash_seed = h.value("hash_seed", uint64_t{0});
    if (h.contains("cutpoints")) {
        OrdinalScale scale;
        auto arr = h["cutpoints"].get<std::vector<double>>();
        if (arr.size() != scale.cutpoints.size()) {
            throw Error("model cutpoints must have 5 entries");
        }
        std::copy(arr.begin(), arr.end(), scale.cutpoints.begin());
        model.scale_ = scale;
    }
    uint64_t dim = 0;
    read_raw(in, dim);
    if (dim != kFeatureDim) {
        throw Error("unexpected model dimensionality");
    }
    model.weights_.resize(dim);
    in.read(reinterpret_cast<char*>(model.weights_.data()),
            static_cast<std::streamsize>(dim * sizeof(float)));
    read_raw(in, model.bias_);
    if (!in) {
        throw Error("truncated model file: " + path.string());
    }
    return model;
}

SelectResult select(const std::vector<Record>& shard, const QualityModel& model,
                    const SelectPolicy& policy, const OpStamp& op) {
    if (const auto* top = std::get_if<TopFractionPolicy>(&policy)) {
        if (!(top->fraction > 0.0) || top->fraction > 1.0) {
            throw ConfigError("select: top_fraction must be in (0, 1]");
        }
    }
    SelectResult result;
    struct Scored {
        size_t index;
        double score;
    };
    std::vector<Scored> scored;
    scored.reserve(shard.size());
    for (size_t i = 0; i < shard.size(); ++i) {
        if (shard[i].tier != Tier::L1) {
            throw ShardTierError("select: input record " + shard[i].id + " is not L1");
        }
        double s = model.score(shard[i].text);
        scored.push_back({i, s});
        size_t bin = std::min<size_t>(19, static_cast<size_t>(s * 20.0));
        ++result.report.score_histogram[bin];
    }

    std::vector<bool> keep(shard.size(), false);
    if (const auto* thr = std::get_if<ThresholdPolicy>(&policy)) {
        for (const auto& s : scored) {
            keep[s.index] = s.score >= thr->threshold;
        }
    } else if (const auto* top = std::get_if<TopFractionPolicy>(&policy)) {
        auto ranked = scored;
        std::sort(ranked.begin(), ranked.end(), [&](const Scored& a, const Scored& b) {
            if (a.score != b.score) {
                return a.score > b.score;
            }
            return shard[a.index].id < shard[b.index].id;
        });
        size_t k = static_cast<size_t>(
            std::llround(top->fraction * static_cast<double>(ranked.size())));
        k = std::min(k, ranked.size());
        for (size_t i = 0; i < k; ++i) {
            keep[ranked[i].index] = true;
        }
    } else {
        const auto& mb = std::get<MinBucketPolicy>(policy);
        for (const auto& s : scored) {
            keep[s.index] = bucket_score(s.score, mb.scale) >= mb.min_bucket;
        }
    }

    for (const auto& s : scored) {
        if (!keep[s.index]) {
            ++result.report.rejected;
            continue;
        }
        Record promoted = promote(shard[s.index], Tier::L2, op, shard[s.index].text);
        promoted.scores = shard[s.index].scores;
        promoted.scores["quality"] = s.score;
        result.kept.push_back(std::move(promoted));
        ++result.report.kept;
    }
    return result;
}

EvalMetrics evaluate_classifier(const QualityModel& model,
                                const std::vector<LabeledExample>& holdout) {
    if (holdout.empty()) {
        throw Error("evaluate_classifier: empty holdout");
    }
    uint64_t tp = 0;
    uint64_t fp = 0;
    uint64_t tn = 0;
    uint64_t fn = 0;
    bool saw_pos = false;
    bool saw_neg = false;
    for (const auto& ex : holdout) {
        (ex.positive ? saw_pos : saw_neg) = true;
        const bool predicted = model.score(ex.text) >= 0.5;
        if (predicted && ex.positive) {
            ++tp;
        } else if (predicted && !ex.positive) {
            ++fp;
        } else if (!predicted && !ex.positive) {
            ++tn;
        } else {
            ++fn;
        }
    }
    if (!saw_pos || !saw_neg) {
        throw Error("evaluate_classifier: holdout must contain both labels");
    }
    EvalMetrics m;
    m.precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    m.recall = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    m.f1 = (m.precision + m.recall) == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(holdout.size());
    return m;
}

}  // namespace udt
