#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "udt/record.hpp"

namespace udt {

inline constexpr uint32_t kFeatureDim = 1u << 20;

/// Sparse L2-normalized hashed bag of word unigrams + bigrams.
struct FeatureVector {
    std::vector<uint32_t> indices;  // strictly increasing
    std::vector<float> values;
};

struct ClassifierHyper {
    uint32_t epochs = 5;
    double learning_rate = 0.5;
    double l2_penalty = 1e-6;
    uint64_t rng_seed = 42;
    uint32_t batch_size = 32;
    uint64_t hash_seed = 0;
};

/// Probability -> ordinal score 0..5 via five ascending cutpoints in (0,1).
struct OrdinalScale {
    std::array<double, 5> cutpoints{0.2, 0.4, 0.6, 0.8, 0.9};
};

/// Bucket = number of cutpoints <= p.
int bucket_score(double p, const OrdinalScale& scale);

/// Linear bag-of-n-grams quality classifier over a 2^20 hashed feature
/// space. Training is single-threaded and bit-reproducible by contract.
class QualityModel {
public:
    QualityModel();

    double score(const std::string& text) const;
    double score(const FeatureVector& features) const;

    const ClassifierHyper& hyper() const { return hyper_; }
    const std::vector<float>& weights() const { return weights_; }
    float bias() const { return bias_; }
    const std::optional<OrdinalScale>& scale() const { return scale_; }
    void set_scale(OrdinalScale s) { scale_ = s; }

    void save(const std::filesystem::path& path) const;
    static QualityModel load(const std::filesystem::path& path);

    friend QualityModel train_classifier(const std::vector<std::string>& pos,
                                         const std::vector<std::string>& neg,
                                         const ClassifierHyper& hyper);

private:
    std::vector<float> weights_;
    float bias_ = 0.0f;
    ClassifierHyper hyper_;
    std::optional<OrdinalScale> scale_;
};

FeatureVector featurize(const std::string& text, uint64_t hash_seed = 0);

/// Logistic regression by mini-batch SGD with per-epoch Fisher-Yates
/// shuffling from rng_seed. Identical (inputs, hyper) give byte-identical
/// serialized models. Throws on empty seed sets and on NaN loss (naming the
/// epoch).
QualityModel train_classifier(const std::vector<std::string>& pos,
                              const std::vector<std::string>& neg,
                              const ClassifierHyper& hyper = {});

/// Quintile cutpoints of the model's scores over a calibration set.
OrdinalScale calibrate_scale(const QualityModel& model, const std::vector<Record>& records);

struct ThresholdPolicy {
    double threshold = 0.5;
};
struct TopFractionPolicy {
    double fraction = 0.1;  // in (0, 1]
};
struct MinBucketPolicy {
    int min_bucket = 4;
    OrdinalScale scale;
};
using SelectPolicy = std::variant<ThresholdPolicy, TopFractionPolicy, MinBucketPolicy>;

struct SelectReport {
    uint64_t kept = 0;
    uint64_t rejected = 0;
    std::array<uint64_t, 20> score_histogram{};  // [i/20, (i+1)/20)
};

struct SelectResult {
    std::vector<Record> kept;  // tier L2, scores["quality"] annotated
    SelectReport report;
};

/// L1 -> L2 selection. top_fraction keeps round(n * fraction) records,
/// score ties broken by ascending record id.
SelectResult select(const std::vector<Record>& shard, const QualityModel& model,
                    const SelectPolicy& policy, const OpStamp& op);

struct LabeledExample {
    std::string text;
    bool positive = false;
};

struct EvalMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
};

/// Standard metrics at the 0.5 decision threshold. Throws if the holdout is
/// empty or single-class.
EvalMetrics evaluate_classifier(const QualityModel& model,
                                const std::vector<LabeledExample>& holdout);

}  // namespace udt
