#pragma once

// Independent straight-line reference implementations used as test oracles.
// Nothing here may call into the library paths it checks.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace udt::oracle {

struct FilterOutcome {
    bool kept = true;
    std::string reason;  // empty when kept
    double punct_ratio = 0.0;
    double dup_ratio = 0.0;
    double short_ratio = 0.0;
};

struct FilterParams {
    double punct_max = 0.12;
    double dup_min = 0.10;
    double short_max = 0.67;
    uint64_t short_len = 30;
    uint64_t min_chars = 200;
    uint64_t max_chars = 1000000;
};

/// Straight-line restatement of the document quality rules.
FilterOutcome filter_verdict(const std::string& text, const FilterParams& params);

/// Word 5-gram set as literal strings (no hashing).
std::set<std::string> word_5gram_set(const std::string& text);

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);
double jaccard_u64(const std::set<uint64_t>& a, const std::set<uint64_t>& b);

/// All-pairs Jaccard clustering at `threshold` via union-find; returns the
/// kept index per input (earliest member of each component).
std::vector<size_t> brute_force_cluster_representatives(const std::vector<std::string>& texts,
                                                        double threshold);

struct Bm25Doc {
    std::string id;
    std::vector<std::string> tokens;
};

/// Textbook BM25, one term-at-a-time accumulation.
std::vector<std::pair<std::string, double>> bm25_rank(const std::vector<Bm25Doc>& docs,
                                                      const std::vector<std::string>& terms,
                                                      size_t k, double k1 = 1.2, double b = 0.75);

/// Brute-force delimiter stack simulator for LaTeX balance. `tokens` is the
/// token string built from {"$", "$$", "\\begin{x}", "\\end{x}", words}.
bool latex_balance_stack(const std::string& text);

}  // namespace udt::oracle
