#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace udt::oracle {

namespace {

// Code points = bytes that are not UTF-8 continuation bytes.
uint64_t count_chars(const std::string& s) {
    uint64_t n = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80) {
            ++n;
        }
    }
    return n;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    lines.push_back(cur);
    return lines;
}

std::string trim_ascii(const std::string& s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\f' ||
                     s[b] == '\v')) {
        ++b;
    }
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' ||
                     s[e - 1] == '\f' || s[e - 1] == '\v')) {
        --e;
    }
    return s.substr(b, e - b);
}

bool ends_with_terminal(const std::string& line) {
    if (line.empty()) {
        return false;
    }
    char c = line.back();
    return c == '.' || c == '!' || c == '?' || c == '"' || c == '\'';
}

}  // namespace

FilterOutcome filter_verdict(const std::string& text, const FilterParams& params) {
    FilterOutcome out;

    std::vector<std::string> nonempty;
    for (const auto& raw : lines_of(text)) {
        std::string line = trim_ascii(raw);
        if (!line.empty()) {
            nonempty.push_back(line);
        }
    }

    uint64_t punct_lines = 0;
    uint64_t short_lines = 0;
    uint64_t total_line_chars = 0;
    uint64_t dup_chars = 0;
    std::map<std::string, int> seen;
    for (const auto& line : nonempty) {
        uint64_t len = count_chars(line);
        total_line_chars += len;
        if (ends_with_terminal(line)) {
            ++punct_lines;
        }
        if (len < params.short_len) {
            ++short_lines;
        }
        if (seen[line] > 0) {
            dup_chars += len;
        }
        ++seen[line];
    }

    if (!nonempty.empty()) {
        out.punct_ratio = double(punct_lines) / double(nonempty.size());
        out.short_ratio = double(short_lines) / double(nonempty.size());
    }
    if (total_line_chars > 0) {
        out.dup_ratio = double(dup_chars) / double(total_line_chars);
    }

    const uint64_t chars = count_chars(text);
    bool any_terminal = false;
    for (char c : text) {
        if (c == '.' || c == '!' || c == '?' || c == '"' || c == '\'') {
            any_terminal = true;
            break;
        }
    }

    if (!nonempty.empty() && out.punct_ratio <= params.punct_max) {
        out.kept = false;
        out.reason = "punct_ratio";
    } else if (!nonempty.empty() && out.dup_ratio >= params.dup_min) {
        out.kept = false;
        out.reason = "dup_lines";
    } else if (!nonempty.empty() && out.short_ratio >= params.short_max) {
        out.kept = false;
        out.reason = "short_lines";
    } else if (chars < params.min_chars) {
        out.kept = false;
        out.reason = "too_short";
    } else if (chars > params.max_chars) {
        out.kept = false;
        out.reason = "too_long";
    } else if (chars < params.min_chars && !any_terminal) {
        out.kept = false;
        out.reason = "no_terminal_punct";
    }
    return out;
}

std::set<std::string> word_5gram_set(const std::string& text) {
    std::vector<std::string> words;
    std::string lowered = text;
    for (char& c : lowered) {
        if (c >= 'A' && c <= 'Z') {
            c = char(c - 'A' + 'a');
        }
    }
    std::stringstream ss(lowered);
    std::string w;
    while (ss >> w) {
        words.push_back(w);
    }
    std::set<std::string> grams;
    for (size_t i = 0; i + 5 <= words.size(); ++i) {
        grams.insert(words[i] + " " + words[i + 1] + " " + words[i + 2] + " " + words[i + 3] +
                     " " + words[i + 4]);
    }
    return grams;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) {
        return 1.0;
    }
    size_t inter = 0;
    for (const auto& x : a) {
        if (b.count(x)) {
            ++inter;
        }
    }
    size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : double(inter) / double(uni);
}

double jaccard_u64(const std::set<uint64_t>& a, const std::set<uint64_t>& b) {
    if (a.empty() && b.empty()) {
        return 1.0;
    }
    size_t inter = 0;
    for (uint64_t x : a) {
        if (b.count(x)) {
            ++inter;
        }
    }
    size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : double(inter) / double(uni);
}

std::vector<size_t> brute_force_cluster_representatives(const std::vector<std::string>& texts,
                                                        double threshold) {
    std::vector<std::set<std::string>> grams;
    grams.reserve(texts.size());
    for (const auto& t : texts) {
        grams.push_back(word_5gram_set(t));
    }
    std::vector<size_t> parent(texts.size());
    std::iota(parent.begin(), parent.end(), size_t{0});
    const auto find = [&](size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (size_t i = 0; i < texts.size(); ++i) {
        for (size_t j = i + 1; j < texts.size(); ++j) {
            if (jaccard(grams[i], grams[j]) >= threshold) {
                size_t a = find(i);
                size_t b = find(j);
                if (a != b) {
                    parent[std::max(a, b)] = std::min(a, b);
                }
            }
        }
    }
    std::vector<size_t> reps(texts.size());
    for (size_t i = 0; i < texts.size(); ++i) {
        reps[i] = find(i);
    }
    return reps;
}

std::vector<std::pair<std::string, double>> bm25_rank(const std::vector<Bm25Doc>& docs,
                                                      const std::vector<std::string>& terms,
                                                      size_t k, double k1, double b) {
    const double n = double(docs.size());
    double total_len = 0;
    for (const auto& d : docs) {
        total_len += double(d.tokens.size());
    }
    const double avgdl = docs.empty() ? 0.0 : total_len / n;

    std::map<std::string, double> scores;  // doc id -> score
    for (const auto& term : terms) {
        std::string lowered = term;
        for (char& c : lowered) {
            if (c >= 'A' && c <= 'Z') {
                c = char(c - 'A' + 'a');
            }
        }
        // document frequency
        double df = 0;
        for (const auto& d : docs) {
            for (const auto& t : d.tokens) {
                if (t == lowered) {
                    df += 1;
                    break;
                }
            }
        }
        if (df == 0) {
            continue;
        }
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (const auto& d : docs) {
            double tf = 0;
            for (const auto& t : d.tokens) {
                if (t == lowered) {
                    tf += 1;
                }
            }
            if (tf == 0) {
                continue;
            }
            const double dl = double(d.tokens.size());
            const double denom = tf + k1 * (1.0 - b + b * (avgdl > 0 ? dl / avgdl : 0.0));
            scores[d.id] += idf * (tf * (k1 + 1.0)) / denom;
        }
    }

    std::vector<std::pair<std::string, double>> ranked(scores.begin(), scores.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) {
            return x.second > y.second;
        }
        return x.first < y.first;
    });
    if (ranked.size() > k) {
        ranked.resize(k);
    }
    return ranked;
}

bool latex_balance_stack(const std::string& text) {
    std::vector<std::string> envs;
    bool in_inline = false;
    bool in_display = false;
    size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '\\') {
            if (i + 1 < text.size() && text[i + 1] == '$') {
                i += 2;
                continue;
            }
            if (text.compare(i, 7, "\\begin{") == 0) {
                size_t close = text.find('}', i + 7);
                if (close == std::string::npos) {
                    return false;
                }
                envs.push_back(text.substr(i + 7, close - i - 7));
                i = close + 1;
                continue;
            }
            if (text.compare(i, 5, "\\end{") == 0) {
                size_t close = text.find('}', i + 5);
                if (close == std::string::npos) {
                    return false;
                }
                std::string name = text.substr(i + 5, close - i - 5);
                if (envs.empty() || envs.back() != name) {
                    return false;
                }
                envs.pop_back();
                i = close + 1;
                continue;
            }
            i += 2;
            continue;
        }
        if (text[i] == '$') {
            if (!in_inline && i + 1 < text.size() && text[i + 1] == '$') {
                in_display = !in_display;
                i += 2;
                continue;
            }
            if (in_display) {
                return false;
            }
            in_inline = !in_inline;
            ++i;
            continue;
        }
        ++i;
    }
    return !in_inline && !in_display && envs.empty();
}

}  // namespace udt::oracle
