#include "udt/filter.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>
#include <unordered_map>

#include "udt/error.hpp"
#include "udt/unicode.hpp"

namespace udt {

std::string_view reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::punct_ratio: return "punct_ratio";
        case RejectReason::dup_lines: return "dup_lines";
        case RejectReason::short_lines: return "short_lines";
        case RejectReason::too_short: return "too_short";
        case RejectReason::too_long: return "too_long";
        case RejectReason::language: return "language";
        case RejectReason::no_terminal_punct: return "no_terminal_punct";
    }
    return "unknown";
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

std::vector<std::regex> compile_patterns(const std::vector<std::string>& patterns) {
    std::vector<std::regex> out;
    out.reserve(patterns.size());
    for (const auto& p : patterns) {
        out.emplace_back(p, std::regex::ECMAScript);
    }
    return out;
}

}  // namespace

std::string repair_format(const std::string& text, const FilterConfig& cfg) {
    // Pass 1: strip control codes and zero-width code points.
    std::string cleaned;
    cleaned.reserve(text.size());
    size_t pos = 0;
    while (pos < text.size()) {
        uint32_t cp = unicode::decode(text, pos);
        if (cp == '\n' || cp == '\t') {
            unicode::append(cleaned, cp);
            continue;
        }
        if (unicode::is_control(cp) || unicode::is_zero_width(cp)) {
            continue;
        }
        unicode::append(cleaned, cp);
    }

    // Pass 2: drop lines exactly matching a boilerplate pattern.
    const auto patterns = compile_patterns(cfg.boilerplate_line_patterns);
    std::string kept;
    kept.reserve(cleaned.size());
    bool first = true;
    for (auto line : split_lines(cleaned)) {
        bool drop = false;
        for (const auto& re : patterns) {
            if (std::regex_match(line.begin(), line.end(), re)) {
                drop = true;
                break;
            }
        }
        if (drop) {
            continue;
        }
        if (!first) {
            kept.push_back('\n');
        }
        kept.append(line);
        first = false;
    }

    // Pass 3: collapse runs of 3+ newlines to exactly 2.
    std::string out;
    out.reserve(kept.size());
    size_t i = 0;
    while (i < kept.size()) {
        if (kept[i] != '\n') {
            out.push_back(kept[i]);
            ++i;
            continue;
        }
        size_t run = 0;
        while (i < kept.size() && kept[i] == '\n') {
            ++run;
            ++i;
        }
        out.append(std::min<size_t>(run, 2), '\n');
    }
    return out;
}

std::string c4_line_filter(const std::string& text, const std::vector<std::string>& blacklist) {
    std::vector<std::string> lowered;
    lowered.reserve(blacklist.size());
    for (const auto& phrase : blacklist) {
        lowered.push_back(unicode::ascii_lower(phrase));
    }
    std::string out;
    out.reserve(text.size());
    bool first = true;
    for (auto line : split_lines(text)) {
        std::string low = unicode::ascii_lower(line);
        bool hit = false;
        for (const auto& phrase : lowered) {
            if (!phrase.empty() && low.find(phrase) != std::string::npos) {
                hit = true;
                break;
            }
        }
        if (hit) {
            continue;
        }
        if (!first) {
            out.push_back('\n');
        }
        out.append(line);
        first = false;
    }
    return out;
}

FilterVerdict doc_quality_filter(const std::string& text, const FilterConfig& cfg) {
    FilterVerdict v;

    const std::set<uint32_t> terminal(cfg.terminal_punct.begin(), cfg.terminal_punct.end());
    const uint64_t total_chars = unicode::count_codepoints(text);

    uint64_t nonempty_lines = 0;
    uint64_t punct_lines = 0;
    uint64_t short_lines = 0;
    uint64_t line_chars_total = 0;
    uint64_t dup_chars = 0;
    std::unordered_map<std::string_view, uint64_t> line_counts;

    for (auto raw_line : split_lines(text)) {
        auto line = unicode::trim(raw_line);
        if (line.empty()) {
            continue;
        }
        ++nonempty_lines;
        const uint64_t len = unicode::count_codepoints(line);
        line_chars_total += len;
        if (len < cfg.short_line_len) {
            ++short_lines;
        }
        // Last code point of the trimmed line.
        uint32_t last_cp = 0;
        size_t p = 0;
        while (p < line.size()) {
            last_cp = unicode::decode(line, p);
        }
        if (terminal.count(last_cp)) {
            ++punct_lines;
        }
        auto& n = line_counts[line];
        if (n > 0) {
            dup_chars += len;
        }
        ++n;
    }

    const double punct_ratio =
        nonempty_lines == 0 ? 0.0 : static_cast<double>(punct_lines) / nonempty_lines;
    const double dup_ratio =
        line_chars_total == 0 ? 0.0 : static_cast<double>(dup_chars) / line_chars_total;
    const double short_ratio =
        nonempty_lines == 0 ? 0.0 : static_cast<double>(short_lines) / nonempty_lines;

    v.metrics["punct_ratio"] = punct_ratio;
    v.metrics["dup_line_ratio"] = dup_ratio;
    v.metrics["short_line_ratio"] = short_ratio;
    v.metrics["char_count"] = static_cast<double>(total_chars);

    const auto reject = [&](RejectReason r) {
        v.kept = false;
        v.reason = r;
    };

    bool has_terminal_anywhere = false;
    {
        size_t p = 0;
        while (p < text.size()) {
            if (terminal.count(unicode::decode(text, p))) {
                has_terminal_anywhere = true;
                break;
            }
        }
    }

    // Ratio checks only apply to documents with at least one nonempty line;
    // degenerate documents fall through to the length checks.
    if (nonempty_lines > 0 && punct_ratio <= cfg.line_end_punct_max) {
        reject(RejectReason::punct_ratio);
    } else if (nonempty_lines > 0 && dup_ratio >= cfg.dup_line_char_min) {
        reject(RejectReason::dup_lines);
    } else if (nonempty_lines > 0 && short_ratio >= cfg.short_line_ratio_max) {
        reject(RejectReason::short_lines);
    } else if (total_chars < cfg.min_doc_chars) {
        reject(RejectReason::too_short);
    } else if (total_chars > cfg.max_doc_chars) {
        reject(RejectReason::too_long);
    } else if (total_chars < cfg.min_doc_chars && !has_terminal_anywhere) {
        reject(RejectReason::no_terminal_punct);
    }
    return v;
}

namespace {

std::map<std::string, double> trigram_counts(const std::string& text) {
    std::map<std::string, double> counts;
    // Sliding window of 3 code points over the lowercased text.
    std::string lowered = unicode::ascii_lower(text);
    std::vector<std::pair<size_t, size_t>> cps;  // (byte offset, byte len)
    size_t pos = 0;
    while (pos < lowered.size()) {
        size_t start = pos;
        unicode::decode(lowered, pos);
        cps.emplace_back(start, pos - start);
    }
    for (size_t i = 0; i + 3 <= cps.size(); ++i) {
        size_t begin = cps[i].first;
        size_t end = cps[i + 2].first + cps[i + 2].second;
        counts[lowered.substr(begin, end - begin)] += 1.0;
    }
    return counts;
}

void l1_normalize(std::map<std::string, double>& freqs) {
    double total = 0.0;
    for (const auto& [k, v] : freqs) {
        total += v;
    }
    if (total > 0.0) {
        for (auto& [k, v] : freqs) {
            v /= total;
        }
    }
}

double cosine(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (const auto& [k, v] : a) {
        na += v * v;
        auto it = b.find(k);
        if (it != b.end()) {
            dot += v * it->second;
        }
    }
    for (const auto& [k, v] : b) {
        nb += v * v;
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

LangProfile LangProfile::train(const std::string& lang, const std::string& text) {
    LangProfile p;
    p.lang = lang;
    p.trigram_freqs = trigram_counts(text);
    l1_normalize(p.trigram_freqs);
    return p;
}

std::pair<std::string, double> detect_language(const std::string& text,
                                               const std::vector<LangProfile>& profiles) {
    if (unicode::count_codepoints(text) < 3 || profiles.empty()) {
        return {"und", 0.0};
    }
    auto freqs = trigram_counts(text);
    l1_normalize(freqs);
    std::string best_lang = "und";
    double best_sim = -1.0;
    std::vector<const LangProfile*> sorted;
    sorted.reserve(profiles.size());
    for (const auto& p : profiles) {
        sorted.push_back(&p);
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const LangProfile* a, const LangProfile* b) { return a->lang < b->lang; });
    for (const auto* p : sorted) {
        double sim = cosine(freqs, p->trigram_freqs);
        if (sim > best_sim) {
            best_sim = sim;
            best_lang = p->lang;
        }
    }
    return {best_lang, std::max(0.0, best_sim)};
}

L1PipelineResult run_l1_pipeline(const std::vector<Record>& shard, const FilterConfig& cfg,
                                 const std::string& target_lang,
                                 const std::vector<LangProfile>& profiles, const OpStamp& op) {
    L1PipelineResult result;
    uint64_t tokens_in = 0;
    uint64_t tokens_kept = 0;
    for (const auto& record : shard) {
        if (record.tier != Tier::L0) {
            throw ShardTierError("run_l1_pipeline: input record " + record.id + " is not L0");
        }
        ++result.report.total;
        tokens_in += unicode::split_ws(record.text).size();

        std::string repaired = repair_format(record.text, cfg);
        repaired = c4_line_filter(repaired, cfg.blacklist_phrases);

        std::string lang;
        if (!profiles.empty()) {
            auto [detected, confidence] = detect_language(repaired, profiles);
            (void)confidence;
            if (detected != target_lang) {
                ++result.report.rejected[std::string(
                    reject_reason_name(RejectReason::language))];
                continue;
            }
            lang = detected;
        }

        FilterVerdict verdict = doc_quality_filter(repaired, cfg);
        if (!verdict.kept) {
            ++result.report.rejected[std::string(reject_reason_name(*verdict.reason))];
            continue;
        }

        tokens_kept += unicode::split_ws(repaired).size();
        Record promoted = promote(record, Tier::L1, op, std::move(repaired));
        if (!lang.empty()) {
            promoted.lang = lang;
        }
        result.kept.push_back(std::move(promoted));
        ++result.report.kept;
    }
    result.report.token_estimate_removed_fraction =
        tokens_in == 0 ? 0.0 : 1.0 - static_cast<double>(tokens_kept) / tokens_in;
    return result;
}

}  // namespace udt
