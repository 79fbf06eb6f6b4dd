#include "udt/refine.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <thread>
#include <unordered_set>

#include "udt/dedup.hpp"
#include "udt/error.hpp"
#include "udt/hash.hpp"
#include "udt/unicode.hpp"

namespace udt {

const char* const kPromptTemplateVersion = "1";

std::string_view validation_reason_name(ValidationReason r) {
    switch (r) {
        case ValidationReason::latex_unbalanced: return "latex_unbalanced";
        case ValidationReason::truncated: return "truncated";
        case ValidationReason::too_short: return "too_short";
        case ValidationReason::low_density: return "low_density";
        case ValidationReason::seed_duplicate: return "seed_duplicate";
        case ValidationReason::semantic_drift: return "semantic_drift";
    }
    return "unknown";
}

namespace {

struct PersonaPair {
    const char* speaker_a;
    const char* speaker_b;
};

constexpr PersonaPair kPersonaPairs[7] = {
    {"a patient teacher", "a curious student"},
    {"a university professor", "a first-year undergraduate"},
    {"a private tutor", "a struggling pupil"},
    {"a research mentor", "an apprentice"},
    {"an exam coach", "an anxious candidate"},
    {"a science communicator", "a skeptical reader"},
    {"a librarian", "a visitor with a deadline"},
};

std::string replace_all(std::string text, std::string_view needle, std::string_view value) {
    size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return text;
}

}  // namespace

std::string_view prompt_template(TaskKind kind) {
    switch (kind) {
        case TaskKind::edit:
            return "Clean up the following document. Remove navigation noise, advertisements "
                   "and broken formatting. Keep the original meaning and wording wherever "
                   "possible.\n---BEGIN SOURCE---\n{SEED}\n---END SOURCE---\nReturn only the "
                   "cleaned document.";
        case TaskKind::qa_stratified:
            return "Write question-and-answer pairs at {LEVEL} school level based on the "
                   "material below. Show the reasoning for each answer step by step.\n"
                   "---BEGIN SOURCE---\n{SEED}\n---END SOURCE---";
        case TaskKind::dialogue:
            return "Write a multi-turn dialogue between {PERSONA_A} and {PERSONA_B} working "
                   "through the material below. Keep the conversation rigorous.\n"
                   "---BEGIN SOURCE---\n{SEED}\n---END SOURCE---";
        case TaskKind::style_rewrite:
            return "Rewrite the material below in {STYLE} style, preserving all the technical "
                   "content.\n---BEGIN SOURCE---\n{SEED}\n---END SOURCE---";
        case TaskKind::textbook_module:
            return "Turn the material below into a textbook module: state the definitions and "
                   "theorems it contains, explain them, and add practice problems of increasing "
                   "difficulty.\n---BEGIN SOURCE---\n{SEED}\n---END SOURCE---";
        case TaskKind::persona:
            return "Write professional teaching material based on the source below, voiced by "
                   "{PERSONA_A} preparing a lesson for {PERSONA_B}.\n"
                   "---BEGIN SOURCE---\n{SEED}\n---END SOURCE---";
    }
    return "";
}

namespace {

// Math-span scanner shared by normalize_seed / latex_balanced. "$$" toggles
// display spans, "$" inline spans; "\$" is literal; \begin/\end tracked by
// name on a stack.
enum class MathState { none, inline_span, display_span };

bool parse_env_name(const std::string& text, size_t pos, std::string& name, size_t& end) {
    // pos points at '{' after \begin or \end.
    if (pos >= text.size() || text[pos] != '{') {
        return false;
    }
    size_t close = text.find('}', pos + 1);
    if (close == std::string::npos) {
        return false;
    }
    name = text.substr(pos + 1, close - pos - 1);
    end = close + 1;
    return true;
}

}  // namespace

bool latex_balanced(const std::string& text) {
    MathState state = MathState::none;
    std::vector<std::string> env_stack;
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\\') {
            if (i + 1 < text.size() && text[i + 1] == '$') {
                i += 2;
                continue;
            }
            if (text.compare(i, 7, "\\begin{") == 0) {
                std::string name;
                size_t end;
                if (!parse_env_name(text, i + 6, name, end)) {
                    return false;
                }
                env_stack.push_back(std::move(name));
                i = end;
                continue;
            }
            if (text.compare(i, 5, "\\end{") == 0) {
                std::string name;
                size_t end;
                if (!parse_env_name(text, i + 4, name, end)) {
                    return false;
                }
                if (env_stack.empty() || env_stack.back() != name) {
                    return false;
                }
                env_stack.pop_back();
                i = end;
                continue;
            }
            i += 2;  // other escape
            continue;
        }
        if (c == '$') {
            if (state != MathState::inline_span && i + 1 < text.size() && text[i + 1] == '$') {
                state = (state == MathState::display_span) ? MathState::none
                                                           : MathState::display_span;
                i += 2;
                continue;
            }
            if (state == MathState::display_span) {
                // Lone $ inside $$ ... $$: unbalanced.
                return false;
            }
            state = (state == MathState::inline_span) ? MathState::none : MathState::inline_span;
            ++i;
            continue;
        }
        ++i;
    }
    return state == MathState::none && env_stack.empty();
}

std::string normalize_seed(const std::string& text) {
    // Pass 1: delimiter normalization.
    std::string pass1;
    pass1.reserve(text.size());
    size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '\\' && i + 1 < text.size()) {
            char n = text[i + 1];
            if (n == '(' || n == ')') {
                pass1.push_back('$');
                i += 2;
                continue;
            }
            if (n == '[' || n == ']') {
                pass1.append("$$");
                i += 2;
                continue;
            }
            pass1.push_back(text[i]);
            pass1.push_back(n);
            i += 2;
            continue;
        }
        pass1.push_back(text[i]);
        ++i;
    }

    // Pass 2: inside math spans, map Unicode math symbols to macros and
    // collapse whitespace runs.
    std::string out;
    out.reserve(pass1.size());
    MathState state = MathState::none;
    size_t pos = 0;
    bool pending_space = false;
    const auto flush_space = [&]() {
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
    };
    const auto emit_macro = [&](std::string_view macro, size_t next_pos) {
        flush_space();
        out.append(macro);
        // Keep the macro from fusing with a following letter.
        if (next_pos < pass1.size()) {
            char nc = pass1[next_pos];
            if ((nc >= 'a' && nc <= 'z') || (nc >= 'A' && nc <= 'Z') ||
                (nc >= '0' && nc <= '9')) {
                out.push_back(' ');
            }
        }
    };
    while (pos < pass1.size()) {
        if (pass1[pos] == '\\' && pos + 1 < pass1.size() && pass1[pos + 1] == '$') {
            flush_space();
            out.append("\\$");
            pos += 2;
            continue;
        }
        if (pass1[pos] == '$') {
            flush_space();
            if (state != MathState::inline_span && pos + 1 < pass1.size() &&
                pass1[pos + 1] == '$') {
                state = (state == MathState::display_span) ? MathState::none
                                                           : MathState::display_span;
                out.append("$$");
                pos += 2;
                continue;
            }
            if (state == MathState::display_span) {
                out.push_back('$');
                ++pos;
                continue;
            }
            state = (state == MathState::inline_span) ? MathState::none : MathState::inline_span;
            out.push_back('$');
            ++pos;
            continue;
        }
        if (state == MathState::none) {
            out.push_back(pass1[pos]);
            ++pos;
            continue;
        }
        size_t next = pos;
        uint32_t cp = unicode::decode(pass1, next);
        if (unicode::is_space(cp)) {
            pending_space = true;
            pos = next;
            continue;
        }
        switch (cp) {
            case 0x00D7: emit_macro("\\times", next); break;  // ×
            case 0x00F7: emit_macro("\\div", next); break;    // ÷
            case 0x2264: emit_macro("\\le", next); break;     // ≤
            case 0x2265: emit_macro("\\ge", next); break;     // ≥
            case 0x2260: emit_macro("\\ne", next); break;     // ≠
            case 0x03C0: emit_macro("\\pi", next); break;     // π
            default:
                flush_space();
                out.append(pass1, pos, next - pos);
                break;
        }
        pos = next;
    }
    return out;
}

RefinementRequest plan_refinement(const Record& seed, TaskKind kind, uint64_t rng_seed,
                                  const RefineConfig& cfg) {
    RefinementRequest req;
    req.seed_id = seed.id;
    req.kind = kind;
    req.max_output_chars = cfg.max_output_chars;

    const auto draw = [&](std::string_view what, uint64_t n) {
        uint64_t h = hash::fnv1a(seed.id);
        h = hash::fnv1a(what, h);
        return hash::mix64(h ^ rng_seed) % n;
    };

    std::string prompt(prompt_template(kind));
    switch (kind) {
        case TaskKind::qa_stratified: {
            req.level = static_cast<GradeLevel>(draw("level", 4));
            prompt = replace_all(std::move(prompt), "{LEVEL}", grade_level_name(*req.level));
            break;
        }
        case TaskKind::style_rewrite: {
            req.style = static_cast<RewriteStyle>(draw("style", 3));
            prompt = replace_all(std::move(prompt), "{STYLE}", rewrite_style_name(*req.style));
            break;
        }
        case TaskKind::dialogue:
        case TaskKind::persona: {
            req.persona_pair = static_cast<int>(draw("persona", 7));
            const auto& pair = kPersonaPairs[*req.persona_pair];
            prompt = replace_all(std::move(prompt), "{PERSONA_A}", pair.speaker_a);
            prompt = replace_all(std::move(prompt), "{PERSONA_B}", pair.speaker_b);
            break;
        }
        default:
            break;
    }
    req.prompt = replace_all(std::move(prompt), "{SEED}", seed.text);
    return req;
}

TransformOutcome apply_transformer(const RefinementRequest& request, GenerationClient& client,
                                   const RefineConfig& cfg) {
    TransformOutcome outcome;
    int backoff_ms = cfg.retry_backoff_ms;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        if (attempt > 0 && backoff_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        GenerationResult res = client.generate(request);
        if (!res.ok) {
            outcome.error = res.error;
            continue;
        }
        outcome.ok = true;
        outcome.error.clear();
        outcome.text = std::move(res.text);
        if (unicode::count_codepoints(outcome.text) > request.max_output_chars) {
            // Cut at a code point boundary.
            size_t byte_end = 0;
            size_t seen = 0;
            while (byte_end < outcome.text.size() && seen < request.max_output_chars) {
                unicode::decode(outcome.text, byte_end);
                ++seen;
            }
            outcome.text.resize(byte_end);
            outcome.over_length = true;
        }
        return outcome;
    }
    outcome.ok = false;
    return outcome;
}

namespace {

const std::unordered_set<std::string_view>& stopwords() {
    static const std::unordered_set<std::string_view> words = {
        "the", "and", "for", "are", "was", "were", "been", "being", "have", "has", "had",
        "having", "does", "did", "doing", "will", "would", "can", "could", "should", "this",
        "that", "these", "those", "with", "about", "into", "through", "during", "before",
        "after", "above", "below", "from", "down", "out", "off", "over", "under", "again",
        "further", "once", "here", "there", "all", "any", "both", "each", "few", "more",
        "most", "other", "some", "such", "nor", "not", "only", "own", "same", "than", "too",
        "very", "just", "its", "his", "her", "their", "our", "your", "you", "they", "them",
        "she", "him", "what", "which", "who", "whom", "why", "how", "when", "where", "then",
        "but", "because", "while",
    };
    return words;
}

std::string strip_punct(std::string_view word) {
    size_t begin = 0;
    size_t end = word.size();
    const auto is_word_char = [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
               static_cast<unsigned char>(c) >= 0x80;
    };
    while (begin < end && !is_word_char(word[begin])) {
        ++begin;
    }
    while (end > begin && !is_word_char(word[end - 1])) {
        --end;
    }
    return std::string(word.substr(begin, end - begin));
}

std::set<std::string> content_words(const std::string& text) {
    std::set<std::string> out;
    std::string lowered = unicode::ascii_lower(text);
    for (auto token : unicode::split_ws(lowered)) {
        std::string word = strip_punct(token);
        if (word.size() < 3 || stopwords().count(word)) {
            continue;
        }
        out.insert(std::move(word));
    }
    return out;
}

bool is_sentence_terminal(uint32_t cp) {
    switch (cp) {
        case '.':
        case '!':
        case '?':
        case '"':
        case '\'':
        case 0x3002:  // 。
        case 0xFF01:  // ！
        case 0xFF1F:  // ？
            return true;
        default:
            return false;
    }
}

double exact_shingle_jaccard(const ShingleSet& a, const ShingleSet& b) {
    if (a.hashes.empty() && b.hashes.empty()) {
        return 1.0;
    }
    size_t inter = 0;
    const auto& small = a.hashes.size() <= b.hashes.size() ? a.hashes : b.hashes;
    const auto& large = a.hashes.size() <= b.hashes.size() ? b.hashes : a.hashes;
    for (uint64_t h : small) {
        inter += large.count(h);
    }
    size_t uni = a.hashes.size() + b.hashes.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

ValidationVerdict validate_output(const std::string& candidate, const Record& seed, TaskKind kind,
                                  const RefineConfig& cfg, bool known_truncated) {
    ValidationVerdict verdict;
    const bool balanced = latex_balanced(candidate);
    if (!balanced) {
        verdict.reasons.push_back(ValidationReason::latex_unbalanced);
    }

    // Truncation: the text must end at a sentence boundary or exactly at the
    // close of a complete math span.
    bool ends_clean = false;
    auto trimmed = unicode::trim(candidate);
    if (!trimmed.empty()) {
        uint32_t last_cp = 0;
        size_t p = 0;
        while (p < trimmed.size()) {
            last_cp = unicode::decode(trimmed, p);
        }
        ends_clean = is_sentence_terminal(last_cp) || (last_cp == '$' && balanced);
    }
    if (known_truncated || !ends_clean) {
        verdict.reasons.push_back(ValidationReason::truncated);
    }

    if (unicode::count_codepoints(candidate) < cfg.min_chars) {
        verdict.reasons.push_back(ValidationReason::too_short);
    }

    // Density: alphanumeric fraction over all code points. Non-ASCII letters
    // count as word characters (no Unicode category tables; CJK text must
    // not be penalized).
    {
        uint64_t total = 0;
        uint64_t alnum = 0;
        size_t p = 0;
        while (p < candidate.size()) {
            uint32_t cp = unicode::decode(candidate, p);
            ++total;
            const bool word_char = (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
                                   (cp >= '0' && cp <= '9') ||
                                   (cp >= 0x80 && !unicode::is_space(cp));
            if (word_char) {
                ++alnum;
            }
        }
        const double density = total == 0 ? 0.0 : static_cast<double>(alnum) / total;
        if (density < cfg.min_alnum_fraction) {
            verdict.reasons.push_back(ValidationReason::low_density);
        }
    }

    if (kind != TaskKind::edit) {
        double j = exact_shingle_jaccard(shingle(candidate), shingle(seed.text));
        if (j >= cfg.seed_duplicate_jaccard_max) {
            verdict.reasons.push_back(ValidationReason::seed_duplicate);
        }
    } else {
        auto seed_words = content_words(seed.text);
        if (!seed_words.empty()) {
            auto cand_words = content_words(candidate);
            size_t present = 0;
            for (const auto& w : seed_words) {
                present += cand_words.count(w);
            }
            const double overlap =
                static_cast<double>(present) / static_cast<double>(seed_words.size());
            if (overlap < cfg.edit_overlap_min) {
                verdict.reasons.push_back(ValidationReason::semantic_drift);
            }
        }
    }

    verdict.accepted = verdict.reasons.empty();
    return verdict;
}

L3PipelineResult run_l3_pipeline(const std::vector<Record>& shard,
                                 const std::vector<TaskKind>& kinds, GenerationClient& client,
                                 const RefineConfig& cfg, uint64_t rng_seed, const OpStamp& op) {
    L3PipelineResult result;
    for (const auto& seed : shard) {
        if (seed.tier != Tier::L2) {
            throw ShardTierError("run_l3_pipeline: input record " + seed.id + " is not L2");
        }
        for (TaskKind kind : kinds) {
            ++result.report.tasks;
            RefinementRequest request = plan_refinement(seed, kind, rng_seed, cfg);
            TransformOutcome outcome = apply_transformer(request, client, cfg);
            if (!outcome.ok) {
                ++result.report.failed_tasks;
                continue;
            }
            ValidationVerdict verdict =
                validate_output(outcome.text, seed, kind, cfg, outcome.over_length);
            const std::string kind_key(task_kind_name(kind));
            if (!verdict.accepted) {
                for (auto reason : verdict.reasons) {
                    ++result.report.rejections[kind_key][std::string(
                        validation_reason_name(reason))];
                }
                continue;
            }
            // Distinct params hash per kind so parallel kinds over one seed
            // cannot collide on the derived id.
            OpStamp kind_op = op;
            kind_op.params_hash =
                hash::mix64(op.params_hash ^ hash::fnv1a(task_kind_name(kind)));
            Record refined = promote(seed, Tier::L3, kind_op, std::move(outcome.text));
            refined.meta["kind"] = kind_key;
            result.refined.push_back(std::move(refined));
            ++result.report.accepted;
        }
    }
    return result;
}

}  // namespace udt
