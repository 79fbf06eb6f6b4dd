#include "udt/organize.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "udt/error.hpp"
#include "udt/unicode.hpp"

namespace udt {

namespace {

struct Piece {
    size_t start;
    size_t end;
};

// Splits [start, end) at sentence boundaries (terminal punctuation followed
// by whitespace), then hard-splits anything still over the limit at code
// point boundaries.
void split_oversized(const std::string& text, size_t start, size_t end, uint64_t limit,
                     std::vector<Piece>& out) {
    std::vector<Piece> sentences;
    size_t piece_start = start;
    size_t pos = start;
    while (pos < end) {
        char c = text[pos];
        if ((c == '.' || c == '!' || c == '?') && pos + 1 < end &&
            (text[pos + 1] == ' ' || text[pos + 1] == '\n' || text[pos + 1] == '\t')) {
            sentences.push_back({piece_start, pos + 1});
            piece_start = pos + 1;
        }
        ++pos;
    }
    if (piece_start < end) {
        sentences.push_back({piece_start, end});
    }

    // Greedily merge sentences up to the limit, hard-splitting any single
    // sentence that alone exceeds it.
    size_t cur_start = std::string::npos;
    uint64_t cur_len = 0;
    const auto flush = [&](size_t cur_end) {
        if (cur_start != std::string::npos && cur_end > cur_start) {
            out.push_back({cur_start, cur_end});
        }
        cur_start = std::string::npos;
        cur_len = 0;
    };
    for (const auto& s : sentences) {
        uint64_t len = unicode::count_codepoints(
            std::string_view(text.data() + s.start, s.end - s.start));
        if (len > limit) {
            flush(s.start);
            // Hard split at the code point limit.
            size_t p = s.start;
            size_t chunk_begin = s.start;
            uint64_t count = 0;
            while (p < s.end) {
                unicode::decode(text, p);
                ++count;
                if (count == limit) {
                    out.push_back({chunk_begin, p});
                    chunk_begin = p;
                    count = 0;
                }
            }
            if (chunk_begin < s.end) {
                out.push_back({chunk_begin, s.end});
            }
            continue;
        }
        if (cur_start == std::string::npos) {
            cur_start = s.start;
            cur_len = len;
        } else if (cur_len + len <= limit) {
            cur_len += len;
        } else {
            flush(s.start);
            cur_start = s.start;
            cur_len = len;
        }
    }
    flush(sentences.empty() ? end : sentences.back().end);
}

}  // namespace

std::vector<Chunk> chunk_document(const Record& record, uint64_t max_chunk_chars) {
    std::vector<Chunk> chunks;
    const std::string& text = record.text;
    if (text.empty() || max_chunk_chars == 0) {
        return chunks;
    }

    // Paragraphs separated by runs of 2+ newlines; separator bytes belong to
    // the gap between spans, so concatenating chunk texts with the consumed
    // separators reconstructs the document.
    std::vector<Piece> paragraphs;
    size_t pos = 0;
    size_t para_start = 0;
    while (pos < text.size()) {
        if (text[pos] == '\n' && pos + 1 < text.size() && text[pos + 1] == '\n') {
            size_t run_end = pos;
            while (run_end < text.size() && text[run_end] == '\n') {
                ++run_end;
            }
            paragraphs.push_back({para_start, pos});
            para_start = run_end;
            pos = run_end;
            continue;
        }
        ++pos;
    }
    paragraphs.push_back({para_start, text.size()});

    // Greedy packing; paragraph separators inside a chunk count toward its
    // length.
    std::vector<Piece> spans;
    size_t cur_start = std::string::npos;
    size_t cur_end = 0;
    uint64_t cur_len = 0;
    const auto flush = [&]() {
        if (cur_start != std::string::npos) {
            spans.push_back({cur_start, cur_end});
            cur_start = std::string::npos;
            cur_len = 0;
        }
    };
    for (const auto& para : paragraphs) {
        if (para.start == para.end) {
            continue;
        }
        const uint64_t para_len = unicode::count_codepoints(
            std::string_view(text.data() + para.start, para.end - para.start));
        if (para_len > max_chunk_chars) {
            flush();
            split_oversized(text, para.start, para.end, max_chunk_chars, spans);
            continue;
        }
        if (cur_start == std::string::npos) {
            cur_start = para.start;
            cur_end = para.end;
            cur_len = para_len;
            continue;
        }
        const uint64_t gap_len = unicode::count_codepoints(
            std::string_view(text.data() + cur_end, para.start - cur_end));
        if (cur_len + gap_len + para_len <= max_chunk_chars) {
            cur_end = para.end;
            cur_len += gap_len + para_len;
        } else {
            flush();
            cur_start = para.start;
            cur_end = para.end;
            cur_len = para_len;
        }
    }
    flush();

    chunks.reserve(spans.size());
    for (size_t i = 0; i < spans.size(); ++i) {
        Chunk c;
        c.chunk_id = record.id + "#" + std::to_string(i);
        c.record_id = record.id;
        c.start = spans[i].start;
        c.end = spans[i].end;
        c.text = text.substr(spans[i].start, spans[i].end - spans[i].start);
        chunks.push_back(std::move(c));
    }
    return chunks;
}

void TermIndex::add_chunk(const Chunk& chunk) {
    const uint32_t index = static_cast<uint32_t>(chunk_ids_.size());
    chunk_ids_.push_back(chunk.chunk_id);
    std::string lowered = unicode::ascii_lower(chunk.text);
    auto tokens = unicode::split_ws(lowered);
    doc_lengths_.push_back(static_cast<uint32_t>(tokens.size()));
    std::map<std::string_view, uint32_t> tf;
    for (auto t : tokens) {
        ++tf[t];
    }
    for (const auto& [term, freq] : tf) {
        postings_[std::string(term)].push_back({index, freq});
    }
}

TermIndex TermIndex::build(const std::vector<Chunk>& chunks) {
    TermIndex index;
    for (const auto& c : chunks) {
        index.add_chunk(c);
    }
    return index;
}

double TermIndex::avg_doc_length() const {
    if (doc_lengths_.empty()) {
        return 0.0;
    }
    uint64_t total = 0;
    for (uint32_t len : doc_lengths_) {
        total += len;
    }
    return static_cast<double>(total) / static_cast<double>(doc_lengths_.size());
}

std::vector<std::pair<std::string, double>> TermIndex::query(
    const std::vector<std::string>& terms, size_t k) const {
    std::vector<std::pair<std::string, double>> out;
    if (k == 0 || chunk_ids_.empty()) {
        return out;
    }
    const double n_docs = static_cast<double>(chunk_ids_.size());
    const double avgdl = avg_doc_length();
    std::unordered_map<uint32_t, double> scores;
    for (const auto& raw_term : terms) {
        std::string term = unicode::ascii_lower(raw_term);
        auto it = postings_.find(term);
        if (it == postings_.end()) {
            continue;
        }
        const auto& plist = it->second;
        const double df = static_cast<double>(plist.size());
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        for (const auto& posting : plist) {
            const double tf = static_cast<double>(posting.term_frequency);
            const double dl = static_cast<double>(doc_lengths_[posting.chunk_index]);
            const double norm = avgdl > 0.0 ? dl / avgdl : 0.0;
            const double weight =
                idf * (tf * (kBm25K1 + 1.0)) /
                (tf + kBm25K1 * (1.0 - kBm25B + kBm25B * norm));
            scores[posting.chunk_index] += weight;
        }
    }
    std::vector<std::pair<uint32_t, double>> ranked(scores.begin(), scores.end());
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return chunk_ids_[a.first] < chunk_ids_[b.first];
    });
    for (const auto& [index, score] : ranked) {
        if (score <= 0.0 || out.size() >= k) {
            break;
        }
        out.emplace_back(chunk_ids_[index], score);
    }
    return out;
}

namespace {

constexpr char kIndexMagic[4] = {'U', 'D', 'T', 'X'};
constexpr uint32_t kIndexVersion = 1;

void write_u32(std::ofstream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ofstream& out, uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_str(std::ofstream& out, std::string_view s) {
    write_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
uint32_t read_u32(std::ifstream& in) {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
uint64_t read_u64(std::ifstream& in) {
    uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
std::string read_str(std::ifstream& in) {
    uint64_t len = read_u64(in);
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    return s;
}

}  // namespace

void TermIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write index: " + path.string());
    }
    out.write(kIndexMagic, 4);
    write_u32(out, kIndexVersion);
    write_u64(out, chunk_ids_.size());
    for (size_t i = 0; i < chunk_ids_.size(); ++i) {
        write_str(out, chunk_ids_[i]);
        write_u32(out, doc_lengths_[i]);
    }
    write_u64(out, postings_.size());
    for (const auto& [term, plist] : postings_) {
        write_str(out, term);
        write_u64(out, plist.size());
        for (const auto& p : plist) {
            write_u32(out, p.chunk_index);
            write_u32(out, p.term_frequency);
        }
    }
    if (!out) {
        throw IoError("index write failed: " + path.string());
    }
}

TermIndex TermIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open index: " + path.string());
    }
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kIndexMagic, 4) != 0) {
        throw Error("not a term-index file: " + path.string());
    }
    if (read_u32(in) != kIndexVersion) {
        throw Error("unsupported index version");
    }
    TermIndex index;
    const uint64_t n_chunks = read_u64(in);
    index.chunk_ids_.reserve(n_chunks);
    index.doc_lengths_.reserve(n_chunks);
    for (uint64_t i = 0; i < n_chunks; ++i) {
        index.chunk_ids_.push_back(read_str(in));
        index.doc_lengths_.push_back(read_u32(in));
    }
    const uint64_t n_terms = read_u64(in);
    for (uint64_t i = 0; i < n_terms; ++i) {
        std::string term = read_str(in);
        const uint64_t n_postings = read_u64(in);
        auto& plist = index.postings_[term];
        plist.reserve(n_postings);
        for (uint64_t p = 0; p < n_postings; ++p) {
            Posting posting;
            posting.chunk_index = read_u32(in);
            posting.term_frequency = read_u32(in);
            plist.push_back(posting);
        }
    }
    if (!in) {
        throw Error("truncated index file: " + path.string());
    }
    return index;
}

std::string_view fact_status_name(FactStatus s) {
    switch (s) {
        case FactStatus::unverified: return "unverified";
        case FactStatus::verified: return "verified";
        case FactStatus::contradicted: return "contradicted";
    }
    return "unverified";
}

namespace {

std::string normalize_field(const std::string& s) {
    std::string lowered = unicode::ascii_lower(s);
    std::string out;
    out.reserve(lowered.size());
    bool pending_space = false;
    size_t pos = 0;
    while (pos < lowered.size()) {
        uint32_t cp = unicode::decode(lowered, pos);
        if (unicode::is_space(cp)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        unicode::append(out, cp);
    }
    return out;
}

}  // namespace

Triple normalize_triple(const Triple& t) {
    return Triple{normalize_field(t.subject), normalize_field(t.relation),
                  normalize_field(t.object)};
}

void TrustedStore::add(const Triple& t) {
    triples_.insert(normalize_triple(t));
}

TrustedStore TrustedStore::load_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open trusted store: " + path.string());
    }
    TrustedStore store;
    std::string line;
    while (std::getline(in, line)) {
        if (unicode::trim(line).empty()) {
            continue;
        }
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw Error("malformed trusted-triple line in " + path.string());
        }
        store.add(Triple{j.at("s").get<std::string>(), j.at("r").get<std::string>(),
                         j.at("o").get<std::string>()});
    }
    return store;
}

bool TrustedStore::contains(const Triple& normalized) const {
    return triples_.count(normalized) > 0;
}

std::vector<std::string> TrustedStore::objects_for(const std::string& subject,
                                                   const std::string& relation) const {
    std::vector<std::string> out;
    Triple lo{subject, relation, ""};
    for (auto it = triples_.lower_bound(lo); it != triples_.end(); ++it) {
        if (it->subject != subject || it->relation != relation) {
            break;
        }
        out.push_back(it->object);
    }
    return out;
}

void FactStore::add_chunk_id(const std::string& chunk_id) {
    chunk_ids_.insert(chunk_id);
}

bool FactStore::has_chunk(const std::string& chunk_id) const {
    return chunk_ids_.count(chunk_id) > 0;
}

FactRecord& FactStore::register_fact(const std::string& subject, const std::string& relation,
                                     const std::string& object, const std::string& evidence) {
    if (!has_chunk(evidence)) {
        throw Error("register_fact: dangling evidence chunk " + evidence);
    }
    for (auto& f : facts_) {
        if (f.subject == subject && f.relation == relation && f.object == object &&
            f.evidence == evidence) {
            return f;
        }
    }
    facts_.push_back(FactRecord{subject, relation, object, evidence, FactStatus::unverified});
    return facts_.back();
}

FactRecord verify_fact(const FactRecord& fact, const TrustedStore& trusted) {
    if (fact.status != FactStatus::unverified) {
        throw Error("verify_fact: fact already has terminal status " +
                    std::string(fact_status_name(fact.status)));
    }
    FactRecord out = fact;
    Triple norm = normalize_triple(Triple{fact.subject, fact.relation, fact.object});
    if (trusted.contains(norm)) {
        out.status = FactStatus::verified;
        return out;
    }
    auto objects = trusted.objects_for(norm.subject, norm.relation);
    for (const auto& o : objects) {
        if (o != norm.object) {
            out.status = FactStatus::contradicted;
            return out;
        }
    }
    return out;  // stays unverified
}

}  // namespace udt
