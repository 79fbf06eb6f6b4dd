#include "udt/record.hpp"

#include "udt/error.hpp"
#include "udt/hash.hpp"
#include "udt/unicode.hpp"

namespace udt {

std::string_view tier_name(Tier t) {
    switch (t) {
        case Tier::L0: return "L0";
        case Tier::L1: return "L1";
        case Tier::L2: return "L2";
        case Tier::L3: return "L3";
        case Tier::L4: return "L4";
    }
    return "L0";
}

std::optional<Tier> tier_from_name(std::string_view name) {
    if (name.size() == 2 && name[0] == 'L' && name[1] >= '0' && name[1] <= '4') {
        return static_cast<Tier>(name[1] - '0');
    }
    return std::nullopt;
}

std::string_view domain_name(Domain d) {
    switch (d) {
        case Domain::web_en: return "web_en";
        case Domain::web_zh: return "web_zh";
        case Domain::math: return "math";
        case Domain::code: return "code";
        case Domain::other: return "other";
    }
    return "other";
}

std::optional<Domain> domain_from_name(std::string_view name) {
    if (name == "web_en") return Domain::web_en;
    if (name == "web_zh") return Domain::web_zh;
    if (name == "math") return Domain::math;
    if (name == "code") return Domain::code;
    if (name == "other") return Domain::other;
    return std::nullopt;
}

namespace {

void put_field(std::string& buf, std::string_view field) {
    uint64_t len = field.size();
    for (int i = 0; i < 8; ++i) {
        buf.push_back(static_cast<char>((len >> (8 * i)) & 0xff));
    }
    buf.append(field);
}

}  // namespace

std::string record_id_l0(std::string_view text, const SourceMeta& source) {
    std::string buf;
    buf.reserve(text.size() + source.url.size() + source.snapshot.size() + 32);
    buf.push_back('\x00');  // preimage version: L0
    put_field(buf, source.url);
    put_field(buf, source.snapshot);
    put_field(buf, text);
    return hash::sha256_trunc128_hex(buf);
}

std::string record_id_derived(const std::vector<std::string>& parents, const OpStamp& op,
                              std::string_view text) {
    std::string buf;
    buf.reserve(text.size() + parents.size() * 40 + op.name.size() + 64);
    buf.push_back('\x01');  // preimage version: derived
    uint64_t n = parents.size();
    for (int i = 0; i < 8; ++i) {
        buf.push_back(static_cast<char>((n >> (8 * i)) & 0xff));
    }
    for (const auto& p : parents) {
        put_field(buf, p);
    }
    put_field(buf, op.name);
    put_field(buf, hash::hex64(op.params_hash));
    put_field(buf, text);
    return hash::sha256_trunc128_hex(buf);
}

Record new_record(std::string text, SourceMeta source) {
    if (!unicode::is_valid_utf8(text)) {
        throw EncodingError("new_record: text is not valid UTF-8");
    }
    Record r;
    r.id = record_id_l0(text, source);
    r.text = std::move(text);
    r.tier = Tier::L0;
    r.source = std::move(source);
    return r;
}

Record promote(const Record& record, Tier new_tier, const OpStamp& op, std::string new_text,
               const std::vector<std::string>& extra_parents) {
    if (new_tier < record.tier) {
        throw TierRegressionError("promote: cannot demote " + std::string(tier_name(record.tier)) +
                                  " record to " + std::string(tier_name(new_tier)));
    }
    if (!unicode::is_valid_utf8(new_text)) {
        throw EncodingError("promote: text is not valid UTF-8");
    }
    Record r;
    r.parents.reserve(1 + extra_parents.size());
    r.parents.push_back(record.id);
    r.parents.insert(r.parents.end(), extra_parents.begin(), extra_parents.end());
    r.id = record_id_derived(r.parents, op, new_text);
    r.text = std::move(new_text);
    r.tier = new_tier;
    r.source = record.source;
    r.lang = record.lang;
    r.ops = record.ops;
    r.ops.push_back(op);
    return r;
}

uint64_t op_params_hash(std::string_view canonical_config) {
    return hash::fnv1a(canonical_config);
}

}  // namespace udt
