#include "udt/schedule.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "udt/error.hpp"
#include "udt/hash.hpp"
#include "udt/unicode.hpp"

namespace udt {

std::string_view token_estimator_name(TokenEstimator e) {
    switch (e) {
        case TokenEstimator::whitespace: return "whitespace";
        case TokenEstimator::chars_div_4: return "chars_div_4";
    }
    return "whitespace";
}

std::optional<TokenEstimator> token_estimator_from_name(std::string_view name) {
    if (name == "whitespace") return TokenEstimator::whitespace;
    if (name == "chars_div_4") return TokenEstimator::chars_div_4;
    return std::nullopt;
}

uint64_t token_count_text(const std::string& text, TokenEstimator estimator) {
    if (estimator == TokenEstimator::whitespace) {
        return unicode::split_ws(text).size();
    }
    return (unicode::count_codepoints(text) + 3) / 4;
}

uint64_t token_count(const Record& record, TokenEstimator estimator) {
    return token_count_text(record.text, estimator);
}

std::string_view schedule_strategy_name(ScheduleStrategy s) {
    switch (s) {
        case ScheduleStrategy::mix: return "mix";
        case ScheduleStrategy::tiered: return "tiered";
        case ScheduleStrategy::decay_mix: return "decay_mix";
    }
    return "mix";
}

namespace {

constexpr Domain kAllDomains[] = {Domain::web_en, Domain::web_zh, Domain::math, Domain::code,
                                  Domain::other};

void check_mix(const std::map<Domain, double>& mix) {
    double sum = 0.0;
    for (const auto& [d, f] : mix) {
        if (f < 0.0) {
            throw ConfigError("domain mix fraction for " + std::string(domain_name(d)) +
                              " is negative");
        }
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("domain mix fractions must sum to 1 (got " + std::to_string(sum) + ")");
    }
}

/// Integer split of `budget` by fractions, exact total, largest remainder.
/// Ties go to the earlier entry.
std::vector<uint64_t> largest_remainder_split(uint64_t budget,
                                              const std::vector<double>& fractions) {
    const size_t n = fractions.size();
    std::vector<uint64_t> base(n, 0);
    std::vector<std::pair<double, size_t>> remainders;
    remainders.reserve(n);
    uint64_t assigned = 0;
    for (size_t i = 0; i < n; ++i) {
        const double exact = static_cast<double>(budget) * fractions[i];
        base[i] = static_cast<uint64_t>(std::floor(exact));
        assigned += base[i];
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    if (assigned > budget) {
        throw ConfigError("fractions exceed the budget");
    }
    uint64_t leftover = budget - assigned;
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (size_t i = 0; leftover > 0 && i < remainders.size(); ++i) {
        ++base[remainders[i].second];
        --leftover;
    }
    if (leftover > 0) {
        // All remainders consumed (fractions sum below 1); pad the first.
        base[0] += leftover;
    }
    return base;
}

std::vector<const PoolStats*> pools_for(const std::vector<PoolStats>& pools, Domain domain,
                                        Tier tier) {
    std::vector<const PoolStats*> out;
    for (const auto& p : pools) {
        if (p.domain == domain && p.tier == tier) {
            out.push_back(&p);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const PoolStats* a, const PoolStats* b) { return a->pool_id < b->pool_id; });
    return out;
}

/// Fills `amount` tokens from the given pools in pool_id order, respecting
/// per-pool remaining capacity tracked in `used`.
void fill_pools(const std::vector<const PoolStats*>& pools, uint64_t amount,
                std::map<std::string, uint64_t>& used, StageManifest& stage) {
    for (const auto* p : pools) {
        if (amount == 0) {
            break;
        }
        const uint64_t remaining = p->available_tokens - used[p->pool_id];
        const uint64_t take = std::min(amount, remaining);
        if (take == 0) {
            continue;
        }
        used[p->pool_id] += take;
        stage.allocations.push_back({p->pool_id, take});
        stage.stage_tokens += take;
        amount -= take;
    }
}

uint64_t capacity(const std::vector<const PoolStats*>& pools,
                  const std::map<std::string, uint64_t>& used) {
    uint64_t total = 0;
    for (const auto* p : pools) {
        auto it = used.find(p->pool_id);
        total += p->available_tokens - (it == used.end() ? 0 : it->second);
    }
    return total;
}

}  // namespace

Schedule build_mix_schedule(const std::vector<PoolStats>& pools, uint64_t budget,
                            const std::map<Domain, double>& domain_mix) {
    check_mix(domain_mix);
    Schedule schedule;
    schedule.strategy = ScheduleStrategy::mix;
    schedule.domain_mix = domain_mix;

    std::vector<Domain> domains;
    std::vector<double> fractions;
    for (Domain d : kAllDomains) {
        auto it = domain_mix.find(d);
        if (it != domain_mix.end()) {
            domains.push_back(d);
            fractions.push_back(it->second);
        }
    }
    const auto domain_budgets = largest_remainder_split(budget, fractions);

    static constexpr Tier kMixTiers[] = {Tier::L1, Tier::L2, Tier::L3};
    StageManifest stage;
    stage.stage_index = 0;
    std::map<std::string, uint64_t> used;
    std::vector<std::string> shortfalls;
    for (size_t d = 0; d < domains.size(); ++d) {
        const uint64_t db = domain_budgets[d];
        const uint64_t per_tier = db / 3;
        for (size_t t = 0; t < 3; ++t) {
            // Remainder tokens go to the highest tier.
            const uint64_t amount = per_tier + (t == 2 ? db % 3 : 0);
            auto tier_pools = pools_for(pools, domains[d], kMixTiers[t]);
            const uint64_t avail = capacity(tier_pools, used);
            if (avail < amount) {
                std::ostringstream msg;
                msg << domain_name(domains[d]) << "/" << tier_name(kMixTiers[t]) << " deficit "
                    << (amount - avail);
                shortfalls.push_back(msg.str());
                continue;
            }
            fill_pools(tier_pools, amount, used, stage);
        }
    }
    if (!shortfalls.empty()) {
        std::string msg = "build_mix_schedule: infeasible budget:";
        for (const auto& s : shortfalls) {
            msg += " " + s + ";";
        }
        throw ConfigError(msg);
    }
    schedule.total_tokens = stage.stage_tokens;
    schedule.stages.push_back(std::move(stage));
    return schedule;
}

Schedule build_tiered_schedule(const std::vector<PoolStats>& pools, uint64_t budget,
                               const std::map<Domain, double>& domain_mix, uint64_t n_stages) {
    check_mix(domain_mix);
    if (n_stages < 1 || n_stages > 4) {
        throw ConfigError("build_tiered_schedule: n_stages must be in [1, 4]");
    }
    Schedule schedule;
    schedule.strategy = ScheduleStrategy::tiered;
    schedule.domain_mix = domain_mix;

    std::vector<Domain> domains;
    std::vector<double> fractions;
    for (Domain d : kAllDomains) {
        auto it = domain_mix.find(d);
        if (it != domain_mix.end()) {
            domains.push_back(d);
            fractions.push_back(it->second);
        }
    }

    std::map<std::string, uint64_t> used;
    std::vector<std::string> shortfalls;
    const uint64_t per_stage = budget / n_stages;
    for (uint64_t s = 0; s < n_stages; ++s) {
        StageManifest stage;
        stage.stage_index = s;
        // Remainder tokens go to the last stage.
        const uint64_t stage_budget = per_stage + (s + 1 == n_stages ? budget % n_stages : 0);
        const Tier stage_tier = static_cast<Tier>(s + 1);
        const auto domain_budgets = largest_remainder_split(stage_budget, fractions);
        for (size_t d = 0; d < domains.size(); ++d) {
            auto tier_pools = pools_for(pools, domains[d], stage_tier);
            const uint64_t avail = capacity(tier_pools, used);
            if (avail < domain_budgets[d]) {
                std::ostringstream msg;
                msg << "stage " << s << " " << domain_name(domains[d]) << "/"
                    << tier_name(stage_tier) << " deficit " << (domain_budgets[d] - avail);
                shortfalls.push_back(msg.str());
                continue;
            }
            fill_pools(tier_pools, domain_budgets[d], used, stage);
        }
        schedule.total_tokens += stage.stage_tokens;
        schedule.stages.push_back(std::move(stage));
    }
    if (!shortfalls.empty()) {
        std::string msg = "build_tiered_schedule: infeasible budget:";
        for (const auto& s : shortfalls) {
            msg += " " + s + ";";
        }
        throw ConfigError(msg);
    }
    return schedule;
}

Schedule build_decay_mix(const std::vector<PoolStats>& default_pools,
                         const std::vector<PoolStats>& verification_pools, uint64_t budget,
                         double verification_fraction) {
    if (verification_fraction < 0.0 || verification_fraction > 1.0) {
        throw ConfigError("build_decay_mix: fraction must be in [0, 1]");
    }
    Schedule schedule;
    schedule.strategy = ScheduleStrategy::decay_mix;

    const uint64_t verification_budget = static_cast<uint64_t>(
        std::llround(verification_fraction * static_cast<double>(budget)));
    const uint64_t default_budget = budget - verification_budget;

    StageManifest stage;
    stage.stage_index = 0;
    const auto fill_side = [&](const std::vector<PoolStats>& side, uint64_t side_budget,
                               std::string_view side_name) {
        if (side_budget == 0) {
            return;
        }
        std::vector<const PoolStats*> sorted;
        for (const auto& p : side) {
            sorted.push_back(&p);
        }
        std::sort(sorted.begin(), sorted.end(),
                  [](const PoolStats* a, const PoolStats* b) { return a->pool_id < b->pool_id; });
        uint64_t total_avail = 0;
        for (const auto* p : sorted) {
            total_avail += p->available_tokens;
        }
        if (total_avail < side_budget) {
            throw ConfigError("build_decay_mix: " + std::string(side_name) + " pools short by " +
                              std::to_string(side_budget - total_avail) + " tokens");
        }
        // Proportional to availability, exact total by largest remainder.
        std::vector<double> fractions;
        fractions.reserve(sorted.size());
        for (const auto* p : sorted) {
            fractions.push_back(static_cast<double>(p->available_tokens) /
                                static_cast<double>(total_avail));
        }
        auto split = largest_remainder_split(side_budget, fractions);
        for (size_t i = 0; i < sorted.size(); ++i) {
            if (split[i] == 0) {
                continue;
            }
            stage.allocations.push_back({sorted[i]->pool_id, split[i]});
            stage.stage_tokens += split[i];
        }
    };
    fill_side(default_pools, default_budget, "default");
    fill_side(verification_pools, verification_budget, "verification");
    schedule.total_tokens = stage.stage_tokens;
    schedule.stages.push_back(std::move(stage));
    return schedule;
}

ScheduleValidationReport validate_manifest(const Schedule& schedule,
                                           const std::vector<PoolStats>& pools) {
    ScheduleValidationReport report;
    const auto violation = [&](const std::string& message) {
        report.violations.push_back({message});
    };

    std::map<std::string, const PoolStats*> by_id;
    for (const auto& p : pools) {
        by_id[p.pool_id] = &p;
    }

    uint64_t total = 0;
    std::map<std::string, uint64_t> used;
    for (const auto& stage : schedule.stages) {
        uint64_t stage_sum = 0;
        for (const auto& alloc : stage.allocations) {
            stage_sum += alloc.tokens;
            used[alloc.pool_id] += alloc.tokens;
            if (by_id.find(alloc.pool_id) == by_id.end()) {
                violation("stage " + std::to_string(stage.stage_index) +
                          " references unknown pool " + alloc.pool_id);
            }
        }
        if (stage_sum != stage.stage_tokens) {
            violation("stage " + std::to_string(stage.stage_index) +
                      " stage_tokens != sum of allocations");
        }
        total += stage.stage_tokens;
    }
    if (total != schedule.total_tokens) {
        violation("total_tokens != sum of stage tokens");
    }

    for (const auto& [pool_id, tokens] : used) {
        auto it = by_id.find(pool_id);
        if (it != by_id.end() && tokens > it->second->available_tokens) {
            violation("pool " + pool_id + " overdrawn by " +
                      std::to_string(tokens - it->second->available_tokens) + " tokens");
        }
    }

    // Domain proportions per stage (mix and tiered strategies).
    if (schedule.strategy != ScheduleStrategy::decay_mix && !schedule.domain_mix.empty()) {
        for (const auto& stage : schedule.stages) {
            if (stage.stage_tokens == 0) {
                continue;
            }
            std::map<Domain, uint64_t> per_domain;
            for (const auto& alloc : stage.allocations) {
                auto it = by_id.find(alloc.pool_id);
                if (it != by_id.end()) {
                    per_domain[it->second->domain] += alloc.tokens;
                }
            }
            // Integer rounding legitimately moves a fraction by up to one
            // token; tolerance accounts for it on top of the spec's 1e-6.
            const double slack = 1e-6 + 1.0 / static_cast<double>(stage.stage_tokens);
            for (const auto& [domain, target] : schedule.domain_mix) {
                const double actual =
                    static_cast<double>(per_domain[domain]) /
                    static_cast<double>(stage.stage_tokens);
                if (std::abs(actual - target) > slack) {
                    violation("stage " + std::to_string(stage.stage_index) + " domain " +
                              std::string(domain_name(domain)) + " fraction " +
                              std::to_string(actual) + " != target " + std::to_string(target));
                }
            }
        }
    }

    if (schedule.strategy == ScheduleStrategy::tiered) {
        int prev_max_tier = -1;
        for (const auto& stage : schedule.stages) {
            int min_tier = 99;
            int max_tier = -1;
            for (const auto& alloc : stage.allocations) {
                auto it = by_id.find(alloc.pool_id);
                if (it == by_id.end()) {
                    continue;
                }
                min_tier = std::min(min_tier, static_cast<int>(it->second->tier));
                max_tier = std::max(max_tier, static_cast<int>(it->second->tier));
            }
            if (max_tier < 0) {
                continue;  // empty stage
            }
            if (min_tier < prev_max_tier) {
                violation("stage " + std::to_string(stage.stage_index) +
                          " draws tier below an earlier stage (tier ordering)");
            }
            prev_max_tier = max_tier;
        }
    }
    return report;
}

std::vector<std::vector<std::string>> materialize(const Schedule& schedule,
                                                  const std::vector<PoolRecords>& pools,
                                                  uint64_t rng_seed) {
    struct PoolState {
        std::vector<size_t> order;
        size_t cursor = 0;
        const PoolRecords* pool = nullptr;
    };
    std::map<std::string, PoolState> state;
    for (const auto& pool : pools) {
        PoolState ps;
        ps.pool = &pool;
        ps.order.resize(pool.records.size());
        for (size_t i = 0; i < ps.order.size(); ++i) {
            ps.order[i] = i;
        }
        // Per-pool generator derived from (rng_seed, pool_id).
        hash::Rng64 rng(hash::mix64(rng_seed ^ hash::fnv1a(pool.pool_id)));
        for (size_t i = ps.order.size(); i > 1; --i) {
            std::swap(ps.order[i - 1], ps.order[rng.below(i)]);
        }
        state.emplace(pool.pool_id, std::move(ps));
    }

    std::vector<std::vector<std::string>> stages;
    stages.reserve(schedule.stages.size());
    for (const auto& stage : schedule.stages) {
        std::vector<std::string> ids;
        for (const auto& alloc : stage.allocations) {
            auto it = state.find(alloc.pool_id);
            if (it == state.end()) {
                throw Error("materialize: no records for pool " + alloc.pool_id);
            }
            PoolState& ps = it->second;
            uint64_t taken = 0;
            while (taken < alloc.tokens) {
                if (ps.cursor >= ps.order.size()) {
                    throw Error("materialize: pool " + alloc.pool_id + " exhausted");
                }
                const auto& [record_id, tokens] = ps.pool->records[ps.order[ps.cursor]];
                ++ps.cursor;
                ids.push_back(record_id);
                taken += tokens;
            }
        }
        stages.push_back(std::move(ids));
    }
    return stages;
}

std::string schedule_to_json(const Schedule& schedule) {
    nlohmann::ordered_json j;
    j["strategy"] = schedule_strategy_name(schedule.strategy);
    j["estimator"] = token_estimator_name(schedule.estimator);
    nlohmann::ordered_json mix = nlohmann::ordered_json::object();
    for (const auto& [domain, fraction] : schedule.domain_mix) {
        mix[std::string(domain_name(domain))] = fraction;
    }
    j["domain_mix"] = std::move(mix);
    nlohmann::ordered_json stages = nlohmann::ordered_json::array();
    for (const auto& stage : schedule.stages) {
        nlohmann::ordered_json s;
        s["stage_index"] = stage.stage_index;
        nlohmann::ordered_json allocs = nlohmann::ordered_json::array();
        for (const auto& alloc : stage.allocations) {
            nlohmann::ordered_json a;
            a["pool"] = alloc.pool_id;
            a["tokens"] = alloc.tokens;
            allocs.push_back(std::move(a));
        }
        s["allocations"] = std::move(allocs);
        stages.push_back(std::move(s));
    }
    j["stages"] = std::move(stages);
    return j.dump(2);
}

Schedule schedule_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ConfigError("malformed schedule JSON");
    }
    Schedule schedule;
    const std::string strategy = j.at("strategy").get<std::string>();
    if (strategy == "mix") {
        schedule.strategy = ScheduleStrategy::mix;
    } else if (strategy == "tiered") {
        schedule.strategy = ScheduleStrategy::tiered;
    } else if (strategy == "decay_mix") {
        schedule.strategy = ScheduleStrategy::decay_mix;
    } else {
        throw ConfigError("unknown schedule strategy " + strategy);
    }
    auto estimator = token_estimator_from_name(j.at("estimator").get<std::string>());
    if (!estimator) {
        throw ConfigError("unknown token estimator");
    }
    schedule.estimator = *estimator;
    for (const auto& [name, fraction] : j.at("domain_mix").items()) {
        auto domain = domain_from_name(name);
        if (!domain) {
            throw ConfigError("unknown domain " + name);
        }
        schedule.domain_mix[*domain] = fraction.get<double>();
    }
    for (const auto& s : j.at("stages")) {
        StageManifest stage;
        stage.stage_index = s.at("stage_index").get<uint64_t>();
        for (const auto& a : s.at("allocations")) {
            Allocation alloc;
            alloc.pool_id = a.at("pool").get<std::string>();
            alloc.tokens = a.at("tokens").get<uint64_t>();
            stage.stage_tokens += alloc.tokens;
            stage.allocations.push_back(std::move(alloc));
        }
        schedule.total_tokens += stage.stage_tokens;
        schedule.stages.push_back(std::move(stage));
    }
    return schedule;
}

void save_schedule(const Schedule& schedule, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write schedule: " + path.string());
    }
    out << schedule_to_json(schedule) << '\n';
}

Schedule load_schedule(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open schedule: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return schedule_from_json(buf.str());
}

}  // namespace udt
