#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "udt/record.hpp"

namespace udt {

enum class TokenEstimator { whitespace, chars_div_4 };

std::string_view token_estimator_name(TokenEstimator e);
std::optional<TokenEstimator> token_estimator_from_name(std::string_view name);

uint64_t token_count(const Record& record, TokenEstimator estimator);
uint64_t token_count_text(const std::string& text, TokenEstimator estimator);

struct PoolStats {
    std::string pool_id;
    Domain domain = Domain::web_en;
    Tier tier = Tier::L1;
    uint64_t available_tokens = 0;
};

struct Allocation {
    std::string pool_id;
    uint64_t tokens = 0;

    bool operator==(const Allocation&) const = default;
};

struct StageManifest {
    uint64_t stage_index = 0;
    std::vector<Allocation> allocations;
    uint64_t stage_tokens = 0;  // = sum of allocations
};

enum class ScheduleStrategy { mix, tiered, decay_mix };

std::string_view schedule_strategy_name(ScheduleStrategy s);

struct Schedule {
    ScheduleStrategy strategy = ScheduleStrategy::mix;
    TokenEstimator estimator = TokenEstimator::whitespace;
    std::vector<StageManifest> stages;
    uint64_t total_tokens = 0;
    std::map<Domain, double> domain_mix;  // fractions summing to 1
};

/// Single stage; per domain, budget x fraction split equally over the
/// domain's L1/L2/L3 pools (integer remainder to the highest tier). Domain
/// budgets are rounded by largest remainder so the stage total is exact.
/// Throws ConfigError naming (domain, tier, deficit) on shortfall.
Schedule build_mix_schedule(const std::vector<PoolStats>& pools, uint64_t budget,
                            const std::map<Domain, double>& domain_mix);

/// n_stages equal stages (remainder tokens to the last); stage i draws
/// exclusively from tier L(i+1); domain proportions hold inside each stage.
Schedule build_tiered_schedule(const std::vector<PoolStats>& pools, uint64_t budget,
                               const std::map<Domain, double>& domain_mix,
                               uint64_t n_stages = 3);

/// Single decay stage: verification pools get round(budget x fraction),
/// default pools the rest; each side split proportionally to availability.
Schedule build_decay_mix(const std::vector<PoolStats>& default_pools,
                         const std::vector<PoolStats>& verification_pools, uint64_t budget,
                         double verification_fraction = 0.30);

struct ScheduleViolation {
    std::string message;
};

struct ScheduleValidationReport {
    std::vector<ScheduleViolation> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks budget conservation (exact), per-pool availability, per-stage
/// domain fractions (1e-6 plus one-token rounding slack), known pool ids,
/// and nondecreasing stage tiers for tiered schedules.
ScheduleValidationReport validate_manifest(const Schedule& schedule,
                                           const std::vector<PoolStats>& pools);

/// Records of one pool, in stream order, with precomputed token counts.
struct PoolRecords {
    std::string pool_id;
    std::vector<std::pair<std::string, uint64_t>> records;  // (record id, tokens)
};

/// Seeded-shuffle sampling without replacement per pool until each stage
/// allocation is met; the last drawn record may overshoot by less than its
/// own length. Pool order state carries across stages, so no id repeats.
std::vector<std::vector<std::string>> materialize(const Schedule& schedule,
                                                  const std::vector<PoolRecords>& pools,
                                                  uint64_t rng_seed);

/// Schedule file JSON: {strategy, estimator, domain_mix,
///   stages: [{stage_index, allocations: [{pool, tokens}]}]}.
std::string schedule_to_json(const Schedule& schedule);
Schedule schedule_from_json(const std::string& json_text);
void save_schedule(const Schedule& schedule, const std::filesystem::path& path);
Schedule load_schedule(const std::filesystem::path& path);

}  // namespace udt
