#pragma once

#include <map>
#include <string>
#include <vector>

#include "udt/shard.hpp"

namespace udt {

/// Ancestry DAG of one record: every node reachable through parent edges,
/// sorted by (tier, id). Edges are implicit in each node's `parents`.
struct Lineage {
    std::vector<Record> nodes;

    /// Ids of the tier-L0 roots reached.
    std::vector<std::string> roots() const;
};

/// Walks parent edges from `id` until every path ends at an L0 record.
/// Throws BrokenLineageError (naming the missing id) for an unknown id or a
/// dangling parent reference. A visited-set guarantees termination on cycles.
Lineage trace_lineage(std::string_view id, const RecordStore& store);

}  // namespace udt
