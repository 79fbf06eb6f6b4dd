#include "udt/lineage.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "udt/error.hpp"

namespace udt {

std::vector<std::string> Lineage::roots() const {
    std::vector<std::string> out;
    for (const auto& r : nodes) {
        if (r.tier == Tier::L0) {
            out.push_back(r.id);
        }
    }
    return out;
}

Lineage trace_lineage(std::string_view id, const RecordStore& store) {
    const Record* start = store.find(id);
    if (start == nullptr) {
        throw BrokenLineageError(std::string(id));
    }
    Lineage lineage;
    std::set<std::string, std::less<>> visited;
    std::deque<const Record*> queue{start};
    visited.insert(start->id);
    while (!queue.empty()) {
        const Record* r = queue.front();
        queue.pop_front();
        lineage.nodes.push_back(*r);
        if (r->tier == Tier::L0) {
            continue;
        }
        if (r->parents.empty()) {
            // Above L0 an empty parent list is a dangling chain.
            throw BrokenLineageError(r->id);
        }
        for (const auto& pid : r->parents) {
            if (visited.count(pid)) {
                continue;
            }
            const Record* parent = store.find(pid);
            if (parent == nullptr) {
                throw BrokenLineageError(pid);
            }
            visited.insert(pid);
            queue.push_back(parent);
        }
    }
    std::sort(lineage.nodes.begin(), lineage.nodes.end(), [](const Record& a, const Record& b) {
        if (a.tier != b.tier) {
            return a.tier < b.tier;
        }
        return a.id < b.id;
    });
    return lineage;
}

}  // namespace udt
