#pragma once

#include "bplan/fd/solver.hpp"

#include <functional>
#include <set>
#include <utility>
#include <vector>

namespace testsupport {

// All distinct values of `report` over the solutions with `fix` imposed.
// The solver is left as it was.
inline std::set<std::vector<bplan::fd::Value>> project_solutions(
    bplan::fd::Solver& s, const std::vector<std::pair<bplan::fd::VarId, bplan::fd::Value>>& fix,
    const std::vector<bplan::fd::VarId>& report, std::function<bool(bplan::fd::Solver&)> hook = {}) {
    std::set<std::vector<bplan::fd::Value>> out;
    s.push_level();
    bool ok = true;
    for (const auto& [v, x] : fix) ok = ok && s.assign(v, x);
    ok = ok && s.propagate();
    if (ok) {
        bplan::fd::SearchOptions opts;
        opts.order = report;
        opts.node_hook = std::move(hook);
        bplan::fd::Search search(s, opts);
        while (search.next() == bplan::fd::SearchStatus::Solution) {
            std::vector<bplan::fd::Value> row;
            for (auto v : report) row.push_back(s.value(v));
            out.insert(row);
        }
    }
    s.pop_level();
    return out;
}

} // namespace testsupport
