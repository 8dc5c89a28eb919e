#pragma once

// Random small action descriptions for oracle/encoder cross-checks.

#include "bplan/frontend/domain.hpp"

#include <random>
#include <string>

namespace testsupport {

using Rng = std::mt19937_64;

inline int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline bplan::CondPtr random_literal_conj(Rng& rng, int nf, int max_len) {
    int len = pick(rng, 0, max_len);
    if (len == 0) return bplan::make_true();
    std::vector<bplan::CondPtr> kids;
    for (int i = 0; i < len; ++i) kids.push_back(bplan::make_literal(pick(rng, 0, nf - 1), pick(rng, 0, 1) == 1));
    return kids.size() == 1 ? kids[0] : bplan::make_and(kids);
}

struct BShape {
    int max_fluents = 5;
    int max_actions = 3;
    int max_static = 4;
    int max_dynamic = 5;
    int max_body = 2;
    bool nonexecutable = false;
};

inline bplan::DomainDescription random_b_domain(Rng& rng, const BShape& shape = {}) {
    bplan::DomainDescription d;
    d.lang = bplan::Language::B;
    int nf = pick(rng, 1, shape.max_fluents);
    int na = pick(rng, 1, shape.max_actions);
    for (int f = 0; f < nf; ++f) d.add_fluent("f" + std::to_string(f), bplan::fd::Domain::range(0, 1));
    for (int a = 0; a < na; ++a) d.add_action("a" + std::to_string(a));
    for (int a = 0; a < na; ++a) {
        int ne = pick(rng, 1, 2);
        for (int k = 0; k < ne; ++k) d.executable.push_back({a, random_literal_conj(rng, nf, 1), {}});
        if (shape.nonexecutable && pick(rng, 0, 3) == 0)
            d.nonexecutable.push_back({a, random_literal_conj(rng, nf, 1), {}});
    }
    int nd = pick(rng, 0, shape.max_dynamic);
    for (int k = 0; k < nd; ++k)
        d.dynamic_laws.push_back({pick(rng, 0, na - 1), bplan::make_literal(pick(rng, 0, nf - 1), pick(rng, 0, 1) == 1),
                                  random_literal_conj(rng, nf, shape.max_body), {}});
    int ns = pick(rng, 0, shape.max_static);
    for (int k = 0; k < ns; ++k)
        d.static_laws.push_back({random_literal_conj(rng, nf, shape.max_body),
                                 bplan::make_literal(pick(rng, 0, nf - 1), pick(rng, 0, 1) == 1), {}});
    return d;
}

} // namespace testsupport
