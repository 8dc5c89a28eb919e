#pragma once

// Random small multi-valued action descriptions, produced as source text so
// they go through the same parser and extractor as user domains.

#include "support/random_domain.hpp"

#include <string>
#include <vector>

namespace testsupport {

struct MVShape {
    int max_fluents = 3;
    int max_values = 4;
    int max_actions = 3;
    int max_dynamic = 4;
    int max_static = 0;
    bool annotations = false; // past references in effects and laws
    bool arithmetic = true;   // *, /, mod, abs, rei
};

class MVTextGen {
public:
    MVTextGen(Rng& rng, const MVShape& shape) : rng_(rng), shape_(shape) {}

    std::string domain() {
        nf_ = pick(rng_, 1, shape_.max_fluents);
        int na = pick(rng_, 1, shape_.max_actions);
        std::string out;
        for (int f = 0; f < nf_; ++f) {
            int k = pick(rng_, 2, shape_.max_values);
            if (pick(rng_, 0, 3) == 0 && k >= 3) {
                // a set domain with a gap
                out += "fluent(f" + std::to_string(f) + ",{0," + std::to_string(k - 1) + "," + std::to_string(k) + "}).\n";
            } else {
                out += "fluent(f" + std::to_string(f) + ",0," + std::to_string(k - 1) + ").\n";
            }
        }
        for (int a = 0; a < na; ++a) {
            out += "action(a" + std::to_string(a) + ").\n";
            int ne = pick(rng_, 1, 2);
            for (int k = 0; k < ne; ++k)
                out += "executable(a" + std::to_string(a) + ", " + (pick(rng_, 0, 2) == 0 ? prim(0) : "true") + ").\n";
        }
        int nd = pick(rng_, 0, shape_.max_dynamic);
        for (int k = 0; k < nd; ++k)
            out += "causes(a" + std::to_string(pick(rng_, 0, na - 1)) + ", " + effect() + ", " +
                   (pick(rng_, 0, 1) ? "true" : "[" + prim(shape_.annotations ? -1 : 0) + "]") + ").\n";
        int ns = pick(rng_, 0, shape_.max_static);
        for (int k = 0; k < ns; ++k)
            out += "caused(" + (pick(rng_, 0, 4) == 0 ? std::string("true") : prim(0)) + ", " + prim(0) + ").\n";
        return out;
    }

private:
    std::string fluent(int past) {
        std::string f = "f" + std::to_string(pick(rng_, 0, nf_ - 1));
        if (past < 0 && pick(rng_, 0, 2) == 0) f += "^(" + std::to_string(pick(rng_, past - 1, -1)) + ")";
        return f;
    }

    std::string term(int past) {
        switch (pick(rng_, 0, shape_.arithmetic ? 9 : 5)) {
        case 0:
        case 1: return std::to_string(pick(rng_, 0, 3));
        case 2: return fluent(past) + "+" + std::to_string(pick(rng_, 1, 2));
        case 3: return fluent(past) + "-" + fluent(past);
        case 4:
        case 5: return fluent(past);
        case 6: return fluent(past) + "*" + std::to_string(pick(rng_, 2, 3));
        case 7: return "4/" + fluent(past);
        case 8: return fluent(past) + " mod 2";
        default: return "rei(" + fluent(past) + " gt " + std::to_string(pick(rng_, 0, 2)) + ")+abs(" + fluent(past) + "-2)";
        }
    }

    std::string prim(int past) {
        static const char* ops[] = {"eq", "neq", "lt", "leq", "gt", "geq"};
        return fluent(past) + " " + ops[pick(rng_, 0, 5)] + " " + term(past);
    }

    std::string effect() {
        int past = shape_.annotations ? -1 : 0;
        switch (pick(rng_, 0, 4)) {
        case 0: return prim(past);
        case 1: return "[" + prim(past) + ", " + prim(past) + "]";
        default: {
            std::string lhs = "f" + std::to_string(pick(rng_, 0, nf_ - 1));
            return lhs + " eq " + term(past);
        }
        }
    }

    Rng& rng_;
    MVShape shape_;
    int nf_ = 1;
};

inline std::string random_mv_text(Rng& rng, const MVShape& shape = {}) { return MVTextGen(rng, shape).domain(); }

} // namespace testsupport
