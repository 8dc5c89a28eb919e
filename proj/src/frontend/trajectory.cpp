#include "bplan/frontend/trajectory.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace bplan {

using frontend::FrontendError;

std::string format_state(const DomainDescription& d, const StateValues& s) {
    std::string out;
    for (std::size_t f = 0; f < s.size(); ++f) {
        if (f) out += ' ';
        out += d.fluents[f].name + '=' + (s[f] == kUndef ? std::string("?") : std::to_string(s[f]));
    }
    return out;
}

void write_records(std::ostream& os, const DomainDescription& d, const Trajectory& t) {
    for (std::size_t i = 0; i < t.states.size(); ++i) {
        if (i > 0) os << "action " << i << ' ' << d.actions[static_cast<std::size_t>(t.actions[i - 1])] << '\n';
        os << "state " << i << ' ' << format_state(d, t.states[i]) << '\n';
    }
}

Trajectory read_records(std::istream& is, const DomainDescription& d) {
    Trajectory t;
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) { throw FrontendError({lineno, 1}, msg); };
    while (std::getline(is, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind) || kind[0] == '#') continue;
        int idx = -1;
        if (!(ls >> idx)) fail("missing index");
        if (kind == "state") {
            if (idx != static_cast<int>(t.states.size())) fail("state " + std::to_string(idx) + " out of order");
            StateValues s(static_cast<std::size_t>(d.num_fluents()), kUndef);
            std::string kv;
            while (ls >> kv) {
                auto eq = kv.rfind('=');
                if (eq == std::string::npos) fail("expected fluent=value, got " + kv);
                auto it = d.fluent_index.find(kv.substr(0, eq));
                if (it == d.fluent_index.end()) fail("unknown fluent " + kv.substr(0, eq));
                std::string v = kv.substr(eq + 1);
                if (v != "?") {
                    try {
                        s[static_cast<std::size_t>(it->second)] = std::stoll(v);
                    } catch (const std::exception&) {
                        fail("bad value " + v);
                    }
                }
            }
            t.states.push_back(std::move(s));
        } else if (kind == "action") {
            if (idx != static_cast<int>(t.actions.size()) + 1 || t.states.size() != t.actions.size() + 1)
                fail("action " + std::to_string(idx) + " out of order");
            std::string name;
            ls >> name;
            auto it = d.action_index.find(name);
            if (it == d.action_index.end()) fail("unknown action " + name);
            t.actions.push_back(it->second);
        } else {
            fail("unknown record " + kind);
        }
    }
    if (t.states.empty() || t.states.size() != t.actions.size() + 1) fail("trajectory must end with a state");
    return t;
}

} // namespace bplan
