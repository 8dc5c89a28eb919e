#include "bplan/planner/planner.hpp"

#include "bplan/boracle/boracle.hpp"
#include "bplan/mvoracle/mvoracle.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace bplan::planner {

namespace {

using Clock = std::chrono::steady_clock;

struct VecHash {
    std::size_t operator()(const std::vector<fd::Value>& v) const {
        std::size_t h = v.size();
        for (auto x : v) h = h * 1000003u ^ std::hash<fd::Value>{}(x);
        return h;
    }
};

bool shifts_within(const CondPtr& c, int lo, int hi) {
    if (!c) return true;
    std::vector<FluentRef> refs;
    collect_refs(*c, refs);
    for (const auto& r : refs)
        if (r.timed || r.shift < lo || r.shift > hi) return false;
    return true;
}

// Each transition depends on its source state alone: effects may look one
// step back, nothing else is annotated, and no costs or timed assertions exist.
bool markovian(const DomainDescription& d) {
    if (!d.time_constraints.empty() || !d.holds.empty() || !d.cost_constraints.empty() || d.minimize_cost ||
        d.state_cost)
        return false;
    for (const auto& c : d.action_cost)
        if (c) return false;
    auto plain = [](const CondPtr& c) { return shifts_within(c, 0, 0) && !(c && has_cost_terms(*c)); };
    for (const auto& l : d.dynamic_laws)
        if (!shifts_within(l.effect, -1, 0) || has_cost_terms(*l.effect) || !plain(l.pre)) return false;
    for (const auto& l : d.static_laws)
        if (!plain(l.body) || !plain(l.head)) return false;
    for (const auto& l : d.executable)
        if (!plain(l.cond)) return false;
    for (const auto& l : d.nonexecutable)
        if (!plain(l.cond)) return false;
    for (const auto& c : d.always)
        if (!plain(c)) return false;
    return true;
}

// Fails when two fully assigned layers of the labeled prefix coincide.
bool distinct_layers(const fd::Solver& s, const std::vector<std::vector<fd::VarId>>& F) {
    std::unordered_set<std::vector<fd::Value>, VecHash> seen;
    for (const auto& layer : F) {
        std::vector<fd::Value> row;
        for (auto v : layer) {
            if (!s.fixed(v)) return true;
            row.push_back(s.value(v));
        }
        if (!seen.insert(std::move(row)).second) return false;
    }
    return true;
}

Trajectory read_trajectory(const std::vector<std::vector<fd::VarId>>& F, const std::vector<std::vector<fd::VarId>>& A,
                           const std::function<fd::Value(fd::VarId)>& value) {
    Trajectory t;
    for (std::size_t L = 0; L < F.size(); ++L) {
        StateValues row;
        for (auto v : F[L]) row.push_back(value(v));
        t.states.push_back(std::move(row));
        if (L < A.size()) {
            int act = -1;
            for (std::size_t a = 0; a < A[L].size(); ++a)
                if (value(A[L][a]) == 1) act = static_cast<int>(a);
            t.actions.push_back(act);
        }
    }
    return t;
}

std::vector<std::vector<std::string>> fired_laws(const DomainDescription& d, const Trajectory& tr) {
    auto t = mvoracle::make_timeline(d, tr);
    std::vector<std::vector<std::string>> out;
    for (int j = 0; j < tr.length(); ++j) {
        std::vector<std::string> step;
        int a = tr.actions[static_cast<std::size_t>(j)];
        for (const auto& law : d.dynamic_laws)
            if (law.action == a && mvoracle::satisfies_at(t, j, *law.pre))
                step.push_back("causes(" + d.actions[static_cast<std::size_t>(a)] + ", " + to_source(*law.effect, d) +
                               ", " + to_source(*law.pre, d) + ")");
        out.push_back(std::move(step));
    }
    return out;
}

// One encoded length, either language.
struct Encoded {
    std::unique_ptr<fd::Solver> solver;
    std::vector<std::vector<fd::VarId>> F, A;
    std::vector<fd::VarId> order;
    std::optional<fd::VarId> objective;
    std::vector<std::string> listing;
    mvencoder::MVProblem mv;
    bool is_mv = false;
};

Encoded encode(const DomainDescription& d, int N, const PlanRequest& req) {
    Encoded e;
    if (d.lang == Language::B) {
        bencoder::EncodeOptions o;
        o.loops = req.loops;
        o.max_loops = req.max_loops;
        o.max_combinations = req.max_combinations;
        o.record = req.record;
        auto p = bencoder::encode_problem(d, N, o);
        e.solver = std::move(p.solver);
        e.F = p.layers.F;
        e.A = p.layers.A;
        e.order = p.order;
        e.listing = std::move(p.listing);
        return e;
    }
    e.mv = mvencoder::encode_problem(d, N, {req.minimality, true, req.record});
    e.is_mv = true;
    e.solver = std::move(e.mv.solver);
    e.F = e.mv.F;
    e.A = e.mv.A;
    e.order = e.mv.order;
    e.objective = e.mv.objective;
    e.listing = std::move(e.mv.listing);
    return e;
}

} // namespace

const char* status_name(Status s) {
    switch (s) {
    case Status::Sat: return "SAT";
    case Status::Unsat: return "UNSAT";
    case Status::Budget: return "BUDGET";
    }
    return "?";
}

std::string verify(const DomainDescription& d, const Trajectory& t) {
    try {
        if (d.lang == Language::B) {
            auto v = boracle::BOracle(d).verify_trajectory(t);
            return v.ok ? "" : v.reason;
        }
        auto v = mvoracle::MVOracle(d).valid_trajectory(t);
        return v.ok ? "" : v.reason;
    } catch (const std::length_error& e) {
        return std::string("oracle could not decide: ") + e.what();
    }
}

PlanResult plan(const DomainDescription& d, const PlanRequest& req) {
    if (req.min_length < 0 || req.min_length > req.max_length) throw std::invalid_argument("bad plan length range");
    auto start = Clock::now();
    std::optional<Clock::time_point> deadline;
    if (req.time_limit) {
        if (*req.time_limit <= 0) throw std::invalid_argument("time limit must be positive");
        deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(*req.time_limit));
    }

    bool is_b = d.lang == Language::B;
    DomainDescription dm = d;
    switch (req.objective) {
    case Objective::None: dm.minimize_cost = nullptr; break;
    case Objective::Plan: dm.minimize_cost = make_cost(ExprKind::CostPlan); break;
    case Objective::Goal: dm.minimize_cost = make_cost(ExprKind::CostGoal); break;
    case Objective::Domain: break;
    }
    bool minimizing = !is_b && dm.minimize_cost != nullptr;

    PlanResult res;
    res.no_loop = req.no_loop == NoLoop::On || (req.no_loop == NoLoop::Auto && (is_b || markovian(d)));
    auto finish = [&](Status s) {
        res.status = s;
        res.stats.seconds = std::chrono::duration<double>(Clock::now() - start).count();
        return res;
    };

    for (int N = req.min_length; N <= req.max_length; ++N) {
        if (deadline && Clock::now() >= *deadline) {
            res.message = "time limit reached before length " + std::to_string(N);
            return finish(Status::Budget);
        }
        Encoded e = encode(dm, N, req);
        if (req.record) {
            res.listing.push_back("% length " + std::to_string(N));
            res.listing.insert(res.listing.end(), e.listing.begin(), e.listing.end());
        }
        fd::Solver& s = *e.solver;
        if (req.trace) s.set_trace(req.trace);

        fd::SearchOptions opts;
        opts.order = e.order;
        opts.deadline = deadline;
        opts.node_limit = req.node_limit;
        if (req.seed) {
            opts.value_order = fd::ValueOrder::Random;
            opts.seed = req.seed;
        }
        bool no_loop = res.no_loop;
        opts.node_hook = [&e, no_loop](fd::Solver& sv) {
            if (e.is_mv && !e.mv.check_node(sv)) return false;
            return !no_loop || distinct_layers(sv, e.F);
        };

        auto accept = [&](fd::Solver& sv) {
            Trajectory t = read_trajectory(e.F, e.A, [&sv](fd::VarId v) { return sv.value(v); });
            if (verify(d, t).empty()) return true;
            ++res.stats.rejected;
            return false;
        };

        std::optional<Trajectory> found;
        bool budget = false;
        if (minimizing) {
            auto m = fd::minimize(s, *e.objective, opts, accept);
            res.stats.nodes += m.stats.nodes;
            if (m.found) {
                found = read_trajectory(e.F, e.A, [&m](fd::VarId v) { return m.values[static_cast<std::size_t>(v)]; });
                res.cost = m.best;
                res.optimal = m.status == fd::SearchStatus::Solution;
            }
            budget = m.status == fd::SearchStatus::Budget;
        } else {
            fd::Search search(s, opts);
            fd::SearchStatus st;
            while ((st = search.next()) == fd::SearchStatus::Solution) {
                if (accept(s)) {
                    found = read_trajectory(e.F, e.A, [&s](fd::VarId v) { return s.value(v); });
                    break;
                }
            }
            res.stats.nodes += search.stats().nodes;
            budget = st == fd::SearchStatus::Budget;
        }
        res.stats.propagations += s.propagations();
        if (e.is_mv) res.stats.minimality_checks += e.mv.minimality_checks();

        if (found) {
            res.length = N;
            res.trajectory = std::move(*found);
            res.verified = true;
            res.fired = fired_laws(d, res.trajectory);
            if (!res.cost) {
                if (is_b) res.cost = N;
                else res.cost = mvoracle::plan_cost(mvoracle::make_timeline(d, res.trajectory));
            }
            return finish(Status::Sat);
        }
        if (budget) {
            res.message = "search budget exhausted at length " + std::to_string(N);
            return finish(Status::Budget);
        }
    }
    return finish(Status::Unsat);
}

void write_text(std::ostream& os, const DomainDescription& d, const PlanResult& r) {
    if (r.status != Status::Sat) {
        os << status_name(r.status);
        if (!r.message.empty()) os << ": " << r.message;
        os << '\n';
        return;
    }
    os << "plan of length " << r.length;
    if (r.cost) os << ", cost " << *r.cost << (r.optimal ? " (optimal)" : "");
    os << (r.verified ? ", verified" : ", NOT verified") << '\n';
    const auto& t = r.trajectory;
    for (std::size_t i = 0; i < t.states.size(); ++i) {
        os << "  state " << i << ": " << format_state(d, t.states[i]) << '\n';
        if (i < t.actions.size())
            os << "  " << std::setw(3) << (i + 1) << ". " << d.actions[static_cast<std::size_t>(t.actions[i])] << '\n';
    }
}

std::vector<BenchmarkCase> read_manifest(std::istream& is) {
    std::vector<BenchmarkCase> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        BenchmarkCase c;
        std::string answer;
        if (!(ls >> c.file)) continue;
        if (!(ls >> c.length >> answer) || (answer != "Y" && answer != "N"))
            throw std::invalid_argument("manifest line " + std::to_string(lineno) + ": expected <file> <N> <Y|N>");
        c.expected = answer == "Y";
        for (std::string opt; ls >> opt;) c.options.push_back(opt);
        out.push_back(std::move(c));
    }
    return out;
}

void apply_options(const std::vector<std::string>& options, ExtractOptions& ex, PlanRequest& req) {
    for (std::size_t k = 0; k < options.size(); ++k) {
        const std::string& key = options[k];
        if (k + 1 >= options.size()) throw std::invalid_argument("option " + key + " needs a value");
        const std::string& val = options[++k];
        auto bad = [&]() { return std::invalid_argument("bad value for " + key + ": " + val); };
        if (key == "--lang") {
            if (val == "b") ex.lang = Language::B;
            else if (val == "bmv") ex.lang = Language::BMV;
            else if (val == "auto") ex.lang.reset();
            else throw bad();
        } else if (key == "--minimality") {
            if (val == "off") req.minimality = mvencoder::Minimality::Off;
            else if (val == "cluster") req.minimality = mvencoder::Minimality::Cluster;
            else if (val == "full") req.minimality = mvencoder::Minimality::Full;
            else if (val == "supported") req.minimality = mvencoder::Minimality::Supported;
            else throw bad();
        } else if (key == "--loop-formulae") {
            if (val == "on") req.loops = bencoder::LoopMode::On;
            else if (val == "off") req.loops = bencoder::LoopMode::Off;
            else if (val == "auto") req.loops = bencoder::LoopMode::Auto;
            else throw bad();
        } else if (key == "--no-loop") {
            if (val == "on") req.no_loop = NoLoop::On;
            else if (val == "off") req.no_loop = NoLoop::Off;
            else if (val == "auto") req.no_loop = NoLoop::Auto;
            else throw bad();
        } else if (key == "--minimize") {
            if (val == "plan") req.objective = Objective::Plan;
            else if (val == "goal") req.objective = Objective::Goal;
            else if (val == "domain") req.objective = Objective::Domain;
            else throw bad();
        } else if (key == "--node-limit") {
            req.node_limit = std::stoull(val);
        } else {
            throw std::invalid_argument("unknown option " + key);
        }
    }
}

std::vector<BenchmarkRow> run_benchmarks(const std::string& dir, const std::vector<BenchmarkCase>& cases,
                                         std::optional<double> time_limit,
                                         const std::function<void(const BenchmarkRow&)>& progress) {
    std::vector<BenchmarkRow> rows;
    for (const auto& c : cases) {
        BenchmarkRow row{c, "ERROR", 0, ""};
        auto start = Clock::now();
        try {
            ExtractOptions ex;
            PlanRequest req;
            apply_options(c.options, ex, req);
            req.min_length = req.max_length = c.length;
            req.time_limit = time_limit;
            auto d = load_domain_file(dir + "/" + c.file, ex);
            auto r = plan(d, req);
            switch (r.status) {
            case Status::Sat: row.got = r.verified ? "Y" : "ERROR"; break;
            case Status::Unsat: row.got = "N"; break;
            case Status::Budget: row.got = "BUDGET"; break;
            }
            row.detail = r.message;
        } catch (const std::exception& e) {
            row.got = "ERROR";
            row.detail = e.what();
        }
        row.seconds = std::chrono::duration<double>(Clock::now() - start).count();
        if (progress) progress(row);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_row(const BenchmarkRow& r) {
    std::ostringstream os;
    os << r.bench.file << ' ' << r.bench.length << ' ' << (r.bench.expected ? 'Y' : 'N') << ' ' << r.got << ' '
       << std::fixed << std::setprecision(3) << r.seconds;
    if (!r.detail.empty()) os << " # " << r.detail;
    return os.str();
}

} // namespace bplan::planner
