// Command-line front end: plan, verify and bench subcommands.

#include "bplan/planner/planner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>

using namespace bplan;
using namespace bplan::planner;

namespace {

std::pair<int, int> parse_length(const std::string& s) {
    auto dots = s.find("..");
    try {
        if (dots == std::string::npos) {
            int n = std::stoi(s);
            return {n, n};
        }
        return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
    } catch (const std::exception&) {
        throw CLI::ValidationError("--length", "expected <n> or <a>..<b>, got " + s);
    }
}

std::optional<Language> parse_lang(const std::string& s) {
    if (s == "b") return Language::B;
    if (s == "bmv") return Language::BMV;
    return std::nullopt;
}

int run_plan(const std::string& file, const std::map<std::string, std::string>& opt, bool dump_constraints,
             bool dump_ground_flag, bool explain, bool trace, bool allow_nonexec, std::optional<double> time_limit,
             std::uint64_t seed, std::uint64_t node_limit) {
    ExtractOptions ex;
    PlanRequest req;
    std::vector<std::string> pairs;
    for (const auto& [k, v] : opt)
        if (k != "--length" && k != "--format") pairs.insert(pairs.end(), {k, v});
    apply_options(pairs, ex, req);
    ex.allow_nonexecutable = allow_nonexec;
    req.time_limit = time_limit;
    req.seed = seed;
    req.node_limit = node_limit;
    req.record = dump_constraints;

    auto d = load_domain_file(file, ex);
    if (dump_ground_flag) std::cout << dump_ground(d);
    if (explain) {
        for (const auto& line : mvencoder::explain_clusters(d, mvencoder::compute_clusters(d))) std::cout << line << '\n';
    }
    auto len = opt.find("--length");
    if (len == opt.end()) {
        if (dump_ground_flag || explain) return 0;
        throw CLI::ValidationError("--length", "required unless only dumping");
    }
    std::tie(req.min_length, req.max_length) = parse_length(len->second);
    if (trace)
        req.trace = [](fd::VarId v, const fd::Domain& dom, int cause) {
            std::cerr << "var=" << v << " dom=" << dom.to_string() << " cause=" << cause << '\n';
        };

    PlanResult r = plan(d, req);
    if (dump_constraints)
        for (const auto& line : r.listing) std::cout << line << '\n';
    if (opt.at("--format") == "records") {
        if (r.status == Status::Sat) write_records(std::cout, d, r.trajectory);
        else std::cout << "status " << status_name(r.status) << '\n';
    } else {
        write_text(std::cout, d, r);
    }
    std::cerr << "nodes=" << r.stats.nodes << " propagations=" << r.stats.propagations << " rejected=" << r.stats.rejected
              << " no_loop=" << (r.no_loop ? "on" : "off") << " seconds=" << r.stats.seconds << '\n';
    switch (r.status) {
    case Status::Sat: return 0;
    case Status::Unsat: return 2;
    case Status::Budget: return 3;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Planner for action descriptions in B and B^MV"};
    app.require_subcommand(1);

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "search for a plan over a length range");
    std::string file, length, lang = "auto", minimality = "full", loops = "auto", no_loop = "auto",
                                 minimize = "domain", format = "text";
    bool dump_constraints = false, dump_ground_flag = false, explain = false, trace = false, allow_nonexec = false;
    std::optional<double> time_limit;
    std::uint64_t seed = 0, node_limit = 0;
    plan_cmd->add_option("file", file, "domain file")->required()->check(CLI::ExistingFile);
    plan_cmd->add_option("--length", length, "plan length n or range a..b");
    plan_cmd->add_option("--lang", lang)->check(CLI::IsMember({"auto", "b", "bmv"}));
    plan_cmd->add_option("--minimality", minimality)->check(CLI::IsMember({"off", "cluster", "full", "supported"}));
    plan_cmd->add_option("--loop-formulae", loops)->check(CLI::IsMember({"on", "off", "auto"}));
    plan_cmd->add_option("--no-loop", no_loop, "forbid repeated states")->check(CLI::IsMember({"on", "off", "auto"}));
    plan_cmd->add_option("--minimize", minimize)->check(CLI::IsMember({"plan", "goal", "domain", "none"}));
    plan_cmd->add_option("--format", format)->check(CLI::IsMember({"text", "records"}));
    plan_cmd->add_flag("--dump-constraints", dump_constraints);
    plan_cmd->add_flag("--dump-ground", dump_ground_flag);
    plan_cmd->add_flag("--explain-clusters", explain);
    plan_cmd->add_flag("--trace-propagation", trace, "domain changes on stderr");
    plan_cmd->add_flag("--allow-nonexecutable", allow_nonexec);
    plan_cmd->add_option("--seed", seed);
    plan_cmd->add_option("--time-limit", time_limit, "seconds")->check(CLI::PositiveNumber);
    plan_cmd->add_option("--node-limit", node_limit);

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "check a trajectory in records format");
    std::string vdomain, vtraj, vlang = "auto";
    verify_cmd->add_option("domain", vdomain)->required()->check(CLI::ExistingFile);
    verify_cmd->add_option("trajectory", vtraj)->required()->check(CLI::ExistingFile);
    verify_cmd->add_option("--lang", vlang)->check(CLI::IsMember({"auto", "b", "bmv"}));

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "run a benchmark manifest");
    std::string manifest, dir;
    std::optional<double> bench_limit;
    bench_cmd->add_option("manifest", manifest)->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("--dir", dir, "domain directory (default: the manifest's)");
    bench_cmd->add_option("--time-limit", bench_limit, "seconds per case")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*plan_cmd) {
            std::map<std::string, std::string> opt{{"--lang", lang},       {"--minimality", minimality},
                                                   {"--loop-formulae", loops}, {"--no-loop", no_loop},
                                                   {"--format", format}};
            if (minimize != "none") opt["--minimize"] = minimize;
            if (!length.empty()) opt["--length"] = length;
            return run_plan(file, opt, dump_constraints, dump_ground_flag, explain, trace, allow_nonexec, time_limit,
                            seed, node_limit);
        }
        if (*verify_cmd) {
            ExtractOptions ex;
            ex.lang = parse_lang(vlang);
            auto d = load_domain_file(vdomain, ex);
            std::ifstream in(vtraj);
            Trajectory t = read_records(in, d);
            std::string why = verify(d, t);
            if (why.empty()) {
                std::cout << "valid trajectory of length " << t.length() << '\n';
                return 0;
            }
            std::cout << "invalid: " << why << '\n';
            return 2;
        }
        if (*bench_cmd) {
            if (dir.empty()) {
                auto slash = manifest.find_last_of('/');
                dir = slash == std::string::npos ? "." : manifest.substr(0, slash);
            }
            std::ifstream in(manifest);
            auto cases = read_manifest(in);
            int mismatches = 0;
            run_benchmarks(dir, cases, bench_limit, [&](const BenchmarkRow& r) {
                std::cout << format_row(r) << std::endl;
                if (!r.matches()) ++mismatches;
            });
            std::cout << cases.size() - static_cast<std::size_t>(mismatches) << "/" << cases.size() << " match\n";
            return mismatches ? 1 : 0;
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
