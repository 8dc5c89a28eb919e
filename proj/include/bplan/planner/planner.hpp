#pragma once

#include "bplan/bencoder/bencoder.hpp"
#include "bplan/frontend/domain.hpp"
#include "bplan/frontend/trajectory.hpp"
#include "bplan/mvencoder/mvencoder.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bplan::planner {

enum class NoLoop { Auto, On, Off };
enum class Objective { None, Plan, Goal, Domain }; // Domain: the file's minimize_cost

struct PlanRequest {
    int min_length = 0;
    int max_length = 0;
    mvencoder::Minimality minimality = mvencoder::Minimality::Full;
    bencoder::LoopMode loops = bencoder::LoopMode::Auto;
    NoLoop no_loop = NoLoop::Auto;
    Objective objective = Objective::None;
    std::optional<double> time_limit; // seconds, whole request
    std::uint64_t node_limit = 0;     // per length, 0 = unlimited
    std::size_t max_loops = 10'000;
    std::size_t max_combinations = 100'000;
    std::uint64_t seed = 0;           // nonzero: random value order with this seed
    bool record = false;              // keep the constraint listing of each length
    fd::Solver::TraceFn trace;
};

enum class Status { Sat, Unsat, Budget };
const char* status_name(Status s);

struct PlanStats {
    std::uint64_t nodes = 0;
    std::uint64_t propagations = 0;
    std::uint64_t rejected = 0; // solutions the oracle turned down
    std::uint64_t minimality_checks = 0;
    double seconds = 0;
};

struct PlanResult {
    Status status = Status::Unsat;
    int length = -1;
    Trajectory trajectory;
    std::vector<std::vector<std::string>> fired; // dynamic laws triggered at each step
    std::optional<fd::Value> cost;
    bool optimal = false;
    bool verified = false;
    bool no_loop = false;
    PlanStats stats;
    std::vector<std::string> listing; // constraint listing per searched length
    std::string message;
};

// Searches lengths min..max in ascending order and returns the first verified plan.
PlanResult plan(const DomainDescription& d, const PlanRequest& req);

// The matching oracle's verdict for a trajectory: empty string when valid.
std::string verify(const DomainDescription& d, const Trajectory& t);

// Plan listing for people: states, numbered actions and the cost.
void write_text(std::ostream& os, const DomainDescription& d, const PlanResult& r);

// Benchmark manifest lines: "<file> <N> <Y|N> [options]", '#' starts a comment.
struct BenchmarkCase {
    std::string file;
    int length = 0;
    bool expected = false;
    std::vector<std::string> options;
};

struct BenchmarkRow {
    BenchmarkCase bench;
    std::string got; // Y, N, BUDGET or ERROR
    double seconds = 0;
    std::string detail;
    bool matches() const { return got == (bench.expected ? "Y" : "N"); }
};

std::vector<BenchmarkCase> read_manifest(std::istream& is);
// Runs each case from `dir`; `time_limit` applies per case. `progress` sees each finished row.
std::vector<BenchmarkRow> run_benchmarks(const std::string& dir, const std::vector<BenchmarkCase>& cases,
                                         std::optional<double> time_limit,
                                         const std::function<void(const BenchmarkRow&)>& progress = {});
std::string format_row(const BenchmarkRow& r);

// Applies "--lang", "--minimality", "--loop-formulae", "--no-loop" and
// "--minimize" style options to the load and plan settings.
void apply_options(const std::vector<std::string>& options, ExtractOptions& ex, PlanRequest& req);

} // namespace bplan::planner
