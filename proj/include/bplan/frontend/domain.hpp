#pragma once

#include "bplan/fd/domain.hpp"
#include "bplan/frontend/ast.hpp"
#include "bplan/frontend/grounder.hpp"

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bplan {

enum class Language { B, BMV };

struct FluentDecl {
    std::string name; // canonical printed ground term
    frontend::Term term;
    fd::Domain domain;
};

struct DynamicLaw {
    int action;
    CondPtr effect;
    CondPtr pre;
    frontend::SourcePos pos;
};

struct StaticLaw {
    CondPtr body;
    CondPtr head;
    frontend::SourcePos pos;
};

struct ExecLaw {
    int action;
    CondPtr cond;
    frontend::SourcePos pos;
};

struct DomainDescription {
    Language lang = Language::BMV;
    std::vector<FluentDecl> fluents;
    std::unordered_map<std::string, int> fluent_index;
    std::vector<std::string> actions;
    std::vector<frontend::Term> action_terms;
    std::unordered_map<std::string, int> action_index;

    std::vector<DynamicLaw> dynamic_laws;
    std::vector<StaticLaw> static_laws;
    std::vector<ExecLaw> executable;
    std::vector<ExecLaw> nonexecutable;

    std::vector<CondPtr> initially;
    std::vector<CondPtr> goal;
    std::vector<std::pair<CondPtr, int>> holds;
    std::vector<CondPtr> always;
    std::vector<CondPtr> time_constraints;
    std::vector<ExprPtr> action_cost; // per action; null means 1
    ExprPtr state_cost;               // null means 1
    std::vector<CondPtr> cost_constraints;
    ExprPtr minimize_cost;

    int num_fluents() const { return static_cast<int>(fluents.size()); }
    int num_actions() const { return static_cast<int>(actions.size()); }
    int add_fluent(const std::string& name, fd::Domain dom);
    int add_action(const std::string& name);
    bool has_temporal_refs() const;
};

struct ExtractOptions {
    std::optional<Language> lang;   // auto-detected from fluent declarations when empty
    bool allow_nonexecutable = false;
    int max_term_depth = 4;         // nesting bound for fluent and action names
};

DomainDescription extract_domain(const frontend::GroundProgram& gp, const ExtractOptions& opts = {});
DomainDescription load_domain_text(const std::string& text, const ExtractOptions& opts = {},
                                   const frontend::GroundOptions& gopts = {});
DomainDescription load_domain_file(const std::string& path, const ExtractOptions& opts = {},
                                   const frontend::GroundOptions& gopts = {});

// Source-syntax rendering; parse(print(x)) yields x again.
frontend::Term to_term(const Cond& c, const DomainDescription& d);
frontend::Term to_term(const Expr& e, const DomainDescription& d);
std::string to_source(const Cond& c, const DomainDescription& d);
std::string to_source(const Expr& e, const DomainDescription& d);

// The ground theory as re-parseable facts.
std::string dump_ground(const DomainDescription& d);

// Fluent name printed as a B literal: f or neg(f).
std::string literal_name(const DomainDescription& d, int fluent, bool positive);

} // namespace bplan
