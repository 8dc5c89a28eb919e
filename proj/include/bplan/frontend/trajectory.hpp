#pragma once

#include "bplan/frontend/domain.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bplan {

// Missing value of a multi-valued state.
inline constexpr std::int64_t kUndef = INT64_MIN;

using StateValues = std::vector<std::int64_t>;

// s0, a1, s1, ..., aN, sN; actions[i] leads from states[i] to states[i+1].
struct Trajectory {
    std::vector<StateValues> states;
    std::vector<int> actions;
    int length() const { return static_cast<int>(actions.size()); }
};

// Line records: "state <i> f=v ..." and "action <i> <name>", i counted from 0
// for states and from 1 for actions.
void write_records(std::ostream& os, const DomainDescription& d, const Trajectory& t);
Trajectory read_records(std::istream& is, const DomainDescription& d);

std::string format_state(const DomainDescription& d, const StateValues& s);

} // namespace bplan
