#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bplan::fd {

using Value = std::int64_t;

// Bounds used to keep interval arithmetic away from overflow.
inline constexpr Value kValueMin = -(Value{1} << 50);
inline constexpr Value kValueMax = (Value{1} << 50);

struct Interval {
    Value lo;
    Value hi;
    bool operator==(const Interval&) const = default;
};

// Finite set of integers kept as sorted, disjoint, non-adjacent intervals.
class Domain {
public:
    Domain() = default;

    static Domain range(Value lo, Value hi);
    static Domain from_values(std::vector<Value> values);
    static Domain from_intervals(std::vector<Interval> ivs);

    bool empty() const { return iv_.empty(); }
    Value min() const { return iv_.front().lo; }
    Value max() const { return iv_.back().hi; }
    bool is_fixed() const { return iv_.size() == 1 && iv_[0].lo == iv_[0].hi; }
    std::uint64_t size() const;
    bool contains(Value v) const;
    const std::vector<Interval>& intervals() const { return iv_; }

    // Each mutator returns true when the set changed.
    bool remove_below(Value v);
    bool remove_above(Value v);
    bool remove_value(Value v);
    bool remove_range(Value lo, Value hi);
    bool intersect(const Domain& other);
    bool assign(Value v);

    std::vector<Value> values() const;
    std::string to_string() const;

    bool operator==(const Domain&) const = default;

private:
    std::vector<Interval> iv_;
};

Domain intersection(const Domain& a, const Domain& b);
Domain shifted(const Domain& d, Value offset);

} // namespace bplan::fd
