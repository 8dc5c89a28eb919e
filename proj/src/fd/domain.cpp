#include "bplan/fd/domain.hpp"

#include <algorithm>
#include <sstream>

namespace bplan::fd {

namespace {

void normalize(std::vector<Interval>& ivs) {
    std::sort(ivs.begin(), ivs.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> out;
    for (const auto& iv : ivs) {
        if (iv.lo > iv.hi) continue;
        if (!out.empty() && iv.lo <= out.back().hi + 1)
            out.back().hi = std::max(out.back().hi, iv.hi);
        else
            out.push_back(iv);
    }
    ivs.swap(out);
}

} // namespace

Domain Domain::range(Value lo, Value hi) {
    Domain d;
    if (lo <= hi) d.iv_.push_back({lo, hi});
    return d;
}

Domain Domain::from_values(std::vector<Value> values) {
    std::vector<Interval> ivs;
    ivs.reserve(values.size());
    for (Value v : values) ivs.push_back({v, v});
    return from_intervals(std::move(ivs));
}

Domain Domain::from_intervals(std::vector<Interval> ivs) {
    normalize(ivs);
    Domain d;
    d.iv_ = std::move(ivs);
    return d;
}

std::uint64_t Domain::size() const {
    std::uint64_t n = 0;
    for (const auto& iv : iv_) n += static_cast<std::uint64_t>(iv.hi - iv.lo) + 1;
    return n;
}

bool Domain::contains(Value v) const {
    auto it = std::upper_bound(iv_.begin(), iv_.end(), v, [](Value x, const Interval& iv) { return x < iv.lo; });
    if (it == iv_.begin()) return false;
    --it;
    return v <= it->hi;
}

bool Domain::remove_below(Value v) {
    if (iv_.empty() || v <= iv_.front().lo) return false;
    std::size_t k = 0;
    while (k < iv_.size() && iv_[k].hi < v) ++k;
    iv_.erase(iv_.begin(), iv_.begin() + static_cast<std::ptrdiff_t>(k));
    if (!iv_.empty() && iv_.front().lo < v) iv_.front().lo = v;
    return true;
}

bool Domain::remove_above(Value v) {
    if (iv_.empty() || v >= iv_.back().hi) return false;
    while (!iv_.empty() && iv_.back().lo > v) iv_.pop_back();
    if (!iv_.empty() && iv_.back().hi > v) iv_.back().hi = v;
    return true;
}

bool Domain::remove_value(Value v) { return remove_range(v, v); }

bool Domain::remove_range(Value lo, Value hi) {
    if (lo > hi || iv_.empty() || hi < min() || lo > max()) return false;
    std::vector<Interval> out;
    out.reserve(iv_.size() + 1);
    bool changed = false;
    for (const auto& iv : iv_) {
        if (iv.hi < lo || iv.lo > hi) {
            out.push_back(iv);
            continue;
        }
        changed = true;
        if (iv.lo < lo) out.push_back({iv.lo, lo - 1});
        if (iv.hi > hi) out.push_back({hi + 1, iv.hi});
    }
    if (changed) iv_.swap(out);
    return changed;
}

bool Domain::intersect(const Domain& other) {
    Domain r = fd::intersection(*this, other);
    if (r == *this) return false;
    *this = std::move(r);
    return true;
}

bool Domain::assign(Value v) {
    if (is_fixed() && iv_[0].lo == v) return false;
    if (!contains(v)) {
        iv_.clear();
        return true;
    }
    iv_.assign(1, Interval{v, v});
    return true;
}

std::vector<Value> Domain::values() const {
    std::vector<Value> out;
    for (const auto& iv : iv_)
        for (Value v = iv.lo; v <= iv.hi; ++v) out.push_back(v);
    return out;
}

std::string Domain::to_string() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < iv_.size(); ++i) {
        if (i) os << ',';
        if (iv_[i].lo == iv_[i].hi)
            os << iv_[i].lo;
        else
            os << iv_[i].lo << ".." << iv_[i].hi;
    }
    os << '}';
    return os.str();
}

Domain intersection(const Domain& a, const Domain& b) {
    std::vector<Interval> out;
    const auto& x = a.intervals();
    const auto& y = b.intervals();
    std::size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        Value lo = std::max(x[i].lo, y[j].lo);
        Value hi = std::min(x[i].hi, y[j].hi);
        if (lo <= hi) out.push_back({lo, hi});
        if (x[i].hi < y[j].hi)
            ++i;
        else
            ++j;
    }
    return Domain::from_intervals(std::move(out));
}

Domain shifted(const Domain& d, Value offset) {
    std::vector<Interval> out;
    for (const auto& iv : d.intervals()) out.push_back({iv.lo + offset, iv.hi + offset});
    return Domain::from_intervals(std::move(out));
}

} // namespace bplan::fd
