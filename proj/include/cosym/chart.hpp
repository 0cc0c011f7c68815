#pragma once

#include <algorithm>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cosym/dual.hpp"
#include "cosym/errors.hpp"

namespace cosym {

using Point = std::vector<double>;

/// A single global coordinate chart. The guard excludes points of removed
/// closed sets (the open-submanifold case); it receives plain coordinate
/// values and returns true when the point is admissible.
class CoordinateChart {
public:
    CoordinateChart() = default;
    CoordinateChart(std::vector<std::string> names,
                    std::function<bool(std::span<const double>)> guard = nullptr)
        : names_(std::move(names)), guard_(std::move(guard)) {}

    int dim() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(int i) const { return names_[static_cast<size_t>(i)]; }

    int index(const std::string& coordinate) const {
        auto it = std::find(names_.begin(), names_.end(), coordinate);
        if (it == names_.end())
            throw PreconditionViolation("chart has no coordinate named '" + coordinate + "'");
        return static_cast<int>(it - names_.begin());
    }

    bool has_guard() const { return static_cast<bool>(guard_); }

    bool inside(std::span<const double> x) const {
        return !guard_ || guard_(x);
    }

    void require_inside(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != dim())
            throw PreconditionViolation("point dimension does not match chart");
        if (!inside(x)) throw DomainGuardViolation("point excluded by domain guard");
    }

    bool operator==(const CoordinateChart& other) const { return names_ == other.names_; }

private:
    std::vector<std::string> names_;
    std::function<bool(std::span<const double>)> guard_;
};

/// Axis-aligned sampling box.
struct SampleBox {
    Point center;
    Point halfwidth;

    int dim() const { return static_cast<int>(center.size()); }
};

/// Uniform samples from the box, filtered by the chart guard. The seed is
/// the caller's to record; rejection is capped so a guard that eats the whole
/// box fails loudly.
inline std::vector<Point> sample_points(const CoordinateChart& chart, const SampleBox& box,
                                        int count, std::uint64_t seed) {
    if (box.dim() != chart.dim())
        throw PreconditionViolation("sample box dimension does not match chart");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Point> pts;
    pts.reserve(static_cast<size_t>(count));
    long attempts = 0;
    const long max_attempts = 1000L * std::max(count, 1);
    while (static_cast<int>(pts.size()) < count) {
        if (++attempts > max_attempts)
            throw DomainGuardViolation("sampling box nearly disjoint from guarded domain");
        Point x(static_cast<size_t>(chart.dim()));
        for (int i = 0; i < chart.dim(); ++i)
            x[static_cast<size_t>(i)] = box.center[static_cast<size_t>(i)] +
                                        box.halfwidth[static_cast<size_t>(i)] * u(rng);
        if (chart.inside(x)) pts.push_back(std::move(x));
    }
    return pts;
}

/// Extract the plain coordinate values from a point at any dual level.
template <class S>
Point values_of(std::span<const S> x) {
    Point v(x.size());
    for (size_t i = 0; i < x.size(); ++i) v[i] = value_of(x[i]);
    return v;
}

/// Lift a double point to dual level S with all derivative parts zero.
template <class S>
std::vector<S> lift_point(std::span<const double> x) {
    return std::vector<S>(x.begin(), x.end());
}

/// Lift with a unit seed in the given coordinate direction.
template <class S>
std::vector<Dual<S>> lift_with_seed(std::span<const S> x, int direction) {
    std::vector<Dual<S>> r(x.size());
    for (size_t i = 0; i < x.size(); ++i) r[i] = Dual<S>(x[i], S(0.0));
    r[static_cast<size_t>(direction)].d = S(1.0);
    return r;
}

} // namespace cosym
