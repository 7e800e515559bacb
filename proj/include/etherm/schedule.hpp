#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "etherm/params.hpp"

namespace etherm {

/// Piecewise-constant schedule of (time s, value) breakpoints, sorted by time.
/// Before the first breakpoint the first value holds.
class Schedule {
public:
    Schedule() = default;
    explicit Schedule(double constant) : points_{{0.0, constant}} {}
    explicit Schedule(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {}

    void validate(const std::string& field) const {
        if (points_.empty()) throw ValidationError(field, "schedule must have at least one point");
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (!std::isfinite(points_[i].first) || !std::isfinite(points_[i].second))
                throw ValidationError(field + "[" + std::to_string(i) + "]", "must be finite");
            if (i > 0 && points_[i].first < points_[i - 1].first)
                throw ValidationError(field + "[" + std::to_string(i) + "]", "schedule must be sorted by time");
        }
    }

    double at(double t) const {
        if (points_.empty()) return 0.0;
        double v = points_.front().second;
        for (const auto& [time, value] : points_) {
            if (time > t) break;
            v = value;
        }
        return v;
    }

    const std::vector<std::pair<double, double>>& points() const { return points_; }
    bool empty() const { return points_.empty(); }

private:
    std::vector<std::pair<double, double>> points_;
};

/// Seeded hourly piecewise-constant current profile with levels drawn
/// uniformly in [min_fraction, max_fraction] x rated. The draw uses raw
/// mt19937_64 output so the sequence is identical on every standard library.
inline Schedule synthetic_hourly_profile(double rated, double min_fraction, double max_fraction, int hours,
                                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<double, double>> pts;
    pts.reserve(static_cast<std::size_t>(hours));
    for (int h = 0; h < hours; ++h) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        pts.emplace_back(3600.0 * h, rated * (min_fraction + (max_fraction - min_fraction) * u));
    }
    return Schedule(std::move(pts));
}

}  // namespace etherm
