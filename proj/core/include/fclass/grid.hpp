#pragma once

#include <cstddef>
#include <vector>

namespace fclass {

/// Shared time grid for functional observations on [0,1].
///
/// The grid is uniform, starts at 0, ends at 1, and has an odd number of
/// points (an even number of intervals), so composite Simpson's rule
/// applies directly.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> points);

    /// Uniform grid with `n_points` points on [0,1]; `n_points` must be odd.
    static TimeGrid regular(std::size_t n_points);

    /// Default experiment grid: 0, 0.01, ..., 1.0 (101 points).
    static TimeGrid standard() { return regular(101); }

    const std::vector<double>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }
    double step() const { return step_; }

    bool operator==(const TimeGrid& other) const { return points_ == other.points_; }
    bool operator!=(const TimeGrid& other) const { return !(*this == other); }

private:
    std::vector<double> points_;
    double step_ = 0.0;
};

}  // namespace fclass
