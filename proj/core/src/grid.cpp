#include "fclass/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fclass {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    const std::size_t n = points_.size();
    if (n < 3) {
        throw std::invalid_argument("TimeGrid: need at least 3 points, got " + std::to_string(n));
    }
    if (n % 2 == 0) {
        throw std::invalid_argument("TimeGrid: point count must be odd (even interval count), got " +
                                    std::to_string(n));
    }
    if (points_.front() != 0.0 || points_.back() != 1.0) {
        throw std::invalid_argument("TimeGrid: grid must start at 0 and end at 1");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(points_[i] > points_[i - 1])) {
            throw std::invalid_argument("TimeGrid: points must be strictly increasing (violated at index " +
                                        std::to_string(i) + ")");
        }
    }
    const double h = 1.0 / static_cast<double>(n - 1);
    for (std::size_t i = 1; i < n; ++i) {
        const double d = points_[i] - points_[i - 1];
        if (std::abs(d - h) > 1e-12 * std::max(1.0, h)) {
            throw std::invalid_argument("TimeGrid: non-uniform spacing at index " + std::to_string(i) +
                                        " (got " + std::to_string(d) + ", expected " + std::to_string(h) + ")");
        }
    }
    step_ = h;
}

TimeGrid TimeGrid::regular(std::size_t n_points) {
    if (n_points < 3 || n_points % 2 == 0) {
        throw std::invalid_argument("TimeGrid::regular: point count must be odd and >= 3");
    }
    std::vector<double> pts(n_points);
    const double h = 1.0 / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) pts[i] = static_cast<double>(i) * h;
    pts.back() = 1.0;
    return TimeGrid(std::move(pts));
}

}  // namespace fclass
