#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace skewfbm {

/// Strictly increasing time nodes t_0 < ... < t_n.
class TimeGrid {
public:
  TimeGrid() = default;

  explicit TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw std::invalid_argument("time grid needs at least 2 nodes");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!std::isfinite(nodes_[i])) throw std::invalid_argument("time grid node is not finite");
      if (i > 0 && !(nodes_[i] > nodes_[i - 1]))
        throw std::invalid_argument("time grid nodes must be strictly increasing");
    }
  }

  /// n equal steps on [a, b]; node i is a + i*(b-a)/n, last node pinned to b.
  static TimeGrid uniform(double a, double b, std::size_t steps) {
    if (steps < 1) throw std::invalid_argument("uniform grid needs at least one step");
    if (!(b > a)) throw std::invalid_argument("uniform grid needs b > a");
    std::vector<double> t(steps + 1);
    const double h = (b - a) / static_cast<double>(steps);
    for (std::size_t i = 0; i <= steps; ++i) t[i] = a + h * static_cast<double>(i);
    t[steps] = b;
    return TimeGrid(std::move(t));
  }

  std::size_t size() const { return nodes_.size(); }
  std::size_t steps() const { return nodes_.size() - 1; }
  double operator[](std::size_t i) const { return nodes_[i]; }
  double front() const { return nodes_.front(); }
  double back() const { return nodes_.back(); }
  std::span<const double> nodes() const { return nodes_; }

  bool is_uniform(double rtol = 1e-10) const {
    const double h = (back() - front()) / static_cast<double>(steps());
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      if (std::abs((nodes_[i] - nodes_[i - 1]) - h) > rtol * h) return false;
    return true;
  }

  bool operator==(const TimeGrid& other) const { return nodes_ == other.nodes_; }

private:
  std::vector<double> nodes_;
};

/// Real values attached to the nodes of a TimeGrid. Non-finite values are
/// only produced by operators that mark a node as undefined (NaN).
struct GridFunction {
  TimeGrid grid;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(TimeGrid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.size())
      throw std::invalid_argument("grid function: value count does not match node count");
  }

  template <class F>
  static GridFunction sample(const TimeGrid& g, F&& f) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g[i]);
    return GridFunction(g, std::move(v));
  }

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  bool defined(std::size_t i) const { return std::isfinite(values[i]); }
};

inline void require_finite(const GridFunction& f, const char* what) {
  for (double v : f.values)
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": values must be finite");
}

}  // namespace skewfbm
