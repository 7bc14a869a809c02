#ifndef CRITLIM_GRID_HPP
#define CRITLIM_GRID_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace critlim {

/// Quadrature grid on (0, e^{n t}]: equally spaced nodes up to 1, then
/// geometrically spaced up to the horizon.  Trapezoid weights; the first
/// weight also carries the [0, u1] mass as a rectangle, so the weights sum
/// to the horizon exactly.
struct TimeGrid {
  std::vector<double> nodes;    // strictly increasing, positive
  std::vector<double> weights;  // positive, sum == nodes.back()
  double n = 0.0;
  double t = 0.0;
  std::size_t m_lin = 0;
  std::size_t m_log = 0;

  std::size_t size() const { return nodes.size(); }
  double horizon() const { return nodes.back(); }

  static TimeGrid from_nodes(std::vector<double> nodes);
};

namespace detail {

inline std::vector<double> trapezoid_weights(const std::vector<double>& u) {
  const std::size_t m = u.size();
  std::vector<double> w(m);
  if (m == 1) {
    w[0] = u[0];
    return w;
  }
  w[0] = u[0] + 0.5 * (u[1] - u[0]);
  for (std::size_t i = 1; i + 1 < m; ++i) w[i] = 0.5 * (u[i + 1] - u[i - 1]);
  w[m - 1] = 0.5 * (u[m - 1] - u[m - 2]);
  return w;
}

}  // namespace detail

inline TimeGrid TimeGrid::from_nodes(std::vector<double> nodes) {
  if (nodes.empty()) throw std::invalid_argument("TimeGrid: empty node set");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] <= 0.0 || (i > 0 && nodes[i] <= nodes[i - 1]))
      throw std::invalid_argument("TimeGrid: nodes must be positive and increasing");
  }
  TimeGrid g;
  g.weights = detail::trapezoid_weights(nodes);
  g.nodes = std::move(nodes);
  return g;
}

inline TimeGrid build_grid(double n, double t, std::size_t m_lin,
                           std::size_t m_log) {
  if (!(n * t > 0.0))
    throw std::invalid_argument("build_grid: need n * t > 0");
  if (n * t > 700.0) throw std::invalid_argument("build_grid: horizon too large");
  if (m_lin < 2 || m_log < 2)
    throw std::invalid_argument("build_grid: need m_lin >= 2 and m_log >= 2");

  const double horizon = std::exp(n * t);
  std::vector<double> u;
  u.reserve(m_lin + m_log);
  for (std::size_t i = 1; i <= m_lin; ++i)
    u.push_back(static_cast<double>(i) / static_cast<double>(m_lin));
  // node 1 is the last linear node; continue geometrically to the horizon
  for (std::size_t k = 1; k + 1 < m_log; ++k)
    u.push_back(std::exp(n * t * static_cast<double>(k) /
                         static_cast<double>(m_log - 1)));
  u.push_back(horizon);

  TimeGrid g = TimeGrid::from_nodes(std::move(u));
  g.n = n;
  g.t = t;
  g.m_lin = m_lin;
  g.m_log = m_log;
  return g;
}

// Uniform grid {h, 2h, ..., m h}; the spacing pattern required by the
// circulant sampling path.
inline TimeGrid uniform_grid(double step, std::size_t m) {
  if (step <= 0.0 || m == 0)
    throw std::invalid_argument("uniform_grid: need step > 0 and m >= 1");
  std::vector<double> u(m);
  for (std::size_t i = 0; i < m; ++i)
    u[i] = step * static_cast<double>(i + 1);
  return TimeGrid::from_nodes(std::move(u));
}

}  // namespace critlim

#endif  // CRITLIM_GRID_HPP
