#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stablebranch {

class QuadratureError : public std::runtime_error {
 public:
  explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre rule with n points. Rules are computed once and shared.
const GaussRule& gauss_legendre(std::size_t n);

// Composite Gauss-Legendre over [a, b] split into `panels` equal panels.
template <class F>
double integrate_gl(F&& f, double a, double b, std::size_t panels, std::size_t order = 16) {
  const GaussRule& rule = gauss_legendre(order);
  const double h = (b - a) / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + h * static_cast<double>(p);
    const double mid = lo + 0.5 * h;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    total += 0.5 * h * acc;
  }
  return total;
}

/// A one-dimensional node/weight list, used to build tensor grids and
/// precomputed spectral sums.
struct NodeSet {
  std::vector<double> x;
  std::vector<double> w;

  void append_gl(double a, double b, std::size_t panels, std::size_t order);
  // Geometrically graded panels on (0, b]: [b 2^-levels, ..., b/2, b], plus [0, b 2^-levels].
  void append_graded(double b, int levels, std::size_t order);
  std::size_t size() const { return x.size(); }
};

// Composite Simpson weights on n+1 equally spaced points (n rounded up to even).
NodeSet simpson_nodes(double a, double b, std::size_t intervals);

// Visits every point of the tensor product of `axes`, passing the point and
// its product weight.
template <class Visit>
void for_each_tensor_node(std::span<const NodeSet> axes, Visit&& visit) {
  const std::size_t d = axes.size();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> point(d);
  for (const auto& a : axes)
    if (a.size() == 0) return;
  while (true) {
    double w = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      point[k] = axes[k].x[idx[k]];
      w *= axes[k].w[idx[k]];
    }
    visit(std::span<const double>(point), w);
    std::size_t k = 0;
    while (k < d && ++idx[k] == axes[k].size()) idx[k++] = 0;
    if (k == d) break;
  }
}

}  // namespace stablebranch
