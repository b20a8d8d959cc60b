#ifndef GPC_DESIGN_HPP
#define GPC_DESIGN_HPP

#include <Eigen/Dense>
#include <fstream>
#include <limits>
#include <vector>

#include "gpc/errors.hpp"
#include "gpc/rng.hpp"

namespace gpc {

struct Bounds {
  double lo = 0.0;
  double hi = 1.0;
};

struct Design {
  std::vector<Eigen::VectorXd> points;
  std::vector<Bounds> bounds;

  int dim() const { return static_cast<int>(bounds.size()); }
  int size() const { return static_cast<int>(points.size()); }
};

// Latin hypercube: one point per stratum and dimension, uniform jitter
// within each stratum.
inline Design lhs(int n, const std::vector<Bounds>& bounds, Rng& rng) {
  if (n < 1) throw ConfigError("lhs needs n >= 1");
  for (const auto& b : bounds)
    if (!(b.lo < b.hi)) throw ConfigError("lhs bounds need lo < hi");
  const int d = static_cast<int>(bounds.size());
  Design out;
  out.bounds = bounds;
  std::vector<std::vector<int>> perms(d);
  for (int k = 0; k < d; ++k) perms[k] = rng.permutation(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd p(d);
    for (int k = 0; k < d; ++k) {
      double u = (perms[k][i] + rng.uniform()) / n;
      p[k] = bounds[k].lo + (bounds[k].hi - bounds[k].lo) * u;
    }
    out.points.push_back(p);
  }
  return out;
}

inline Design lhs1d(int n, double lo, double hi, Rng& rng) {
  return lhs(n, {{lo, hi}}, rng);
}

inline int default_probe_resolution(int d) {
  if (d == 1) return 512;
  if (d <= 3) return 64;
  return 16;
}

namespace detail {

// Visit every node of the tensor probe grid (res points per dimension,
// endpoints included).
template <typename F>
void for_each_probe(const std::vector<Bounds>& bounds, int res, F&& f) {
  const int d = static_cast<int>(bounds.size());
  std::vector<int> idx(d, 0);
  Eigen::VectorXd p(d);
  while (true) {
    for (int k = 0; k < d; ++k) {
      double t = res > 1 ? static_cast<double>(idx[k]) / (res - 1) : 0.5;
      p[k] = bounds[k].lo + (bounds[k].hi - bounds[k].lo) * t;
    }
    f(p);
    int k = 0;
    while (k < d && ++idx[k] == res) idx[k++] = 0;
    if (k == d) break;
  }
}

inline double min_dist_to(const std::vector<Eigen::VectorXd>& X,
                          const Eigen::VectorXd& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : X) best = std::min(best, (p - x).norm());
  return best;
}

}  // namespace detail

// Fill distance h = sup over the domain of the distance to the nearest design
// point, approximated on a probe grid. Over-approximates the true value by at
// most half the probe spacing.
inline double fill_distance(const Design& X, int probe_resolution = -1) {
  if (X.points.empty()) throw DomainError("fill distance of an empty design");
  if (probe_resolution < 0) probe_resolution = default_probe_resolution(X.dim());
  if (probe_resolution < 10)
    throw ConfigError("probe resolution must be at least 10 per dimension");
  double h = 0.0;
  detail::for_each_probe(X.bounds, probe_resolution, [&](const Eigen::VectorXd& p) {
    h = std::max(h, detail::min_dist_to(X.points, p));
  });
  return h;
}

// Local fill distance: probe restricted to the closed rho-ball around x
// (intersected with the domain box).
inline double local_fill_distance(const Design& X, const Eigen::VectorXd& x,
                                  double rho, int probe_resolution = -1) {
  if (X.points.empty()) throw DomainError("fill distance of an empty design");
  if (!(rho > 0.0)) throw ConfigError("local fill distance needs rho > 0");
  if (probe_resolution < 0) probe_resolution = default_probe_resolution(X.dim());
  if (probe_resolution < 10)
    throw ConfigError("probe resolution must be at least 10 per dimension");
  std::vector<Bounds> box(X.bounds.size());
  for (std::size_t k = 0; k < box.size(); ++k) {
    box[k].lo = std::max(X.bounds[k].lo, x[static_cast<int>(k)] - rho);
    box[k].hi = std::min(X.bounds[k].hi, x[static_cast<int>(k)] + rho);
    if (!(box[k].lo < box[k].hi)) {
      box[k].lo = x[static_cast<int>(k)];
      box[k].hi = x[static_cast<int>(k)] + 1e-300;
    }
  }
  double h = 0.0;
  detail::for_each_probe(box, probe_resolution, [&](const Eigen::VectorXd& p) {
    if ((p - x).norm() <= rho)
      h = std::max(h, detail::min_dist_to(X.points, p));
  });
  return h;
}

// CSV export: header records the bounds, then one point per row.
inline void write_design_csv(const Design& X, std::ostream& os) {
  os << "# bounds";
  for (const auto& b : X.bounds) os << " [" << b.lo << "," << b.hi << "]";
  os << "\n";
  for (int k = 0; k < X.dim(); ++k) os << (k ? "," : "") << "x" << k;
  os << "\n";
  os.precision(17);
  for (const auto& p : X.points) {
    for (int k = 0; k < p.size(); ++k) os << (k ? "," : "") << p[k];
    os << "\n";
  }
}

}  // namespace gpc

#endif
