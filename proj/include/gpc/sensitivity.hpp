#ifndef GPC_SENSITIVITY_HPP
#define GPC_SENSITIVITY_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gpc/errors.hpp"
#include "gpc/rng.hpp"

namespace gpc {

namespace detail {

// Acklam's rational approximation of the standard normal inverse CDF,
// accurate to ~1e-9 over (0,1).
inline double inv_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("inverse normal CDF needs p in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > phigh) {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

struct Marginal {
  enum class Kind { Normal, Uniform, Fixed } kind = Kind::Uniform;
  double p1 = 0.0;  // mean / lower / fixed value
  double p2 = 1.0;  // stddev / upper / unused

  static Marginal normal(double mean, double stddev) {
    if (!(stddev > 0.0)) throw ConfigError("normal marginal needs stddev > 0");
    return {Kind::Normal, mean, stddev};
  }
  static Marginal uniform(double lo, double hi) {
    if (!(lo < hi)) throw ConfigError("uniform marginal needs lo < hi");
    return {Kind::Uniform, lo, hi};
  }
  static Marginal fixed(double v) { return {Kind::Fixed, v, 0.0}; }

  // Map a (0,1) uniform to the marginal by inverse CDF.
  double transform(double u) const {
    switch (kind) {
      case Kind::Normal: return p1 + p2 * detail::inv_normal_cdf(u);
      case Kind::Uniform: return p1 + (p2 - p1) * u;
      case Kind::Fixed: return p1;
    }
    return p1;
  }
};

// A named factor; vector-valued factors count as one Saltelli group and are
// swapped jointly. Fixed components are constants, not sampled, and do not
// count as factors.
struct Factor {
  std::string name;
  std::vector<Marginal> components;

  bool is_fixed() const {
    for (const auto& m : components)
      if (m.kind != Marginal::Kind::Fixed) return false;
    return true;
  }
};

struct InputSpec {
  std::vector<Factor> factors;

  int total_dim() const {
    int d = 0;
    for (const auto& f : factors) d += static_cast<int>(f.components.size());
    return d;
  }
  // Number of Saltelli factors (fixed inputs excluded).
  int num_factors() const {
    int n = 0;
    for (const auto& f : factors)
      if (!f.is_fixed()) ++n;
    return n;
  }
};

struct SaltelliPlan {
  Eigen::MatrixXd A, B;                // n_s x dim
  std::vector<Eigen::MatrixXd> AB;     // one per active factor
  std::vector<int> factor_index;       // position in spec.factors per AB block
  int n_s = 0;

  int total_evaluations() const {
    return n_s * (2 + static_cast<int>(AB.size()));
  }
};

// Build the Saltelli design: two independent stratified (Latin hypercube)
// base samples A and B, plus per active factor the matrix AB_i equal to A
// with that factor's columns (all components jointly) taken from B.
inline SaltelliPlan saltelli_matrices(const InputSpec& spec, int n_s, Rng& rng) {
  if (n_s < 2) throw ConfigError("saltelli sampling needs n_s >= 2");
  if (spec.factors.empty()) throw ConfigError("input spec has no factors");
  const int dim = spec.total_dim();
  SaltelliPlan plan;
  plan.n_s = n_s;

  auto base_sample = [&](Eigen::MatrixXd& M) {
    M.resize(n_s, dim);
    int col = 0;
    for (const auto& f : spec.factors)
      for (const auto& m : f.components) {
        if (m.kind == Marginal::Kind::Fixed) {
          M.col(col).setConstant(m.p1);
        } else {
          std::vector<int> perm = rng.permutation(n_s);
          for (int i = 0; i < n_s; ++i) {
            double u = (perm[i] + rng.uniform()) / n_s;
            M(i, col) = m.transform(u);
          }
        }
        ++col;
      }
  };
  base_sample(plan.A);
  base_sample(plan.B);

  int col = 0;
  for (std::size_t f = 0; f < spec.factors.size(); ++f) {
    const int w = static_cast<int>(spec.factors[f].components.size());
    if (!spec.factors[f].is_fixed()) {
      Eigen::MatrixXd M = plan.A;
      M.middleCols(col, w) = plan.B.middleCols(col, w);
      plan.AB.push_back(std::move(M));
      plan.factor_index.push_back(static_cast<int>(f));
    }
    col += w;
  }
  return plan;
}

struct SobolResult {
  std::vector<std::string> factor_names;
  // [factor][output coordinate]
  std::vector<Eigen::VectorXd> first_order_raw;
  std::vector<Eigen::VectorXd> first_order;  // clipped to [0,1]
  std::vector<Eigen::VectorXd> total_raw;
  std::vector<Eigen::VectorXd> total;
  Eigen::VectorXd output_variance;
  std::vector<bool> degenerate;  // per output coordinate: variance == 0
  int n_s = 0;
  int total_evaluations = 0;
};

// Index estimators from precomputed model outputs (rows align with plan rows):
// S_i  = mean(f(B) .* (f(AB_i) - f(A))) / V
// S_Ti = (1/2) mean((f(A) - f(AB_i))^2) / V
inline SobolResult sobol_indices(const InputSpec& spec, const SaltelliPlan& plan,
                                 const Eigen::MatrixXd& fA,
                                 const Eigen::MatrixXd& fB,
                                 const std::vector<Eigen::MatrixXd>& fAB) {
  if (fA.rows() != plan.n_s || fB.rows() != plan.n_s)
    throw ConfigError("sobol outputs row count mismatch");
  if (fAB.size() != plan.AB.size())
    throw ConfigError("sobol outputs need one block per factor");
  if (!fA.allFinite() || !fB.allFinite())
    throw DomainError("non-finite model outputs in sobol estimation");
  const int D = static_cast<int>(fA.cols());
  const int n = plan.n_s;
  SobolResult r;
  r.n_s = n;
  r.total_evaluations = plan.total_evaluations();

  // pooled variance over the A and B samples
  Eigen::MatrixXd pooled(2 * n, D);
  pooled << fA, fB;
  Eigen::VectorXd mean = pooled.colwise().mean();
  r.output_variance =
      (pooled.rowwise() - mean.transpose()).array().square().colwise().sum() /
      (2.0 * n - 1.0);
  r.degenerate.resize(D);
  for (int k = 0; k < D; ++k) r.degenerate[k] = !(r.output_variance[k] > 0.0);

  for (std::size_t i = 0; i < fAB.size(); ++i) {
    if (!fAB[i].allFinite())
      throw DomainError("non-finite model outputs in sobol estimation");
    r.factor_names.push_back(spec.factors[plan.factor_index[i]].name);
    Eigen::VectorXd Si(D), STi(D);
    for (int k = 0; k < D; ++k) {
      if (r.degenerate[k]) {
        Si[k] = std::numeric_limits<double>::quiet_NaN();
        STi[k] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const double V = r.output_variance[k];
      Si[k] = (fB.col(k).array() * (fAB[i].col(k) - fA.col(k)).array()).mean() / V;
      STi[k] = 0.5 * (fA.col(k) - fAB[i].col(k)).array().square().mean() / V;
    }
    r.first_order_raw.push_back(Si);
    r.total_raw.push_back(STi);
    r.first_order.push_back(Si.cwiseMax(0.0).cwiseMin(1.0));
    r.total.push_back(STi.cwiseMax(0.0).cwiseMin(1.0));
  }
  return r;
}

// Convenience: evaluate a model over the whole plan and estimate indices.
inline SobolResult sobol_indices(
    const InputSpec& spec, const SaltelliPlan& plan,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& model,
    int output_dim) {
  auto eval_block = [&](const Eigen::MatrixXd& M) {
    Eigen::MatrixXd out(M.rows(), output_dim);
    for (int i = 0; i < M.rows(); ++i)
      out.row(i) = model(M.row(i).transpose()).transpose();
    return out;
  };
  std::vector<Eigen::MatrixXd> fAB;
  for (const auto& M : plan.AB) fAB.push_back(eval_block(M));
  return sobol_indices(spec, plan, eval_block(plan.A), eval_block(plan.B), fAB);
}

struct GroupShares {
  std::vector<std::string> labels;
  std::vector<double> raw;         // sums of member first-order indices
  std::vector<double> normalized;  // raw scaled to sum 1 (clipped indices)
};

// Group shares for one output coordinate: sum clipped first-order indices of
// the members, then normalize for display. `grouping` must partition the
// factor set.
inline GroupShares aggregated_indices(
    const SobolResult& r, int output_coord,
    const std::vector<std::pair<std::string, std::vector<std::string>>>& grouping) {
  std::vector<bool> used(r.factor_names.size(), false);
  GroupShares g;
  double total = 0.0;
  for (const auto& [label, members] : grouping) {
    double share = 0.0;
    for (const auto& m : members) {
      bool found = false;
      for (std::size_t i = 0; i < r.factor_names.size(); ++i) {
        if (r.factor_names[i] != m) continue;
        if (used[i]) throw ConfigError("grouping repeats factor " + m);
        used[i] = true;
        found = true;
        share += r.first_order[i][output_coord];
      }
      if (!found) throw ConfigError("grouping names unknown factor " + m);
    }
    g.labels.push_back(label);
    g.raw.push_back(share);
    total += share;
  }
  for (std::size_t i = 0; i < used.size(); ++i)
    if (!used[i])
      throw ConfigError("grouping omits factor " + r.factor_names[i]);
  for (double s : g.raw) g.normalized.push_back(total > 0.0 ? s / total : 0.0);
  return g;
}

inline void write_group_shares_csv(const GroupShares& g, std::ostream& os) {
  os << "label,raw,share\n";
  os.precision(17);
  for (std::size_t i = 0; i < g.labels.size(); ++i)
    os << g.labels[i] << "," << g.raw[i] << "," << g.normalized[i] << "\n";
}

}  // namespace gpc

#endif
