#ifndef GPC_STATS_HPP
#define GPC_STATS_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "gpc/errors.hpp"

namespace gpc {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int n_a = 0;
  int n_b = 0;
  double df = 0.0;  // Welch only
};

namespace detail {

// Regularized incomplete beta I_x(a,b) via Lentz's continued fraction.
inline double betacf(double a, double b, double x) {
  const double eps = 3e-16, fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

inline double inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lnbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  const double front =
      std::exp(a * std::log(x) + b * std::log(1.0 - x) - lnbeta);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

// Two-sided p-value P(|T| > |t|) for Student-t with df degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw DomainError("student t needs positive df");
  const double x = df / (df + t * t);
  return inc_beta(0.5 * df, 0.5, x);
}

// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1}
// exp(-2 k^2 lambda^2), truncated when terms drop below 1e-10.
inline double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-10) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_var(const std::vector<double>& v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / (static_cast<double>(v.size()) - 1.0);
}

}  // namespace detail

// Welch two-sample t-test (unequal variances), two-sided p-value via the
// Welch-Satterthwaite degrees of freedom. A tiny variance floor keeps the
// statistic finite when one sample is constant but the means differ.
inline TestResult welch_t(const std::vector<double>& a,
                          const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw InsufficientDataError("welch t-test needs >= 2 samples per group");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = detail::sample_mean(a), mb = detail::sample_mean(b);
  double va = detail::sample_var(a, ma), vb = detail::sample_var(b, mb);
  if (va == 0.0 && vb == 0.0 && ma == mb)
    throw DomainError("welch t-test degenerate: both samples constant and equal");
  const double floor_scale =
      std::max({std::abs(ma), std::abs(mb), 1.0}) * 1e-30;
  va = std::max(va, floor_scale);
  vb = std::max(vb, floor_scale);
  const double se2 = va / na + vb / nb;
  TestResult r;
  r.n_a = static_cast<int>(a.size());
  r.n_b = static_cast<int>(b.size());
  r.statistic = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 /
         (va * va / (na * na * (na - 1.0)) + vb * vb / (nb * nb * (nb - 1.0)));
  r.p_value = detail::student_t_two_sided_p(r.statistic, r.df);
  return r;
}

// Two-sample Kolmogorov-Smirnov test; D over the pooled sorted values with
// both ECDFs stepped at ties, asymptotic p with effective size
// n_a n_b / (n_a + n_b).
inline TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw InsufficientDataError("ks test needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  d = std::max(d, std::abs(1.0 - j / nb));
  d = std::max(d, std::abs(i / na - 1.0));
  TestResult r;
  r.n_a = static_cast<int>(a.size());
  r.n_b = static_cast<int>(b.size());
  r.statistic = d;
  const double ne = na * nb / (na + nb);
  r.p_value = detail::kolmogorov_q(std::sqrt(ne) * d);
  return r;
}

}  // namespace gpc

#endif
