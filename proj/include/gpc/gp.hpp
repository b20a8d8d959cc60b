#ifndef GPC_GP_HPP
#define GPC_GP_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "gpc/errors.hpp"
#include "gpc/kernels.hpp"
#include "gpc/rng.hpp"

namespace gpc {

namespace detail {

// Cholesky with jitter escalation: start at 1e-12 * tr(K)/n, multiply by 10,
// at most 6 retries. Returns (L, applied jitter).
inline std::pair<Eigen::MatrixXd, double> cholesky_with_jitter(
    const Eigen::MatrixXd& K, double base_jitter = -1.0, int max_retries = 6) {
  const Eigen::Index n = K.rows();
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() == Eigen::Success)
    return {Eigen::MatrixXd(llt.matrixL()), 0.0};
  double jitter = base_jitter > 0.0
                      ? base_jitter
                      : 1e-12 * std::max(K.trace() / static_cast<double>(n),
                                         std::numeric_limits<double>::min());
  for (int r = 0; r < max_retries; ++r) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    llt.compute(Kj);
    if (llt.info() == Eigen::Success)
      return {Eigen::MatrixXd(llt.matrixL()), jitter};
    jitter *= 10.0;
  }
  return {Eigen::MatrixXd(), -1.0};
}

// Factor S with S S^T = C for sampling from N(mu, C). Tries Cholesky first;
// falls back to an eigendecomposition with negative eigenvalues (round-off)
// clipped to zero. Throws only if C has a substantially negative eigenvalue.
inline Eigen::MatrixXd sampling_factor(const Eigen::MatrixXd& C) {
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (llt.info() == Eigen::Success) return Eigen::MatrixXd(llt.matrixL());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  if (es.info() != Eigen::Success)
    throw DegeneratePosteriorError("eigendecomposition of posterior covariance failed");
  Eigen::VectorXd ev = es.eigenvalues();
  double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  // near-duplicate points (e.g. clustered fixed-point iterates) produce
  // round-off negatives well below the dominant eigenvalue; clip those and
  // reject only substantially indefinite matrices
  if (ev.minCoeff() < -(1e-6 * scale + 1e-10))
    throw DegeneratePosteriorError("posterior covariance is indefinite");
  Eigen::VectorXd root = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

inline std::string nearest_pair_message(const std::vector<Eigen::VectorXd>& X) {
  double best = std::numeric_limits<double>::infinity();
  int bi = -1, bj = -1;
  for (std::size_t i = 0; i < X.size(); ++i)
    for (std::size_t j = i + 1; j < X.size(); ++j) {
      double d = (X[i] - X[j]).norm();
      if (d < best) {
        best = d;
        bi = static_cast<int>(i);
        bj = static_cast<int>(j);
      }
    }
  std::ostringstream os;
  os << "Gram matrix not factorizable after jitter escalation";
  if (bi >= 0)
    os << "; nearest design points are #" << bi << " and #" << bj
       << " at distance " << best;
  return os.str();
}

}  // namespace detail

// Multi-output GP conditioned on noise-free or noisy observations.
// Immutable after fit(); safe to share across threads for posterior queries.
class GpModel {
 public:
  GpModel() = default;

  const LmcKernel& kernel() const { return kernel_; }
  const std::vector<Eigen::VectorXd>& design() const { return design_; }
  const Eigen::VectorXd& observations() const { return observations_; }
  const Eigen::VectorXd& prior_mean() const { return prior_mean_; }
  double nugget() const { return nugget_; }
  double applied_jitter() const { return jitter_; }
  int output_dim() const { return kernel_.output_dim; }
  int num_points() const { return static_cast<int>(design_.size()); }

  // Posterior mean at x (prior mean when the model has no data).
  Eigen::VectorXd mean(const Eigen::VectorXd& x) const {
    if (!x.allFinite()) throw DomainError("non-finite posterior query point");
    if (design_.empty()) return prior_mean_;
    Eigen::MatrixXd kx = cross_cov_row(kernel_, x, design_);
    return prior_mean_ + kx * alpha_;
  }

  double mean1(double x) const {
    Eigen::VectorXd v(1);
    v[0] = x;
    return mean(v)[0];
  }

  // Posterior cross-covariance kappa_bar(x, x'); D x D.
  Eigen::MatrixXd cov(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    if (!x.allFinite() || !y.allFinite())
      throw DomainError("non-finite posterior query point");
    Eigen::MatrixXd kxy = kernel_(x, y);
    if (design_.empty()) return kxy;
    Eigen::MatrixXd kx = cross_cov_row(kernel_, x, design_);
    Eigen::MatrixXd ky = cross_cov_row(kernel_, y, design_);
    Eigen::MatrixXd Vx = chol_.triangularView<Eigen::Lower>().solve(kx.transpose());
    Eigen::MatrixXd Vy = chol_.triangularView<Eigen::Lower>().solve(ky.transpose());
    return kxy - Vx.transpose() * Vy;
  }

  // Symmetrized posterior covariance at a single point.
  Eigen::MatrixXd var(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd C = cov(x, x);
    return 0.5 * (C + C.transpose());
  }

  // Stacked joint posterior (mean, covariance) over a list of points.
  // Mean has size M*D, covariance M*D x M*D with (m,m') blocks
  // kappa_bar(x_m, x_m').
  std::pair<Eigen::VectorXd, Eigen::MatrixXd> joint(
      const std::vector<Eigen::VectorXd>& points) const {
    const int M = static_cast<int>(points.size());
    const int D = output_dim();
    Eigen::VectorXd mu(M * D);
    Eigen::MatrixXd C = kernel_.gram(points);
    if (design_.empty()) {
      for (int m = 0; m < M; ++m) mu.segment(m * D, D) = prior_mean_;
    } else {
      const int nD = static_cast<int>(observations_.size());
      Eigen::MatrixXd Kxp(nD, M * D);
      for (int m = 0; m < M; ++m)
        Kxp.block(0, m * D, nD, D) =
            cross_cov_row(kernel_, points[m], design_).transpose();
      Eigen::MatrixXd V = chol_.triangularView<Eigen::Lower>().solve(Kxp);
      C -= V.transpose() * V;
      Eigen::VectorXd post = Kxp.transpose() * alpha_;
      for (int m = 0; m < M; ++m)
        mu.segment(m * D, D) = prior_mean_ + post.segment(m * D, D);
    }
    C = 0.5 * (C + C.transpose());
    return {std::move(mu), std::move(C)};
  }

  friend GpModel fit(LmcKernel kernel, std::vector<Eigen::VectorXd> X,
                     Eigen::VectorXd Z, double nugget, Eigen::VectorXd prior_mean);

 private:
  LmcKernel kernel_;
  std::vector<Eigen::VectorXd> design_;
  Eigen::VectorXd observations_;
  Eigen::VectorXd prior_mean_;
  double nugget_ = 0.0;
  double jitter_ = 0.0;
  Eigen::MatrixXd chol_;   // lower factor of K_XX + nugget I (+ jitter)
  Eigen::VectorXd alpha_;  // (K_XX + nugget I)^{-1} (Z - mu_X)
};

inline GpModel fit(LmcKernel kernel, std::vector<Eigen::VectorXd> X,
                   Eigen::VectorXd Z, double nugget = 0.0,
                   Eigen::VectorXd prior_mean = Eigen::VectorXd()) {
  kernel.validate();
  if (nugget < 0.0) throw ConfigError("nugget must be nonnegative");
  const int D = kernel.output_dim;
  if (prior_mean.size() == 0) prior_mean = Eigen::VectorXd::Zero(D);
  if (prior_mean.size() != D) throw ConfigError("prior mean dimension mismatch");
  GpModel m;
  m.kernel_ = std::move(kernel);
  m.prior_mean_ = std::move(prior_mean);
  m.nugget_ = nugget;
  if (X.empty()) {
    if (Z.size() != 0) throw ConfigError("observations given without design points");
    return m;  // pure prior
  }
  if (Z.size() != static_cast<Eigen::Index>(X.size()) * D)
    throw ConfigError("observation vector must have n*D entries");
  for (const auto& x : X)
    if (!x.allFinite()) throw DomainError("non-finite design point");
  m.design_ = std::move(X);
  m.observations_ = std::move(Z);
  Eigen::MatrixXd K = m.kernel_.gram(m.design_);
  K.diagonal().array() += nugget;
  auto [L, jit] = detail::cholesky_with_jitter(K);
  if (jit < 0.0) throw SingularDesignError(detail::nearest_pair_message(m.design_));
  m.chol_ = std::move(L);
  m.jitter_ = jit;
  Eigen::VectorXd centered = m.observations_;
  for (int i = 0; i < m.num_points(); ++i)
    centered.segment(i * D, D) -= m.prior_mean_;
  m.alpha_ = m.chol_.triangularView<Eigen::Lower>().solve(centered);
  m.alpha_ =
      m.chol_.transpose().triangularView<Eigen::Upper>().solve(m.alpha_);
  return m;
}

// Convenience for scalar 1-d models.
inline GpModel fit_scalar(const ScalarKernel& k, const std::vector<double>& x,
                          const std::vector<double>& z, double nugget = 0.0,
                          double prior_mean = 0.0) {
  std::vector<Eigen::VectorXd> X;
  X.reserve(x.size());
  for (double v : x) {
    Eigen::VectorXd p(1);
    p[0] = v;
    X.push_back(p);
  }
  Eigen::VectorXd Z = Eigen::Map<const Eigen::VectorXd>(z.data(), z.size());
  return fit(LmcKernel::single_output(k), std::move(X), Z, nugget,
             Eigen::VectorXd::Constant(1, prior_mean));
}

// Factorized joint posterior over a fixed point list; supports repeated draws
// (one Cholesky, many samples).
class JointPosterior {
 public:
  JointPosterior(const GpModel& model, std::vector<Eigen::VectorXd> points)
      : points_(std::move(points)), D_(model.output_dim()) {
    auto [mu, C] = model.joint(points_);
    mean_ = std::move(mu);
    cov_ = std::move(C);
    factor_ = detail::sampling_factor(cov_);
  }

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  int num_points() const { return static_cast<int>(points_.size()); }
  int output_dim() const { return D_; }

  // One joint draw, stacked (M*D).
  Eigen::VectorXd draw(Rng& rng) const {
    Eigen::VectorXd z(mean_.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.gaussian();
    return mean_ + factor_ * z;
  }

 private:
  std::vector<Eigen::VectorXd> points_;
  int D_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd factor_;
};

// One draw from the joint posterior at M points; row m is the D-vector at
// point m.
inline Eigen::MatrixXd joint_sample(const GpModel& model,
                                    const std::vector<Eigen::VectorXd>& points,
                                    Rng& rng) {
  if (points.empty()) throw ConfigError("joint_sample needs at least one point");
  JointPosterior jp(model, points);
  Eigen::VectorXd s = jp.draw(rng);
  const int D = model.output_dim();
  Eigen::MatrixXd out(points.size(), D);
  for (std::size_t m = 0; m < points.size(); ++m)
    out.row(m) = s.segment(m * D, D).transpose();
  return out;
}

// Sequential sampling state: the base posterior further conditioned on the
// values drawn so far along one replication's trajectory. Single-owner.
class TrajectoryState {
 public:
  explicit TrajectoryState(const GpModel& base, double duplicate_tol = 1e-12)
      : base_(&base), dup_tol_(duplicate_tol) {}

  const std::vector<Eigen::VectorXd>& history_points() const { return hist_x_; }
  const std::vector<Eigen::VectorXd>& history_values() const { return hist_z_; }
  int duplicate_hits() const { return duplicate_hits_; }

  // Draw f(x) | training data, trajectory history; append to history.
  Eigen::VectorXd sample(const Eigen::VectorXd& x, Rng& rng) {
    if (!x.allFinite()) throw DomainError("non-finite trajectory query point");
    const int D = base_->output_dim();
    // query within duplication distance of an earlier point: replay it
    for (std::size_t i = 0; i < hist_x_.size(); ++i) {
      if ((hist_x_[i] - x).norm() < dup_tol_) {
        ++duplicate_hits_;
        hist_x_.push_back(hist_x_[i]);
        hist_z_.push_back(hist_z_[i]);
        return hist_z_[i];
      }
    }
    const int m = static_cast<int>(hist_x_.size());
    std::vector<Eigen::VectorXd> pts = hist_x_;
    pts.push_back(x);
    auto [mu, C] = base_->joint(pts);
    Eigen::VectorXd cond_mean;
    Eigen::MatrixXd cond_cov;
    if (m == 0) {
      cond_mean = mu;
      cond_cov = C;
    } else {
      Eigen::MatrixXd A = C.topLeftCorner(m * D, m * D);
      Eigen::VectorXd zh(m * D);
      for (int i = 0; i < m; ++i) zh.segment(i * D, D) = hist_z_[i];
      Eigen::MatrixXd B = C.topRightCorner(m * D, D);
      // solve with a pseudo-inverse so exactly-reproduced history (zero
      // variance directions) stays consistent
      Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
      Eigen::MatrixXd AinvB;
      Eigen::VectorXd Ainvr;
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        AinvB = ldlt.solve(B);
        Ainvr = ldlt.solve(zh - mu.head(m * D));
      } else {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
        AinvB = cod.solve(B);
        Ainvr = cod.solve(zh - mu.head(m * D));
      }
      cond_mean = mu.tail(D) + B.transpose() * Ainvr;
      cond_cov = C.bottomRightCorner(D, D) - B.transpose() * AinvB;
      cond_cov = 0.5 * (cond_cov + cond_cov.transpose());
    }
    // Conditional variances below the double-precision round-off floor of
    // the conditioning solve are numerical noise (the true variance decays
    // polynomially in the distance to the history and is far smaller);
    // treat the value as deterministic there so the coupled iteration can
    // meet tight stopping tolerances.
    const double prior_scale =
        std::max(base_->kernel()(x, x).diagonal().maxCoeff(), 1e-300);
    Eigen::VectorXd value;
    if (cond_cov.diagonal().maxCoeff() < 1e-13 * prior_scale) {
      value = cond_mean;
    } else {
      Eigen::MatrixXd Lc = detail::sampling_factor(cond_cov);
      Eigen::VectorXd z(D);
      for (int i = 0; i < D; ++i) z[i] = rng.gaussian();
      value = cond_mean + Lc * z;
    }
    hist_x_.push_back(x);
    hist_z_.push_back(value);
    return value;
  }

 private:
  const GpModel* base_;
  double dup_tol_;
  std::vector<Eigen::VectorXd> hist_x_;
  std::vector<Eigen::VectorXd> hist_z_;
  int duplicate_hits_ = 0;
};

}  // namespace gpc

#endif
