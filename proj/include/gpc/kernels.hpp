#ifndef GPC_KERNELS_HPP
#define GPC_KERNELS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "gpc/errors.hpp"

namespace gpc {

enum class KernelFamily { Matern52, Matern32, SquaredExponential };

inline std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::Matern52: return "matern52";
    case KernelFamily::Matern32: return "matern32";
    case KernelFamily::SquaredExponential: return "squared_exponential";
  }
  return "?";
}

inline KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "matern52") return KernelFamily::Matern52;
  if (s == "matern32") return KernelFamily::Matern32;
  if (s == "squared_exponential") return KernelFamily::SquaredExponential;
  throw ConfigError("unknown kernel family: " + s);
}

// Stationary scalar covariance. Lengthscale may be a single value (isotropic)
// or one entry per input dimension.
struct ScalarKernel {
  KernelFamily family = KernelFamily::Matern52;
  Eigen::VectorXd lengthscale = Eigen::VectorXd::Ones(1);
  double variance = 1.0;

  static ScalarKernel make(KernelFamily fam, double ell, double var) {
    ScalarKernel k;
    k.family = fam;
    k.lengthscale = Eigen::VectorXd::Constant(1, ell);
    k.variance = var;
    k.validate();
    return k;
  }
  static ScalarKernel matern52(double ell, double var = 1.0) {
    return make(KernelFamily::Matern52, ell, var);
  }
  static ScalarKernel matern32(double ell, double var = 1.0) {
    return make(KernelFamily::Matern32, ell, var);
  }
  static ScalarKernel squared_exponential(double ell, double var = 1.0) {
    return make(KernelFamily::SquaredExponential, ell, var);
  }

  void validate() const {
    if (lengthscale.size() < 1 || (lengthscale.array() <= 0.0).any())
      throw ConfigError("kernel lengthscale must be positive");
    if (!(variance > 0.0)) throw ConfigError("kernel variance must be positive");
  }

  // Scaled Euclidean distance ||(x - x') / ell||.
  double scaled_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    if (x.size() != y.size()) throw ConfigError("kernel input dimension mismatch");
    if (!x.allFinite() || !y.allFinite())
      throw DomainError("non-finite kernel input");
    double s2 = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      double ell = lengthscale.size() == 1 ? lengthscale[0]
                                           : lengthscale[i % lengthscale.size()];
      double d = (x[i] - y[i]) / ell;
      s2 += d * d;
    }
    return std::sqrt(s2);
  }

  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    double u = scaled_distance(x, y);
    switch (family) {
      case KernelFamily::Matern52: {
        double a = std::sqrt(5.0) * u;
        return variance * (1.0 + a + 5.0 * u * u / 3.0) * std::exp(-a);
      }
      case KernelFamily::Matern32: {
        double a = std::sqrt(3.0) * u;
        return variance * (1.0 + a) * std::exp(-a);
      }
      case KernelFamily::SquaredExponential:
        return variance * std::exp(-0.5 * u * u);
    }
    return 0.0;
  }

  double operator()(double x, double y) const {
    Eigen::VectorXd a(1), b(1);
    a[0] = x;
    b[0] = y;
    return (*this)(a, b);
  }

  // Sobolev smoothness s = nu + d/2 of the induced RKHS (used by the
  // fill-distance bounds; infinite-smoothness kernels have no finite s).
  double sobolev_smoothness(int input_dim) const {
    switch (family) {
      case KernelFamily::Matern52: return 2.5 + 0.5 * input_dim;
      case KernelFamily::Matern32: return 1.5 + 0.5 * input_dim;
      case KernelFamily::SquaredExponential:
        throw ConfigError("squared-exponential kernel has no finite Sobolev order");
    }
    return 0.0;
  }
};

// Matrix-valued kernel: sum over latent scalar kernels weighted by PSD
// coregionalization matrices. kappa(x,x') = sum_q B_q * kappa_q(x,x').
struct LmcKernel {
  std::vector<ScalarKernel> latent;
  std::vector<Eigen::MatrixXd> coreg;
  int output_dim = 1;

  static LmcKernel single_output(const ScalarKernel& k) {
    LmcKernel K;
    K.latent = {k};
    K.coreg = {Eigen::MatrixXd::Ones(1, 1)};
    K.output_dim = 1;
    K.validate();
    return K;
  }

  // Independent outputs: Q = D latent kernels, B_q = e_q e_q^T.
  static LmcKernel independent(const std::vector<ScalarKernel>& ks) {
    LmcKernel K;
    K.output_dim = static_cast<int>(ks.size());
    K.latent = ks;
    for (int q = 0; q < K.output_dim; ++q) {
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(K.output_dim, K.output_dim);
      B(q, q) = 1.0;
      K.coreg.push_back(B);
    }
    K.validate();
    return K;
  }

  int num_latent() const { return static_cast<int>(latent.size()); }

  void validate() const {
    if (latent.empty() || latent.size() != coreg.size())
      throw ConfigError("LMC kernel needs matching latent kernel / coregionalization lists");
    for (const auto& k : latent) k.validate();
    for (const auto& B : coreg) {
      if (B.rows() != output_dim || B.cols() != output_dim)
        throw ConfigError("coregionalization matrix size mismatch");
      if ((B - B.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw ConfigError("coregionalization matrix not symmetric");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
      if (es.eigenvalues().minCoeff() < -1e-10)
        throw ConfigError("coregionalization matrix not PSD");
    }
  }

  Eigen::MatrixXd operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(output_dim, output_dim);
    for (std::size_t q = 0; q < latent.size(); ++q) out += coreg[q] * latent[q](x, y);
    return out;
  }

  // Block Gram matrix, point-major: block (i,j) is kappa(x_i, x_j).
  Eigen::MatrixXd gram(const std::vector<Eigen::VectorXd>& X) const {
    const int n = static_cast<int>(X.size());
    const int D = output_dim;
    Eigen::MatrixXd K(n * D, n * D);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        Eigen::MatrixXd blk = (*this)(X[i], X[j]);
        K.block(i * D, j * D, D, D) = blk;
        if (j != i) K.block(j * D, i * D, D, D) = blk.transpose();
      }
    }
    return K;
  }

  // Sum of coregionalization matrices (appears in the variance bounds).
  Eigen::MatrixXd coreg_sum() const {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(output_dim, output_dim);
    for (const auto& B : coreg) S += B;
    return S;
  }
};

// Cross-covariance block rows: [kappa(x, x_1) ... kappa(x, x_n)], D x nD.
inline Eigen::MatrixXd cross_cov_row(const LmcKernel& K, const Eigen::VectorXd& x,
                                     const std::vector<Eigen::VectorXd>& X) {
  const int n = static_cast<int>(X.size());
  const int D = K.output_dim;
  Eigen::MatrixXd out(D, n * D);
  for (int j = 0; j < n; ++j) out.block(0, j * D, D, D) = K(x, X[j]);
  return out;
}

}  // namespace gpc

#endif
