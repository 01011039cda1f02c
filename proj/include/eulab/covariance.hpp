#pragma once

// Stationary covariance models and the derived second-order structure of the
// field vector (gradient X, value X, Hessian X): spectral-moment blocks, the
// whitened cross-correlation matrix at a lag, and the regularity report used
// to qualify a model before any experiment runs.

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "eulab/errors.hpp"

namespace eulab {

inline constexpr int kMaxDerivativeOrder = 4;

// Number of components of (grad X, X, Hess X) in dimension n.
inline int field_vector_size(int n) { return 1 + n + n * (n + 1) / 2; }

// Position of Hessian entry (i,j), i <= j, within the upper-triangle listing.
inline int hessian_pair_index(int i, int j, int n) {
  // row i starts after i*(2n-i+1)/2 earlier pairs
  return i * (2 * n - i + 1) / 2 + (j - i);
}

class CovarianceModel {
 public:
  virtual ~CovarianceModel() = default;

  virtual int dim() const = 0;
  // Largest total derivative order with a closed form at every lag.
  virtual int max_derivative_order() const = 0;
  virtual bool isotropic() const = 0;
  // Characteristic correlation length; used for default truncation radii.
  virtual double correlation_scale() const = 0;
  virtual std::string describe() const = 0;

  // Partial derivative of rho with per-axis multiplicities `order` at lag t.
  // |order| above the supported order throws UnsupportedOrderError.
  virtual double derivative(std::span<const int> order, std::span<const double> t) const = 0;

  double operator()(std::span<const double> t) const {
    const std::vector<int> zero(static_cast<std::size_t>(dim()), 0);
    return derivative(zero, t);
  }
};

// Squared-exponential model rho(t) = exp(-|t|^2 / (2 scale^2)); factorizes per
// axis, so every mixed partial is a product of 1-D closed forms.
class GaussianCovariance final : public CovarianceModel {
 public:
  GaussianCovariance(int dim, double scale);

  int dim() const override { return dim_; }
  int max_derivative_order() const override { return kMaxDerivativeOrder; }
  bool isotropic() const override { return true; }
  double correlation_scale() const override { return scale_; }
  std::string describe() const override;
  double derivative(std::span<const int> order, std::span<const double> t) const override;

  double scale() const { return scale_; }

 private:
  int dim_;
  double scale_;
};

// Evaluate a partial derivative of rho after validating the order request.
double eval_rho(const CovarianceModel& model, std::span<const double> t,
                std::span<const int> order);

// psi(t): sup of |partial^alpha rho(t)| over all distinct multi-orders with
// 0 <= |alpha| <= 4.
double eval_psi(const CovarianceModel& model, std::span<const double> t);

struct LambdaBlocks {
  Eigen::MatrixXd lambda1;      // Cov(grad X), n x n
  Eigen::MatrixXd lambda2;      // Cov((X, Hess X)), value component first
  Eigen::MatrixXd sqrt1, sqrt2;
  Eigen::MatrixXd inv_sqrt1, inv_sqrt2;
  double lambda2_moment = 0.0;  // second spectral moment -rho''(0) along an axis
  double min_eigenvalue = 0.0;  // smallest eigenvalue across both blocks
};

// Assemble the joint covariance blocks of (grad X) and (X, Hess X) at lag 0
// and their symmetric square roots.  Eigenvalues below 1e-12 refuse with
// DegeneracyError naming the offending block.
LambdaBlocks lambda_blocks(const CovarianceModel& model);

// Whitened cross-correlation of the field vector between lag 0 and lag t:
// K(t) = Lambda^{-1/2} E[vec(0) vec(t)^T] Lambda^{-T/2}, component order
// (grad X, X, Hess X).  K(0) is the identity.
Eigen::MatrixXd corr_matrix_K(const CovarianceModel& model, std::span<const double> t,
                              const LambdaBlocks& blocks);

struct TamenessCondition {
  std::string name;
  std::string status;    // "pass", "fail", or "assumed"
  std::string evidence;
  double value = 0.0;
};

struct TamenessReport {
  std::vector<TamenessCondition> conditions;
  bool all_pass_or_assumed() const;
  std::string to_json() const;
};

// Regularity checks backing the experiments: nondegenerate joint covariance,
// fourth-order differentiability with a log-modulus fit near 0, integrable
// psi with decaying tail, and the (unverifiable) moment condition on the
// number of critical points, which is always reported as assumed.
TamenessReport tameness_report(const CovarianceModel& model);

}  // namespace eulab
