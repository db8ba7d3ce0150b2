#ifndef RDABC_GMM_HPP_
#define RDABC_GMM_HPP_

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rdabc/rng.hpp"

namespace rdabc {

// One weighted multivariate normal.  The covariance is validated symmetric
// positive definite on construction; the lower Cholesky factor and
// log-determinant are cached alongside it.
class GaussianComponent {
 public:
  GaussianComponent(double weight, Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  double weight() const { return weight_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const Eigen::MatrixXd& chol_lower() const { return chol_lower_; }
  double log_det() const { return log_det_; }
  int dimension() const { return static_cast<int>(mean_.size()); }

  double log_density(const Eigen::VectorXd& x) const;

 private:
  double weight_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd chol_lower_;
  double log_det_;
};

// Immutable mixture of GaussianComponent sharing one dimension.  Weights must
// sum to 1 within 1e-12.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<GaussianComponent> components);

  int dimension() const { return dimension_; }
  int component_count() const { return static_cast<int>(components_.size()); }
  const std::vector<GaussianComponent>& components() const { return components_; }

  double log_density(const Eigen::VectorXd& x) const;

  // i.i.d. draws, one row per draw.  Deterministic for a fixed rng state.
  Eigen::MatrixXd sample(int n, Rng& rng) const;

 private:
  std::vector<GaussianComponent> components_;
  int dimension_;
};

struct GmmFitConfig {
  int max_iter = 300;
  double tol = 1e-7;    // relative log-likelihood improvement
  double ridge = -1.0;  // < 0 selects 1e-6 x mean diagonal variance of the data
  int restarts = 5;
  std::uint64_t seed = 0;
};

struct GmmFitReport {
  double loglik = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  int restart_index = -1;
  double ridge_used = 0.0;
  std::vector<double> loglik_trajectory;  // observed-data log-likelihood per iteration
  std::vector<std::string> warnings;      // pruning events etc.
};

// EM fit with k-means++ initialization; best log-likelihood across restarts
// wins.  Every returned covariance includes ridge*I.
GaussianMixture fit_gmm(const Eigen::MatrixXd& data, int n_components, const GmmFitConfig& config,
                        GmmFitReport* report = nullptr);

struct GmmScoreRow {
  int n_components = 0;
  double loglik = 0.0;
  double bic = 0.0;
  bool failed = false;
  std::string error;
};

struct GmmSelection {
  GaussianMixture model;
  GmmFitReport report;
  std::vector<GmmScoreRow> table;
  int selected_components = 0;
};

// Fits every candidate and returns the BIC-minimizing model plus the full
// score table; callers may override using the table.
GmmSelection select_gmm(const Eigen::MatrixXd& data, const std::vector<int>& candidates,
                        const GmmFitConfig& config);

double gmm_log_density(const GaussianMixture& model, const Eigen::VectorXd& x);

Eigen::MatrixXd gmm_sample(const GaussianMixture& model, int n, Rng& rng);

// Marginal mixture over the given coordinate subset (order preserved).
GaussianMixture gmm_marginal(const GaussianMixture& model, const std::vector<int>& indices);

// Exact conditional mixture over the complement of b_indices given those
// coordinates equal b.  Component moments via Schur complements; weights
// reweighted by each component's marginal density at b.
GaussianMixture gmm_condition(const GaussianMixture& model, const std::vector<int>& b_indices,
                              const Eigen::VectorXd& b);

// Conditioning on a fixed coordinate block, precomputed once and reused for
// many values of b (the conditional covariances do not depend on b).
class GmmConditioner {
 public:
  GmmConditioner(const GaussianMixture& model, std::vector<int> b_indices);

  int a_dimension() const { return static_cast<int>(a_indices_.size()); }
  int b_dimension() const { return static_cast<int>(b_indices_.size()); }

  GaussianMixture condition(const Eigen::VectorXd& b) const;
  double conditional_log_density(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  double marginal_log_density(const Eigen::VectorXd& b) const;

 private:
  struct Part {
    double log_weight;
    Eigen::VectorXd mean_a;
    Eigen::VectorXd mean_b;
    Eigen::MatrixXd chol_bb;
    double log_det_bb;
    Eigen::MatrixXd gain;           // Sigma_AB Sigma_BB^{-1}
    Eigen::MatrixXd cond_cov;       // Sigma_AA - gain Sigma_BA
    Eigen::MatrixXd cond_chol;
    double cond_log_det;
  };

  void component_log_weights(const Eigen::VectorXd& b, Eigen::VectorXd* out) const;

  std::vector<int> b_indices_;
  std::vector<int> a_indices_;
  std::vector<Part> parts_;
};

}  // namespace rdabc

#endif  // RDABC_GMM_HPP_
