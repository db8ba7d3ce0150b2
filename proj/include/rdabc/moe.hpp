#ifndef RDABC_MOE_HPP_
#define RDABC_MOE_HPP_

#include <atomic>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rdabc {

// One expert of a mixture-of-experts regression for a scalar summary given
// the parameter vector.  Coefficients live in standardized covariate space
// (see MoEModel::standardization_*).  Expert 1 carries zero gate parameters
// for identifiability.
struct ExpertComponent {
  double gate_intercept = 0.0;
  Eigen::VectorXd gate_coef;
  double mean_intercept = 0.0;
  Eigen::VectorXd mean_coef;
  double logvar_intercept = 0.0;
  Eigen::VectorXd logvar_coef;
};

struct MoeFitReport {
  double loglik = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  int restart_index = -1;
  bool gate_fallback_used = false;
  bool variance_floored = false;
  std::vector<double> loglik_trajectory;
};

// Per-summary conditional density f(s | theta): softmax gating over normal
// experts whose means and log-variances are linear in the standardized theta.
// Immutable after construction; evaluation is safe from many threads.  The
// clamp counters are diagnostics, not state.
class MoEModel {
 public:
  MoEModel(int summary_index, Eigen::VectorXd standardization_mean, Eigen::VectorXd standardization_sd,
           std::vector<ExpertComponent> experts, MoeFitReport fit_report = {});

  int summary_index() const { return summary_index_; }
  int theta_dim() const { return static_cast<int>(standardization_mean_.size()); }
  int expert_count() const { return static_cast<int>(experts_.size()); }
  const std::vector<ExpertComponent>& experts() const { return experts_; }
  const Eigen::VectorXd& standardization_mean() const { return standardization_mean_; }
  const Eigen::VectorXd& standardization_sd() const { return standardization_sd_; }
  const MoeFitReport& fit_report() const { return fit_report_; }

  // Softmax gating weights at theta; positive, summing to 1.
  Eigen::VectorXd gate_weights(const Eigen::VectorXd& theta) const;

  double density(double s, const Eigen::VectorXd& theta) const;
  double log_density(double s, const Eigen::VectorXd& theta) const;

  // Mixture CDF: sum_l w_l(theta) Phi((s - mu_l) / sigma_l).
  double cdf(double s, const Eigen::VectorXd& theta) const;

  // Phi^{-1}(clamp(cdf, eps, 1-eps)) with eps = 1e-12; always finite.
  double normal_score(double s, const Eigen::VectorXd& theta) const;

  // Diagnostic counters: CDF values clamped before Phi^{-1}, and log-variance
  // evaluations clamped to the [-30, 30] sanity window.
  std::uint64_t cdf_clamp_count() const { return counters_->cdf_clamps.load(); }
  std::uint64_t logvar_clamp_count() const { return counters_->logvar_clamps.load(); }
  void reset_counters() const;

  // Per-expert (log gate weight, mean, sigma) at theta.
  void expert_parameters(const Eigen::VectorXd& theta, Eigen::VectorXd* log_gate, Eigen::VectorXd* mean,
                         Eigen::VectorXd* sigma) const;

 private:
  struct Counters {
    std::atomic<std::uint64_t> cdf_clamps{0};
    std::atomic<std::uint64_t> logvar_clamps{0};
  };

  int summary_index_;
  Eigen::VectorXd standardization_mean_;
  Eigen::VectorXd standardization_sd_;
  std::vector<ExpertComponent> experts_;
  MoeFitReport fit_report_;
  std::shared_ptr<Counters> counters_;
};

struct MoeFitConfig {
  int max_iter = 200;
  double tol = 1e-7;
  int restarts = 5;
  std::uint64_t seed = 0;
  // Reserved extension: refit the score margins with another normal мixture.
  bool readapt_margins = false;
};

// EM fit: weighted linear regression for means, Newton steps on the
// log-variance link, multinomial-logistic Newton/IRLS for the gates with
// expert 1 held at zero.  Best of `restarts` seeded starts wins.
MoEModel moe_fit(const Eigen::MatrixXd& thetas, const Eigen::VectorXd& s, int n_experts,
                 const MoeFitConfig& config, int summary_index = 0);

struct MoeScoreRow {
  int n_experts = 0;
  double loglik = 0.0;
  double bic = 0.0;
  bool failed = false;
  std::string error;
};

struct MoeSelection {
  MoEModel model;
  std::vector<MoeScoreRow> table;
  int selected_experts = 0;
};

MoeSelection select_moe(const Eigen::MatrixXd& thetas, const Eigen::VectorXd& s,
                        const std::vector<int>& candidates, const MoeFitConfig& config,
                        int summary_index = 0);

}  // namespace rdabc

#endif  // RDABC_MOE_HPP_
