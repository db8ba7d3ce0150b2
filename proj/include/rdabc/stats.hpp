#ifndef RDABC_STATS_HPP_
#define RDABC_STATS_HPP_

#include <vector>

#include <Eigen/Dense>

namespace rdabc {

inline constexpr double kLog2Pi = 1.8378770664093454836;

// Standard normal density, log-density, CDF and inverse CDF.
double norm_pdf(double x);
double norm_log_pdf(double x);
double norm_cdf(double x);

// Wichura's AS 241 (PPND16); |error| < 1e-15 over (0,1).
double norm_quantile(double p);

// log(sum_i exp(v_i)), guarded against empty input and -inf entries.
double log_sum_exp(const Eigen::VectorXd& v);
double log_sum_exp(const std::vector<double>& v);
double log_add_exp(double a, double b);

// Type-7 (linear interpolation) empirical quantile of unsorted data.
double quantile_type7(std::vector<double> values, double p);

// Quantiles of already-sorted data at probability p, type-7 rule.
double quantile_type7_sorted(const std::vector<double>& sorted, double p);

// One-sample Kolmogorov-Smirnov statistic against the standard normal CDF.
double ks_statistic_normal(std::vector<double> values);

// Spearman rank correlation (average ranks on ties).
double spearman_rho(const std::vector<double>& a, const std::vector<double>& b);

// Sample skewness g1 = m3 / m2^{3/2}.
double sample_skewness(const Eigen::VectorXd& v);

}  // namespace rdabc

#endif  // RDABC_STATS_HPP_
