#ifndef RDABC_DETAIL_KMEANS_HPP_
#define RDABC_DETAIL_KMEANS_HPP_

#include <vector>

#include <Eigen/Dense>

#include "rdabc/rng.hpp"

namespace rdabc::detail {

// k-means++ seeding followed by a few Lloyd iterations; returns per-row
// cluster labels in [0, k).  Callers standardize the data first.
std::vector<int> kmeans_labels(const Eigen::MatrixXd& data, int k, Rng& rng, int lloyd_iters = 10);

// Per-column mean and standard deviation (sd floored at 1e-300).
void column_moments(const Eigen::MatrixXd& data, Eigen::VectorXd* mean, Eigen::VectorXd* sd);

}  // namespace rdabc::detail

#endif  // RDABC_DETAIL_KMEANS_HPP_
