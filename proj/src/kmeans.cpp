#include "rdabc/detail/kmeans.hpp"

#include <cmath>
#include <limits>

namespace rdabc::detail {

void column_moments(const Eigen::MatrixXd& data, Eigen::VectorXd* mean, Eigen::VectorXd* sd) {
  const Eigen::Index n = data.rows();
  *mean = data.colwise().mean();
  Eigen::VectorXd var = (data.rowwise() - mean->transpose()).array().square().colwise().sum() / std::max<double>(1.0, static_cast<double>(n - 1));
  *sd = var.array().sqrt().max(1e-300);
}

std::vector<int> kmeans_labels(const Eigen::MatrixXd& data, int k, Rng& rng, int lloyd_iters) {
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  if (k <= 1 || n == 0) return labels;

  Eigen::MatrixXd centers(k, p);
  Eigen::VectorXd d2 = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());

  // k-means++ seeding.
  const Eigen::Index first = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
  centers.row(0) = data.row(first);
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dist = (data.row(i) - centers.row(c - 1)).squaredNorm();
      if (dist < d2[i]) d2[i] = dist;
    }
    const double total = d2.sum();
    Eigen::Index pick;
    if (total <= 0.0) {
      pick = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    } else {
      double target = rng.uniform() * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= d2[i];
        if (target <= 0.0) {
          pick = i;
          break;
        }
      }
    }
    centers.row(c) = data.row(pick);
  }

  for (int it = 0; it < lloyd_iters; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (int c = 0; c < k; ++c) {
        const double dist = (data.row(i) - centers.row(c)).squaredNorm();
        if (dist < best) {
          best = dist;
          best_c = c;
        }
      }
      if (labels[static_cast<std::size_t>(i)] != best_c) {
        labels[static_cast<std::size_t>(i)] = best_c;
        changed = true;
      }
    }
    if (!changed && it > 0) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, p);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += data.row(i);
      counts[labels[static_cast<std::size_t>(i)]] += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0.0) {
        centers.row(c) = sums.row(c) / counts[c];
      } else {
        // Re-seed an empty cluster at the point farthest from its center.
        Eigen::Index far = 0;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double dist = (data.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
          if (dist > far_d) {
            far_d = dist;
            far = i;
          }
        }
        centers.row(c) = data.row(far);
      }
    }
  }
  return labels;
}

}  // namespace rdabc::detail
