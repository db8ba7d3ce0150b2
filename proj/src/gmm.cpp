#include "rdabc/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rdabc/detail/kmeans.hpp"
#include "rdabc/errors.hpp"
#include "rdabc/stats.hpp"

namespace rdabc {

namespace {

// Cholesky of a symmetric matrix, throwing on non-positive pivots.
Eigen::MatrixXd chol_or_throw(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw FitRejectedError(std::string(what) + ": covariance not positive definite");
  return llt.matrixL();
}

double chol_log_det(const Eigen::MatrixXd& lower) {
  return 2.0 * lower.diagonal().array().log().sum();
}

double gaussian_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                            const Eigen::MatrixXd& chol_lower, double log_det) {
  const Eigen::VectorXd y = chol_lower.triangularView<Eigen::Lower>().solve(x - mean);
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + log_det + y.squaredNorm());
}

}  // namespace

GaussianComponent::GaussianComponent(double weight, Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : weight_(weight), mean_(std::move(mean)), covariance_(std::move(covariance)) {
  if (!(weight_ > 0.0)) throw ContractError("GaussianComponent: weight must be > 0");
  if (covariance_.rows() != covariance_.cols() || covariance_.rows() != mean_.size()) {
    throw ContractError("GaussianComponent: dimension mismatch");
  }
  if (!mean_.allFinite() || !covariance_.allFinite()) {
    throw ContractError("GaussianComponent: non-finite parameters");
  }
  const double asym = (covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, covariance_.cwiseAbs().maxCoeff());
  if (asym > 1e-8 * scale) throw ContractError("GaussianComponent: covariance not symmetric");
  covariance_ = 0.5 * (covariance_ + covariance_.transpose().eval());
  chol_lower_ = chol_or_throw(covariance_, "GaussianComponent");
  log_det_ = chol_log_det(chol_lower_);
}

double GaussianComponent::log_density(const Eigen::VectorXd& x) const {
  if (x.size() != mean_.size()) throw ContractError("GaussianComponent: dimension mismatch");
  return gaussian_log_density(x, mean_, chol_lower_, log_det_);
}

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw ContractError("GaussianMixture: needs at least one component");
  dimension_ = components_[0].dimension();
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.dimension() != dimension_) throw ContractError("GaussianMixture: components disagree on dimension");
    total += c.weight();
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ContractError("GaussianMixture: weights sum to " + std::to_string(total) + ", expected 1");
  }
}

double GaussianMixture::log_density(const Eigen::VectorXd& x) const {
  if (x.size() != dimension_) throw ContractError("GaussianMixture::log_density: dimension mismatch");
  if (!x.allFinite()) throw ContractError("GaussianMixture::log_density: non-finite input");
  Eigen::VectorXd terms(component_count());
  for (int l = 0; l < component_count(); ++l) {
    terms[l] = std::log(components_[static_cast<std::size_t>(l)].weight()) +
               components_[static_cast<std::size_t>(l)].log_density(x);
  }
  return log_sum_exp(terms);
}

Eigen::MatrixXd GaussianMixture::sample(int n, Rng& rng) const {
  if (n < 1) throw ContractError("GaussianMixture::sample: n must be >= 1");
  Eigen::MatrixXd out(n, dimension_);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    double acc = 0.0;
    int pick = component_count() - 1;
    for (int l = 0; l < component_count(); ++l) {
      acc += components_[static_cast<std::size_t>(l)].weight();
      if (u < acc) {
        pick = l;
        break;
      }
    }
    const auto& c = components_[static_cast<std::size_t>(pick)];
    out.row(i) = (c.mean() + c.chol_lower() * rng.normal_vector(dimension_)).transpose();
  }
  return out;
}

double gmm_log_density(const GaussianMixture& model, const Eigen::VectorXd& x) {
  return model.log_density(x);
}

Eigen::MatrixXd gmm_sample(const GaussianMixture& model, int n, Rng& rng) {
  return model.sample(n, rng);
}

namespace {

struct EmState {
  Eigen::VectorXd weights;            // L
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> chols;  // lower Cholesky factors
  std::vector<Eigen::MatrixXd> covs;
  std::vector<double> log_dets;
  int count() const { return static_cast<int>(means.size()); }
};

// Log joint density of every point under every component; returns per-row
// log-sum-exp (the observed-data log-likelihood contributions).
double estep(const Eigen::MatrixXd& data, const EmState& state, Eigen::MatrixXd* log_resp) {
  const Eigen::Index n = data.rows();
  const int L = state.count();
  log_resp->resize(n, L);
  for (int l = 0; l < L; ++l) {
    const double lw = std::log(state.weights[l]);
    const auto& mean = state.means[static_cast<std::size_t>(l)];
    const auto& chol = state.chols[static_cast<std::size_t>(l)];
    const double ld = state.log_dets[static_cast<std::size_t>(l)];
    for (Eigen::Index i = 0; i < n; ++i) {
      (*log_resp)(i, l) = lw + gaussian_log_density(data.row(i).transpose(), mean, chol, ld);
    }
  }
  double loglik = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lse = log_sum_exp(log_resp->row(i).transpose().eval());
    loglik += lse;
    log_resp->row(i).array() -= lse;
  }
  return loglik;
}

void mstep(const Eigen::MatrixXd& data, const Eigen::MatrixXd& log_resp, double ridge,
           double prune_threshold, EmState* state, std::vector<std::string>* warnings) {
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  const int L = state->count();
  const Eigen::MatrixXd resp = log_resp.array().exp();
  const Eigen::VectorXd counts = resp.colwise().sum();

  std::vector<int> keep;
  for (int l = 0; l < L; ++l) {
    if (counts[l] / static_cast<double>(n) < prune_threshold) {
      std::ostringstream msg;
      msg << "pruned component " << l << " with weight " << counts[l] / static_cast<double>(n);
      warnings->push_back(msg.str());
    } else {
      keep.push_back(l);
    }
  }
  if (keep.empty()) keep.push_back(0);  // never drop the whole mixture

  EmState next;
  next.weights.resize(static_cast<Eigen::Index>(keep.size()));
  double weight_total = 0.0;
  for (std::size_t j = 0; j < keep.size(); ++j) weight_total += counts[keep[j]];
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const int l = keep[j];
    const double nl = counts[l];
    next.weights[static_cast<Eigen::Index>(j)] = nl / weight_total;
    Eigen::VectorXd mean = (resp.col(l).transpose() * data).transpose() / nl;
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd d = data.row(i).transpose() - mean;
      scatter.noalias() += resp(i, l) * d * d.transpose();
    }
    Eigen::MatrixXd cov = scatter / nl + ridge * Eigen::MatrixXd::Identity(p, p);
    cov = 0.5 * (cov + cov.transpose().eval());
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw FitRejectedError("fit_gmm: component covariance lost positive definiteness during EM");
    }
    next.means.push_back(std::move(mean));
    next.covs.push_back(cov);
    next.chols.push_back(llt.matrixL());
    next.log_dets.push_back(chol_log_det(next.chols.back()));
  }
  *state = std::move(next);
}

EmState initial_state(const Eigen::MatrixXd& data, int L, double ridge, Rng& rng) {
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  Eigen::VectorXd col_mean, col_sd;
  detail::column_moments(data, &col_mean, &col_sd);
  Eigen::MatrixXd standardized = (data.rowwise() - col_mean.transpose()).array().rowwise() / col_sd.transpose().array();
  const std::vector<int> labels = detail::kmeans_labels(standardized, L, rng);

  Eigen::MatrixXd global_cov = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd d = data.row(i).transpose() - col_mean;
    global_cov.noalias() += d * d.transpose();
  }
  global_cov /= static_cast<double>(n);
  global_cov += ridge * Eigen::MatrixXd::Identity(p, p);

  EmState state;
  state.weights.resize(L);
  for (int l = 0; l < L; ++l) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (labels[static_cast<std::size_t>(i)] == l) members.push_back(i);
    }
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    if (members.size() < static_cast<std::size_t>(p) + 2) {
      mean = members.empty() ? col_mean : data.row(members[rng.uniform_int(members.size())]).transpose();
      cov = global_cov;
    } else {
      mean = Eigen::VectorXd::Zero(p);
      for (Eigen::Index i : members) mean += data.row(i).transpose();
      mean /= static_cast<double>(members.size());
      cov = Eigen::MatrixXd::Zero(p, p);
      for (Eigen::Index i : members) {
        const Eigen::VectorXd d = data.row(i).transpose() - mean;
        cov.noalias() += d * d.transpose();
      }
      cov /= static_cast<double>(members.size());
      cov += ridge * Eigen::MatrixXd::Identity(p, p);
    }
    cov = 0.5 * (cov + cov.transpose().eval());
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      cov = global_cov;
      llt.compute(cov);
      if (llt.info() != Eigen::Success) throw FitRejectedError("fit_gmm: initialization covariance not positive definite");
    }
    state.weights[l] = std::max(1.0, static_cast<double>(members.size())) / static_cast<double>(n);
    state.means.push_back(std::move(mean));
    state.covs.push_back(cov);
    state.chols.push_back(llt.matrixL());
    state.log_dets.push_back(chol_log_det(state.chols.back()));
  }
  state.weights /= state.weights.sum();
  return state;
}

GaussianMixture state_to_mixture(const EmState& state) {
  std::vector<GaussianComponent> components;
  components.reserve(static_cast<std::size_t>(state.count()));
  // Renormalize defensively; pruning keeps the sum at 1 up to rounding.
  const double total = state.weights.sum();
  for (int l = 0; l < state.count(); ++l) {
    components.emplace_back(state.weights[l] / total, state.means[static_cast<std::size_t>(l)],
                            state.covs[static_cast<std::size_t>(l)]);
  }
  return GaussianMixture(std::move(components));
}

}  // namespace

GaussianMixture fit_gmm(const Eigen::MatrixXd& data, int n_components, const GmmFitConfig& config,
                        GmmFitReport* report) {
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  if (n_components < 1) throw ContractError("fit_gmm: n_components must be >= 1");
  if (p < 1) throw ContractError("fit_gmm: data must have at least one column");
  if (!data.allFinite()) throw FitRejectedError("fit_gmm: data contains non-finite entries");
  if (n <= static_cast<Eigen::Index>(n_components) * (p + 1)) {
    throw InsufficientDataError("fit_gmm: need N > L*(p+1) rows, got N=" + std::to_string(n) +
                                " for L=" + std::to_string(n_components) + ", p=" + std::to_string(p));
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    if (data.col(j).maxCoeff() == data.col(j).minCoeff()) {
      throw FitRejectedError("fit_gmm: column " + std::to_string(j) + " has zero variance");
    }
  }

  Eigen::VectorXd col_mean, col_sd;
  detail::column_moments(data, &col_mean, &col_sd);
  const double mean_diag_var = col_sd.array().square().mean();
  const double ridge = config.ridge >= 0.0 ? config.ridge : 1e-6 * mean_diag_var;
  const double prune_threshold = 1e-8 / static_cast<double>(n);

  Rng base(config.seed);
  GmmFitReport best;
  EmState best_state;
  bool have_best = false;
  std::string first_error;

  const int restarts = std::max(1, config.restarts);
  for (int r = 0; r < restarts; ++r) {
    Rng rng = base.derive(0x9d5c0000u + static_cast<std::uint64_t>(r));
    GmmFitReport rep;
    rep.restart_index = r;
    rep.ridge_used = ridge;
    try {
      EmState state = initial_state(data, n_components, ridge, rng);
      EmState prev_state = state;
      double prev_ll = -std::numeric_limits<double>::infinity();
      Eigen::MatrixXd log_resp;
      for (int it = 0; it <= config.max_iter; ++it) {
        const double ll = estep(data, state, &log_resp);
        if (!std::isfinite(ll)) throw FitRejectedError("fit_gmm: non-finite log-likelihood during EM");
        if (ll < prev_ll) {
          // A ridge- or prune-perturbed M-step can nudge the observed
          // log-likelihood down; roll back and stop at the better iterate.
          state = prev_state;
          rep.converged = true;
          break;
        }
        rep.loglik_trajectory.push_back(ll);
        rep.loglik = ll;
        rep.iterations = it;
        if (it > 0 && (ll - prev_ll) < config.tol * (std::abs(prev_ll) + 1e-12)) {
          rep.converged = true;
          break;
        }
        if (it == config.max_iter) break;
        prev_state = state;
        prev_ll = ll;
        mstep(data, log_resp, ridge, prune_threshold, &state, &rep.warnings);
      }
      if (!have_best || rep.loglik > best.loglik) {
        best = rep;
        best_state = state;
        have_best = true;
      }
    } catch (const std::exception& e) {
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (!have_best) {
    throw FitRejectedError("fit_gmm: all " + std::to_string(restarts) + " restarts failed: " + first_error);
  }
  if (report) *report = best;
  return state_to_mixture(best_state);
}

namespace {

int gmm_free_parameters(int L, int p) {
  return (L - 1) + L * (p + p * (p + 1) / 2);
}

}  // namespace

GmmSelection select_gmm(const Eigen::MatrixXd& data, const std::vector<int>& candidates,
                        const GmmFitConfig& config) {
  if (candidates.empty()) throw ContractError("select_gmm: no candidates");
  const double n = static_cast<double>(data.rows());
  std::vector<GmmScoreRow> table;
  bool have_best = false;
  GmmSelection out{GaussianMixture({GaussianComponent(1.0, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1))}),
                   {},
                   {},
                   0};
  double best_bic = std::numeric_limits<double>::infinity();
  std::string errors;
  for (int L : candidates) {
    GmmScoreRow row;
    row.n_components = L;
    try {
      GmmFitReport rep;
      GaussianMixture model = fit_gmm(data, L, config, &rep);
      row.loglik = rep.loglik;
      row.bic = -2.0 * rep.loglik +
                static_cast<double>(gmm_free_parameters(model.component_count(), model.dimension())) * std::log(n);
      if (row.bic < best_bic) {
        best_bic = row.bic;
        out.model = model;
        out.report = rep;
        out.selected_components = L;
        have_best = true;
      }
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
      errors += std::string(errors.empty() ? "" : "; ") + "L=" + std::to_string(L) + ": " + e.what();
    }
    table.push_back(std::move(row));
  }
  if (!have_best) throw FitRejectedError("select_gmm: all candidates rejected: " + errors);
  out.table = std::move(table);
  return out;
}

GaussianMixture gmm_marginal(const GaussianMixture& model, const std::vector<int>& indices) {
  if (indices.empty()) throw ContractError("gmm_marginal: empty index set");
  for (int idx : indices) {
    if (idx < 0 || idx >= model.dimension()) throw ContractError("gmm_marginal: index out of range");
  }
  const int m = static_cast<int>(indices.size());
  std::vector<GaussianComponent> components;
  components.reserve(static_cast<std::size_t>(model.component_count()));
  for (const auto& c : model.components()) {
    Eigen::VectorXd mean(m);
    Eigen::MatrixXd cov(m, m);
    for (int i = 0; i < m; ++i) {
      mean[i] = c.mean()[indices[static_cast<std::size_t>(i)]];
      for (int j = 0; j < m; ++j) {
        cov(i, j) = c.covariance()(indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(j)]);
      }
    }
    components.emplace_back(c.weight(), std::move(mean), std::move(cov));
  }
  return GaussianMixture(std::move(components));
}

GmmConditioner::GmmConditioner(const GaussianMixture& model, std::vector<int> b_indices)
    : b_indices_(std::move(b_indices)) {
  const int p = model.dimension();
  std::vector<bool> is_b(static_cast<std::size_t>(p), false);
  if (b_indices_.empty()) throw ContractError("GmmConditioner: empty B block");
  for (int idx : b_indices_) {
    if (idx < 0 || idx >= p) throw ContractError("GmmConditioner: B index out of range");
    if (is_b[static_cast<std::size_t>(idx)]) throw ContractError("GmmConditioner: duplicate B index");
    is_b[static_cast<std::size_t>(idx)] = true;
  }
  for (int i = 0; i < p; ++i) {
    if (!is_b[static_cast<std::size_t>(i)]) a_indices_.push_back(i);
  }
  if (a_indices_.empty()) throw ContractError("GmmConditioner: B block covers all coordinates");

  const int na = static_cast<int>(a_indices_.size());
  const int nb = static_cast<int>(b_indices_.size());
  parts_.reserve(static_cast<std::size_t>(model.component_count()));
  for (const auto& c : model.components()) {
    Part part;
    part.log_weight = std::log(c.weight());
    part.mean_a.resize(na);
    part.mean_b.resize(nb);
    Eigen::MatrixXd cov_aa(na, na), cov_ab(na, nb), cov_bb(nb, nb);
    for (int i = 0; i < na; ++i) {
      part.mean_a[i] = c.mean()[a_indices_[static_cast<std::size_t>(i)]];
      for (int j = 0; j < na; ++j) cov_aa(i, j) = c.covariance()(a_indices_[static_cast<std::size_t>(i)], a_indices_[static_cast<std::size_t>(j)]);
      for (int j = 0; j < nb; ++j) cov_ab(i, j) = c.covariance()(a_indices_[static_cast<std::size_t>(i)], b_indices_[static_cast<std::size_t>(j)]);
    }
    for (int i = 0; i < nb; ++i) {
      part.mean_b[i] = c.mean()[b_indices_[static_cast<std::size_t>(i)]];
      for (int j = 0; j < nb; ++j) cov_bb(i, j) = c.covariance()(b_indices_[static_cast<std::size_t>(i)], b_indices_[static_cast<std::size_t>(j)]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt_bb(cov_bb);
    if (llt_bb.info() != Eigen::Success) {
      throw FitRejectedError("GmmConditioner: B-block covariance not positive definite");
    }
    part.chol_bb = llt_bb.matrixL();
    part.log_det_bb = chol_log_det(part.chol_bb);
    part.gain = llt_bb.solve(cov_ab.transpose()).transpose();  // Sigma_AB Sigma_BB^{-1}
    Eigen::MatrixXd cond = cov_aa - part.gain * cov_ab.transpose();
    cond = 0.5 * (cond + cond.transpose().eval());
    Eigen::LLT<Eigen::MatrixXd> llt_cond(cond);
    if (llt_cond.info() != Eigen::Success) {
      throw FitRejectedError("GmmConditioner: conditional covariance not positive definite");
    }
    part.cond_cov = cond;
    part.cond_chol = llt_cond.matrixL();
    part.cond_log_det = chol_log_det(part.cond_chol);
    parts_.push_back(std::move(part));
  }
}

void GmmConditioner::component_log_weights(const Eigen::VectorXd& b, Eigen::VectorXd* out) const {
  if (b.size() != static_cast<Eigen::Index>(b_indices_.size())) {
    throw ContractError("GmmConditioner: b has wrong length");
  }
  if (!b.allFinite()) throw ContractError("GmmConditioner: b must be finite");
  out->resize(static_cast<Eigen::Index>(parts_.size()));
  for (std::size_t l = 0; l < parts_.size(); ++l) {
    const Part& part = parts_[l];
    (*out)[static_cast<Eigen::Index>(l)] =
        part.log_weight + gaussian_log_density(b, part.mean_b, part.chol_bb, part.log_det_bb);
  }
}

GaussianMixture GmmConditioner::condition(const Eigen::VectorXd& b) const {
  Eigen::VectorXd lw;
  component_log_weights(b, &lw);
  const double lse = log_sum_exp(lw);
  std::vector<GaussianComponent> components;
  components.reserve(parts_.size());
  for (std::size_t l = 0; l < parts_.size(); ++l) {
    const Part& part = parts_[l];
    const double w = std::exp(lw[static_cast<Eigen::Index>(l)] - lse);
    if (w <= 0.0) continue;  // numerically impossible component this far out
    components.emplace_back(w, part.mean_a + part.gain * (b - part.mean_b), part.cond_cov);
  }
  if (components.empty()) {
    // All weights underflowed; fall back to the dominant component.
    Eigen::Index argmax;
    lw.maxCoeff(&argmax);
    const Part& part = parts_[static_cast<std::size_t>(argmax)];
    components.emplace_back(1.0, part.mean_a + part.gain * (b - part.mean_b), part.cond_cov);
  }
  // Rounding in exp() can leave the sum a few ulps off 1; renormalize.
  double total = 0.0;
  for (const auto& c : components) total += c.weight();
  std::vector<GaussianComponent> normalized;
  normalized.reserve(components.size());
  for (const auto& c : components) normalized.emplace_back(c.weight() / total, c.mean(), c.covariance());
  return GaussianMixture(std::move(normalized));
}

double GmmConditioner::conditional_log_density(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  if (a.size() != static_cast<Eigen::Index>(a_indices_.size())) {
    throw ContractError("GmmConditioner: a has wrong length");
  }
  Eigen::VectorXd lw;
  component_log_weights(b, &lw);
  const double lse = log_sum_exp(lw);
  Eigen::VectorXd terms(static_cast<Eigen::Index>(parts_.size()));
  for (std::size_t l = 0; l < parts_.size(); ++l) {
    const Part& part = parts_[l];
    const Eigen::VectorXd mean = part.mean_a + part.gain * (b - part.mean_b);
    terms[static_cast<Eigen::Index>(l)] =
        (lw[static_cast<Eigen::Index>(l)] - lse) + gaussian_log_density(a, mean, part.cond_chol, part.cond_log_det);
  }
  return log_sum_exp(terms);
}

double GmmConditioner::marginal_log_density(const Eigen::VectorXd& b) const {
  Eigen::VectorXd lw;
  component_log_weights(b, &lw);
  return log_sum_exp(lw);
}

GaussianMixture gmm_condition(const GaussianMixture& model, const std::vector<int>& b_indices,
                              const Eigen::VectorXd& b) {
  return GmmConditioner(model, b_indices).condition(b);
}

}  // namespace rdabc
