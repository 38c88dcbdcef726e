#include "skf/filter.hpp"

#include <algorithm>
#include <cmath>

namespace skf {

namespace {

bool is_identity(const Matrix& a) { return a.isIdentity(0.0); }

void require_psd(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + " is not finite");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw std::invalid_argument(std::string(what) + " is not symmetric");
  const double tr = m.trace();
  if (min_eigenvalue(m) < -1e-12 * std::max(tr, 1.0)) throw std::invalid_argument(std::string(what) + " is not PSD");
}

void set_information_zero(FilterState& s, std::size_t p) {
  const auto n = static_cast<Eigen::Index>(p);
  s.mode = FilterMode::information;
  s.info_pred = Matrix::Zero(n, n);
  s.info_vec_pred = Vector::Zero(n);
  s.mean_pred = Vector::Zero(n);
  s.rows_since_reset = 0;
}

void set_diffuse(FilterState& s, const Vector& mean, double gamma) {
  const auto n = mean.size();
  s.mode = FilterMode::information;
  s.info_pred = Matrix::Identity(n, n) / gamma;
  s.info_vec_pred = mean / gamma;
  s.mean_pred = mean;
  s.rows_since_reset = 0;
}

double diffuse_gamma(const FilterModel& model) {
  if (const auto* d = std::get_if<DiffusePrior>(&model.prior)) return d->gamma;
  return 1e8;
}

// Information-form time update: J_pred = (I + M Q)^-1 M with M = A^-T J A^-1,
// which stays valid for singular J and singular Q.
void information_time_update(FilterState& s, const FilterModel& model, const ProcessStep& q) {
  const Eigen::Index p = s.info_pred.rows();
  Matrix m;
  Vector hm;
  if (is_identity(model.transition)) {
    m = std::move(s.info_pred);
    hm = std::move(s.info_vec_pred);
  } else {
    Eigen::FullPivLU<Matrix> lu(model.transition);
    if (!lu.isInvertible()) throw FilterDivergence(s.t, "information form needs an invertible transition matrix");
    const Matrix a_inv = lu.inverse();
    m = a_inv.transpose() * s.info_pred * a_inv;
    hm = a_inv.transpose() * s.info_vec_pred;
  }
  const bool has_q = q.covariance != nullptr || q.impulse != 0.0;
  if (has_q) {
    Matrix qt = q.covariance ? *q.covariance : Matrix::Zero(p, p);
    if (q.impulse != 0.0) qt.diagonal().array() += q.impulse;
    const Matrix g = Matrix::Identity(p, p) + m * qt;
    Eigen::PartialPivLU<Matrix> lu(g);
    m = lu.solve(m);
    hm = lu.solve(hm);
  }
  symmetrize(m);
  s.info_pred = std::move(m);
  s.info_vec_pred = std::move(hm);
}

}  // namespace

ProcessNoise ProcessNoise::constant(Matrix q) {
  ProcessNoise n;
  n.base_ = std::move(q);
  return n;
}

ProcessNoise ProcessNoise::random_walk(std::size_t dim, const std::vector<std::size_t>& indices, double variance) {
  if (!(variance >= 0.0)) throw std::invalid_argument("random walk variance must be >= 0");
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix q = Matrix::Zero(n, n);
  for (std::size_t i : indices) {
    if (i >= dim) throw std::invalid_argument("random walk index out of range");
    q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = variance;
  }
  ProcessNoise out;
  if (variance > 0.0 && !indices.empty()) out.base_ = std::move(q);
  return out;
}

ProcessNoise& ProcessNoise::set_switches(std::vector<long> instants, SwitchHandling handling, double gamma) {
  std::sort(instants.begin(), instants.end());
  instants.erase(std::unique(instants.begin(), instants.end()), instants.end());
  if (!(gamma > 0.0)) throw std::invalid_argument("switch gamma must be > 0");
  switches_ = std::move(instants);
  handling_ = handling;
  gamma_ = gamma;
  return *this;
}

ProcessStep ProcessNoise::at(long t) const {
  ProcessStep s;
  if (base_) s.covariance = &*base_;
  if (std::binary_search(switches_.begin(), switches_.end(), t + 1)) {
    if (handling_ == SwitchHandling::exact_reset) {
      s.reset = true;
    } else {
      s.impulse = gamma_;
    }
  }
  return s;
}

void FilterModel::validate() const {
  const Eigen::Index p = transition.rows();
  if (p == 0 || transition.cols() != p) throw std::invalid_argument("transition matrix must be square and nonempty");
  if (!transition.allFinite()) throw std::invalid_argument("transition matrix is not finite");
  if (prior_mean.size() != p) throw std::invalid_argument("prior mean has wrong dimension");
  if (!(noise_var > 0.0) || !std::isfinite(noise_var)) throw std::invalid_argument("noise variance must be > 0");
  if (!(rank_tol > 0.0) || !(rank_tol < 1.0)) throw std::invalid_argument("rank tolerance must lie in (0, 1)");
  if (const auto& q = process.base()) {
    if (q->rows() != p || q->cols() != p) throw std::invalid_argument("process covariance has wrong dimension");
    require_psd(*q, "process covariance");
  }
  if (const auto* inf = std::get_if<InformativePrior>(&prior)) {
    if (inf->covariance.rows() != p || inf->covariance.cols() != p)
      throw std::invalid_argument("prior covariance has wrong dimension");
    require_psd(inf->covariance, "prior covariance");
    Eigen::LLT<Matrix> llt(inf->covariance);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("prior covariance is not positive definite");
  }
  if (const auto* d = std::get_if<DiffusePrior>(&prior)) {
    if (!(d->gamma > 0.0)) throw std::invalid_argument("diffuse prior gamma must be > 0");
  }
  const bool uses_information = !std::holds_alternative<InformativePrior>(prior) ||
                                (!process.switches().empty() && process.handling() == SwitchHandling::exact_reset);
  if (uses_information && !is_identity(transition) && !Eigen::FullPivLU<Matrix>(transition).isInvertible())
    throw std::invalid_argument("information-form propagation needs an invertible transition matrix");
}

FilterModel FilterModel::time_invariant(std::size_t dim, Prior prior, double noise_var) {
  const auto n = static_cast<Eigen::Index>(dim);
  FilterModel m;
  m.transition = Matrix::Identity(n, n);
  m.prior_mean = Vector::Zero(n);
  m.prior = std::move(prior);
  m.noise_var = noise_var;
  return m;
}

FilterState init(const FilterModel& model) {
  model.validate();
  const std::size_t p = model.dim();
  FilterState s;
  if (const auto* inf = std::get_if<InformativePrior>(&model.prior)) {
    s.mode = FilterMode::covariance;
    s.mean_pred = model.prior_mean;
    s.cov_pred = inf->covariance;
  } else if (const auto* d = std::get_if<DiffusePrior>(&model.prior)) {
    s.diffuse = true;
    set_diffuse(s, model.prior_mean, d->gamma);
  } else {
    set_information_zero(s, p);
  }
  s.mean_filt = s.mean_pred;
  s.cov_filt = s.mode == FilterMode::covariance ? s.cov_pred : Matrix::Zero(s.mean_pred.size(), s.mean_pred.size());
  return s;
}

void reset(FilterState& s, const FilterModel& model) {
  const Eigen::Index p = static_cast<Eigen::Index>(model.dim());
  if (s.diffuse) {
    set_diffuse(s, Vector::Zero(p), diffuse_gamma(model));
  } else {
    set_information_zero(s, static_cast<std::size_t>(p));
  }
}

StepOutput step(FilterState& s, const FilterModel& model, const Vector& row, double y, const ProcessStep& q) {
  const Eigen::Index p = s.mean_pred.size();
  if (row.size() != p) throw std::invalid_argument("regressor row length does not match the filter dimension");
  if (!std::isfinite(y) || !row.allFinite()) throw FilterDivergence(s.t, "non-finite measurement or regressor");

  const double eta2 = model.noise_var;
  StepOutput out;
  out.innovation = y - row.dot(s.mean_pred);

  if (s.mode == FilterMode::covariance) {
    const Vector p_row = s.cov_pred * row;
    const double quad = row.dot(p_row);
    if (!(quad + eta2 > 0.0)) throw FilterDivergence(s.t, "innovation variance is not positive");
    // quad is a PSD quadratic form; negative values are roundoff.
    const double v = std::max(quad, 0.0) + eta2;
    out.innovation_var = v;
    s.mean_filt = s.mean_pred + p_row * (out.innovation / v);
    s.cov_filt = s.cov_pred;
    s.cov_filt.selfadjointView<Eigen::Lower>().rankUpdate(p_row, -1.0 / v);
    s.cov_filt.triangularView<Eigen::StrictlyUpper>() = s.cov_filt.transpose();
  } else {
    if (s.diffuse) {
      const double quad = row.dot(spd_solve(s.info_pred, row));
      out.innovation_var = std::max(quad, 0.0) + eta2;
    }
    Matrix& info = s.info_pred;  // becomes the filtered information matrix
    info.selfadjointView<Eigen::Lower>().rankUpdate(row, 1.0 / eta2);
    info.triangularView<Eigen::StrictlyUpper>() = info.transpose();
    s.info_vec_pred += row * (y / eta2);
    ++s.rows_since_reset;

    if (s.diffuse) {
      s.cov_filt = spd_inverse(info);
      s.mean_filt = spd_solve(info, s.info_vec_pred);
    } else if (s.rows_since_reset >= p && equilibrated_full_rank(info, model.rank_tol)) {
      s.cov_filt = spd_inverse(info);
      s.mean_filt = spd_solve(info, s.info_vec_pred);
      s.mode = FilterMode::covariance;
    } else {
      s.cov_filt = symmetric_pinv(info);
      s.mean_filt = s.cov_filt * s.info_vec_pred;
    }
  }
  symmetrize(s.cov_filt);
  if (!s.mean_filt.allFinite() || !s.cov_filt.allFinite()) throw FilterDivergence(s.t, "filtered state is not finite");

  // Time update.
  const bool identity = is_identity(model.transition);
  if (q.reset) {
    reset(s, model);
  } else if (s.mode == FilterMode::covariance) {
    s.mean_pred = identity ? s.mean_filt : Vector(model.transition * s.mean_filt);
    s.cov_pred = identity ? s.cov_filt : Matrix(model.transition * s.cov_filt * model.transition.transpose());
    if (q.covariance) s.cov_pred += *q.covariance;
    if (q.impulse != 0.0) s.cov_pred.diagonal().array() += q.impulse;
    symmetrize(s.cov_pred);
  } else {
    information_time_update(s, model, q);
    s.mean_pred = identity ? s.mean_filt : Vector(model.transition * s.mean_filt);
  }
  ++s.t;
  return out;
}

StepOutput step(FilterState& s, const FilterModel& model, const Vector& row, double y) {
  return step(s, model, row, y, model.process.at(s.t));
}

}  // namespace skf
