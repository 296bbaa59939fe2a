#include "tglo/cma_es.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tglo {

namespace {

nlohmann::json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

CmaEs::CmaEs(const Eigen::VectorXd& initial_mean, const CmaOptions& options)
    : dim_(static_cast<int>(initial_mean.size())), opt_(options), mean_(initial_mean), sigma_(options.sigma0),
      rng_(options.seed) {
  if (dim_ < 1) throw std::invalid_argument("CMA-ES needs at least one dimension");
  if (opt_.population < 2) throw std::invalid_argument("CMA-ES population must be at least 2");
  if (!(opt_.sigma0 > 0.0)) throw std::invalid_argument("initial step size must be positive");

  const double n = dim_;
  mu_ = opt_.population / 2;
  weights_.resize(mu_);
  for (int i = 0; i < mu_; ++i) weights_(i) = std::log(mu_ + 0.5) - std::log(i + 1.0);
  weights_ /= weights_.sum();
  mueff_ = 1.0 / weights_.squaredNorm();

  cc_ = (4.0 + mueff_ / n) / (n + 4.0 + 2.0 * mueff_ / n);
  cs_ = (mueff_ + 2.0) / (n + mueff_ + 5.0);
  c1_ = opt_.adapt_covariance ? 2.0 / ((n + 1.3) * (n + 1.3) + mueff_) : 0.0;
  cmu_ = opt_.adapt_covariance
             ? std::min(1.0 - c1_, 2.0 * (mueff_ - 2.0 + 1.0 / mueff_) / ((n + 2.0) * (n + 2.0) + mueff_))
             : 0.0;
  damps_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff_ - 1.0) / (n + 1.0)) - 1.0) + cs_;
  chi_n_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  cov_ = Eigen::MatrixXd::Identity(dim_, dim_);
  basis_ = Eigen::MatrixXd::Identity(dim_, dim_);
  scales_ = Eigen::VectorXd::Ones(dim_);
  path_c_ = Eigen::VectorXd::Zero(dim_);
  path_s_ = Eigen::VectorXd::Zero(dim_);
}

std::vector<Eigen::VectorXd> CmaEs::ask() {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::VectorXd> points;
  points.reserve(opt_.population);
  for (int k = 0; k < opt_.population; ++k) {
    Eigen::VectorXd z(dim_);
    for (int i = 0; i < dim_; ++i) z(i) = normal(rng_);
    points.push_back(mean_ + sigma_ * (basis_ * scales_.asDiagonal() * z));
  }
  return points;
}

void CmaEs::tell(const std::vector<Eigen::VectorXd>& points, const std::vector<double>& costs) {
  if (points.size() != costs.size() || static_cast<int>(points.size()) != opt_.population)
    throw std::invalid_argument("tell() needs one cost per sampled point");

  std::vector<int> rank(points.size());
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(), [&](int a, int b) { return costs[a] < costs[b]; });

  const Eigen::VectorXd old_mean = mean_;
  mean_.setZero();
  for (int i = 0; i < mu_; ++i) mean_ += weights_(i) * points[rank[i]];
  const Eigen::VectorXd step = (mean_ - old_mean) / sigma_;

  const Eigen::MatrixXd inv_sqrt = basis_ * scales_.cwiseInverse().asDiagonal() * basis_.transpose();
  path_s_ = (1.0 - cs_) * path_s_ + std::sqrt(cs_ * (2.0 - cs_) * mueff_) * (inv_sqrt * step);
  const double ps_norm = path_s_.norm();
  const double decay = 1.0 - std::pow(1.0 - cs_, 2.0 * (generation_ + 1));
  const bool hsig = ps_norm / std::sqrt(decay) / chi_n_ < 1.4 + 2.0 / (dim_ + 1.0);
  path_c_ = (1.0 - cc_) * path_c_ + (hsig ? std::sqrt(cc_ * (2.0 - cc_) * mueff_) : 0.0) * step;

  if (opt_.adapt_covariance) {
    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(dim_, dim_);
    for (int i = 0; i < mu_; ++i) {
      const Eigen::VectorXd y = (points[rank[i]] - old_mean) / sigma_;
      rank_mu += weights_(i) * y * y.transpose();
    }
    const double lost = hsig ? 0.0 : cc_ * (2.0 - cc_);
    cov_ = (1.0 - c1_ - cmu_) * cov_ + c1_ * (path_c_ * path_c_.transpose() + lost * cov_) + cmu_ * rank_mu;
    cov_ = 0.5 * (cov_ + cov_.transpose());
    decompose();
  }

  sigma_ *= std::exp((cs_ / damps_) * (ps_norm / chi_n_ - 1.0));
  sigma_ = std::clamp(sigma_, 1e-12, 1e6);
  ++generation_;
}

void CmaEs::decompose() {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_);
  if (eig.info() != Eigen::Success) throw std::runtime_error("covariance eigendecomposition failed");
  basis_ = eig.eigenvectors();
  scales_ = eig.eigenvalues().cwiseMax(1e-20).cwiseSqrt();
}

nlohmann::json CmaEs::save() const {
  std::ostringstream rng_state;
  rng_state << rng_;
  nlohmann::json cov = nlohmann::json::array();
  for (int i = 0; i < dim_; ++i) cov.push_back(to_json(cov_.row(i).transpose()));
  return {{"kind", opt_.adapt_covariance ? "cma" : "isotropic"},
          {"mean", to_json(mean_)},
          {"sigma", sigma_},
          {"covariance", cov},
          {"path_c", to_json(path_c_)},
          {"path_s", to_json(path_s_)},
          {"generation", generation_},
          {"rng", rng_state.str()}};
}

void CmaEs::load(const nlohmann::json& state) {
  mean_ = vector_from_json(state.at("mean"));
  if (mean_.size() != dim_) throw std::invalid_argument("strategy state has wrong dimension");
  sigma_ = state.at("sigma").get<double>();
  const auto& cov = state.at("covariance");
  for (int i = 0; i < dim_; ++i) cov_.row(i) = vector_from_json(cov.at(i)).transpose();
  path_c_ = vector_from_json(state.at("path_c"));
  path_s_ = vector_from_json(state.at("path_s"));
  generation_ = state.at("generation").get<int>();
  std::istringstream rng_state(state.at("rng").get<std::string>());
  rng_state >> rng_;
  decompose();
}

std::unique_ptr<EvolutionStrategy> make_strategy(const std::string& name, const Eigen::VectorXd& initial_mean,
                                                 const CmaOptions& options) {
  CmaOptions opt = options;
  if (name == "cma") {
    opt.adapt_covariance = true;
  } else if (name == "isotropic") {
    opt.adapt_covariance = false;
  } else {
    throw std::invalid_argument("unknown evolution strategy '" + name + "'");
  }
  return std::make_unique<CmaEs>(initial_mean, opt);
}

}  // namespace tglo
