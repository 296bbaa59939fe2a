#pragma once

// Ask/tell evolution strategies over real vectors. Costs are minimized.

#include <Eigen/Core>
#include <json.hpp>

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace tglo {

class EvolutionStrategy {
 public:
  virtual ~EvolutionStrategy() = default;

  virtual std::vector<Eigen::VectorXd> ask() = 0;
  /// `points` must be the batch returned by the preceding ask().
  virtual void tell(const std::vector<Eigen::VectorXd>& points, const std::vector<double>& costs) = 0;

  virtual const Eigen::VectorXd& mean() const = 0;
  virtual double sigma() const = 0;
  virtual int generation() const = 0;

  virtual nlohmann::json save() const = 0;
  virtual void load(const nlohmann::json& state) = 0;
};

struct CmaOptions {
  int population = 20;
  double sigma0 = 0.5;
  std::uint64_t seed = 0;
  /// false gives an isotropic ES with cumulative step-size adaptation only.
  bool adapt_covariance = true;
};

/// (mu/mu_w, lambda)-CMA-ES with rank-one and rank-mu covariance updates and
/// cumulative step-size adaptation, using the standard default constants.
class CmaEs final : public EvolutionStrategy {
 public:
  CmaEs(const Eigen::VectorXd& initial_mean, const CmaOptions& options);

  std::vector<Eigen::VectorXd> ask() override;
  void tell(const std::vector<Eigen::VectorXd>& points, const std::vector<double>& costs) override;

  const Eigen::VectorXd& mean() const override { return mean_; }
  double sigma() const override { return sigma_; }
  int generation() const override { return generation_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }

  nlohmann::json save() const override;
  void load(const nlohmann::json& state) override;

 private:
  void decompose();

  int dim_;
  CmaOptions opt_;
  int mu_;
  Eigen::VectorXd weights_;
  double mueff_, cc_, cs_, c1_, cmu_, damps_, chi_n_;

  Eigen::VectorXd mean_;
  double sigma_;
  Eigen::MatrixXd cov_, basis_;
  Eigen::VectorXd scales_;  ///< sqrt of covariance eigenvalues
  Eigen::VectorXd path_c_, path_s_;
  int generation_ = 0;
  std::mt19937_64 rng_;
};

std::unique_ptr<EvolutionStrategy> make_strategy(const std::string& name, const Eigen::VectorXd& initial_mean,
                                                 const CmaOptions& options);

}  // namespace tglo
