#include "gridweave/cma_es.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "gridweave/errors.hpp"
#include "gridweave/rng.hpp"

namespace gridweave {

namespace {

bool in_box(const std::vector<double>& x, const std::vector<double>& lo,
            const std::vector<double>& hi) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!lo.empty() && x[i] < lo[i]) return false;
    if (!hi.empty() && x[i] > hi[i]) return false;
  }
  return true;
}

void clamp_box(std::vector<double>& x, const std::vector<double>& lo,
               const std::vector<double>& hi) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!lo.empty() && x[i] < lo[i]) x[i] = lo[i];
    if (!hi.empty() && x[i] > hi[i]) x[i] = hi[i];
  }
}

}  // namespace

CmaResult cma_es_minimize(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& x0, const CmaOptions& options) {
  const int n = static_cast<int>(x0.size());
  if (n < 1) throw config_error("DimensionTooSmall", "need at least one dimension");
  if (!options.lower.empty() && options.lower.size() != x0.size())
    throw config_error("BoundShapeMismatch", "lower bound dimension differs from x0");
  if (!options.upper.empty() && options.upper.size() != x0.size())
    throw config_error("BoundShapeMismatch", "upper bound dimension differs from x0");
  if (options.sigma0 <= 0.0) throw config_error("InvalidBudget", "sigma0 must be > 0");
  if (options.max_generations < 1)
    throw config_error("InvalidBudget", "max_generations must be >= 1");

  const int lambda = options.population > 0
                         ? options.population
                         : 4 + static_cast<int>(std::floor(3.0 * std::log(n)));
  if (lambda < 4) throw config_error("InvalidBudget", "population must be >= 4");
  const int mu = lambda / 2;

  // Log-rank recombination weights and the usual dimension-dependent rates.
  std::vector<double> weights(mu);
  for (int i = 0; i < mu; ++i)
    weights[i] = std::log(mu + 0.5) - std::log(static_cast<double>(i + 1));
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= wsum;
  const double mueff =
      1.0 / std::accumulate(weights.begin(), weights.end(), 0.0,
                            [](double acc, double w) { return acc + w * w; });

  const double nd = static_cast<double>(n);
  const double c_sigma = (mueff + 2.0) / (nd + mueff + 5.0);
  const double d_sigma =
      1.0 + 2.0 * std::max(0.0, std::sqrt((mueff - 1.0) / (nd + 1.0)) - 1.0) + c_sigma;
  const double cc = (4.0 + mueff / nd) / (nd + 4.0 + 2.0 * mueff / nd);
  const double c1 = 2.0 / ((nd + 1.3) * (nd + 1.3) + mueff);
  const double cmu = std::min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) /
                                            ((nd + 2.0) * (nd + 2.0) + mueff));
  const double chi_n = std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));

  Rng rng(options.seed);
  Eigen::VectorXd mean = Eigen::Map<const Eigen::VectorXd>(x0.data(), n);
  double sigma = options.sigma0;
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd p_sigma = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd p_c = Eigen::VectorXd::Zero(n);

  CmaResult result;
  result.best_x = x0;
  result.best_f = f(x0);
  result.evaluations = 1;

  struct Candidate {
    Eigen::VectorXd x;
    Eigen::VectorXd y;  // (x - mean) / sigma, after any clamping
    double fval = 0.0;
  };
  std::vector<Candidate> pop(lambda);

  for (int gen = 0; gen < options.max_generations; ++gen) {
    if (options.tol_f > 0.0 && result.best_f <= options.tol_f) break;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    Eigen::VectorXd evals = eig.eigenvalues().cwiseMax(1e-20);
    const Eigen::MatrixXd& B = eig.eigenvectors();
    const Eigen::VectorXd D = evals.cwiseSqrt();
    const Eigen::MatrixXd BD = B * D.asDiagonal();
    const Eigen::MatrixXd C_inv_sqrt = B * D.cwiseInverse().asDiagonal() * B.transpose();

    for (int k = 0; k < lambda; ++k) {
      std::vector<double> xk(n);
      for (int attempt = 0;; ++attempt) {
        Eigen::VectorXd z(n);
        for (int i = 0; i < n; ++i) z[i] = rng.normal();
        Eigen::VectorXd x = mean + sigma * (BD * z);
        Eigen::Map<Eigen::VectorXd>(xk.data(), n) = x;
        if (in_box(xk, options.lower, options.upper)) break;
        if (attempt >= options.resample_cap) {
          clamp_box(xk, options.lower, options.upper);
          break;
        }
      }
      pop[k].x = Eigen::Map<const Eigen::VectorXd>(xk.data(), n);
      pop[k].y = (pop[k].x - mean) / sigma;
      pop[k].fval = f(xk);
      ++result.evaluations;
      if (pop[k].fval < result.best_f) {
        result.best_f = pop[k].fval;
        result.best_x = xk;
      }
    }

    std::vector<int> order(lambda);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&pop](int a, int b) { return pop[a].fval < pop[b].fval; });

    Eigen::VectorXd y_w = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < mu; ++i) y_w += weights[i] * pop[order[i]].y;
    mean += sigma * y_w;

    p_sigma = (1.0 - c_sigma) * p_sigma +
              std::sqrt(c_sigma * (2.0 - c_sigma) * mueff) * (C_inv_sqrt * y_w);
    const double ps_norm = p_sigma.norm();
    const double denom = std::sqrt(1.0 - std::pow(1.0 - c_sigma, 2.0 * (gen + 1)));
    const bool h_sigma = ps_norm / denom / chi_n < 1.4 + 2.0 / (nd + 1.0);

    p_c = (1.0 - cc) * p_c;
    if (h_sigma) p_c += std::sqrt(cc * (2.0 - cc) * mueff) * y_w;

    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < mu; ++i)
      rank_mu += weights[i] * (pop[order[i]].y * pop[order[i]].y.transpose());

    const double h_corr = h_sigma ? 0.0 : cc * (2.0 - cc);
    C = (1.0 - c1 - cmu) * C + c1 * (p_c * p_c.transpose() + h_corr * C) + cmu * rank_mu;
    C = 0.5 * (C + C.transpose().eval());  // keep exactly symmetric

    sigma *= std::exp((c_sigma / d_sigma) * (ps_norm / chi_n - 1.0));
    result.generations_run = gen + 1;
  }

  return result;
}

}  // namespace gridweave
