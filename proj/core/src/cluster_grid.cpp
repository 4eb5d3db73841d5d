#include "ramsr/cluster_grid.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ramsr {

double ClusterGrid::total_multiplicity() const {
  double total = 0.0;
  for (const auto& c : clusters) total += c.multiplicity;
  return total;
}

double ClusterGrid::mean_squared_coupling(double g_ref) const {
  double num = 0.0;
  double den = 0.0;
  for (const auto& c : clusters) {
    num += c.multiplicity * (c.g / g_ref) * (c.g / g_ref);
    den += c.multiplicity;
  }
  return num / den;
}

QuadratureRule gauss_hermite_normal(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite_normal: n must be >= 1");
  QuadratureRule rule;
  if (n == 1) {
    rule.nodes = {0.0};
    rule.weights = {1.0};
    return rule;
  }
  // Jacobi matrix of the probabilists' Hermite polynomials: off-diagonal sqrt(k).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  const auto& vals = solver.eigenvalues();
  const auto& vecs = solver.eigenvectors();
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = vals(k);
    rule.weights[k] = vecs(0, k) * vecs(0, k);
  }
  // Symmetrize: the exact rule is symmetric about zero.
  for (int k = 0; k < n / 2; ++k) {
    const int m = n - 1 - k;
    const double x = 0.5 * (rule.nodes[m] - rule.nodes[k]);
    const double w = 0.5 * (rule.weights[m] + rule.weights[k]);
    rule.nodes[k] = -x;
    rule.nodes[m] = x;
    rule.weights[k] = w;
    rule.weights[m] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  double sum = 0.0;
  for (double w : rule.weights) sum += w;
  for (double& w : rule.weights) w /= sum;
  return rule;
}

ClusterGrid build_cluster_grid(const PhysicalParams& params, int n_phase, int n_doppler) {
  if (n_phase < 1) throw std::invalid_argument("build_cluster_grid: n_phase must be >= 1");
  if (n_doppler < 1) throw std::invalid_argument("build_cluster_grid: n_doppler must be >= 1");
  if (!(params.doppler_sigma >= 0.0)) {
    throw std::invalid_argument("build_cluster_grid: doppler_sigma must be >= 0");
  }
  params.validate();

  ClusterGrid grid;
  grid.n_phase = n_phase;
  grid.n_doppler = n_doppler;
  if (params.doppler_sigma == 0.0 && n_doppler > 1) {
    grid.warnings.push_back("doppler_sigma = 0: Doppler axis collapsed to a single node");
    grid.n_doppler = 1;
  }

  std::vector<double> couplings(n_phase);
  if (n_phase == 1) {
    grid.warnings.push_back(
        "degenerate single-phase grid: midpoint coupling cos(pi/2) = 0 replaced by the RMS "
        "coupling g_max/sqrt(2)");
    couplings[0] = params.g_eff() / std::numbers::sqrt2;
  } else {
    for (int i = 0; i < n_phase; ++i) {
      const double phi = (i + 0.5) * std::numbers::pi / n_phase;
      couplings[i] = params.g_eff() * std::cos(phi);
    }
  }

  const QuadratureRule rule = gauss_hermite_normal(grid.n_doppler);
  const double per_phase = params.n_atoms / n_phase;
  grid.clusters.reserve(static_cast<std::size_t>(n_phase) * grid.n_doppler);
  for (int i = 0; i < n_phase; ++i) {
    for (int k = 0; k < grid.n_doppler; ++k) {
      grid.clusters.push_back(Cluster{couplings[i], params.doppler_sigma * rule.nodes[k],
                                      per_phase * rule.weights[k]});
    }
  }
  return grid;
}

}  // namespace ramsr
