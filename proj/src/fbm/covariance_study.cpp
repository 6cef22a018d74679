#include "skewfbm/fbm/covariance_study.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "skewfbm/fbm/kernel.hpp"
#include "skewfbm/mc/parallel.hpp"

namespace skewfbm::fbm {

std::vector<std::pair<double, double>> default_covariance_checkpoints() {
  return {{0.1, 0.1}, {0.25, 0.25}, {0.5, 0.5}, {0.75, 0.75}, {1.0, 1.0},
          {0.5, 0.1}, {0.75, 0.25}, {1.0, 0.5}, {0.9, 0.3}, {1.0, 0.75}};
}

CovarianceStudy fbm_covariance_study(const FbmSpec& spec, const mc::McConfig& mc,
                                     std::vector<std::pair<double, double>> checkpoints) {
  spec.validate();
  if (mc.paths == 0) throw std::invalid_argument("empty study");
  if (mc.paths < 2) throw std::invalid_argument("covariance study needs at least two paths");
  if (checkpoints.empty()) checkpoints = default_covariance_checkpoints();

  const auto grid = spec.grid();
  const double n = static_cast<double>(spec.n);
  std::vector<std::size_t> nodes;
  CovarianceStudy study;
  for (auto [ft, fs] : checkpoints) {
    if (!(ft > 0.0 && ft <= 1.0 && fs > 0.0 && fs <= 1.0)) throw std::invalid_argument("checkpoint fractions must lie in (0, 1]");
    CovarianceCheckpoint row;
    row.i = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(ft * n)));
    row.j = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fs * n)));
    row.t = grid[row.i];
    row.s = grid[row.j];
    row.exact = covariance(spec.H, row.t, row.s);
    study.rows.push_back(row);
    nodes.push_back(row.i);
    nodes.push_back(row.j);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  auto slot = [&](std::size_t node) {
    return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), node) - nodes.begin());
  };

  const auto volterra = VolterraSampler::shared(spec.H, spec.T, spec.n);
  const auto cholesky = CholeskySampler::shared(spec.H, spec.T, spec.n);
  const Eigen::MatrixXd implied = volterra->implied_covariance();
  const std::size_t d = spec.d;
  const std::size_t k = nodes.size();

  // Per path: values at the checkpoint nodes, volterra block then cholesky block.
  auto samples = mc::parallel_map(mc.paths, mc.workers, [&](std::size_t p) {
    const auto v = volterra->sample(mc.substream(mc::tags::fbm_paths, p), d);
    const auto c = cholesky->sample(mc.substream(mc::tags::cholesky_oracle, p), d);
    std::vector<double> out(2 * k * d);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t comp = 0; comp < d; ++comp) {
        out[a * d + comp] = v.values(nodes[a], comp);
        out[k * d + a * d + comp] = c.values(nodes[a], comp);
      }
    return out;
  });

  const std::size_t pooled = mc.paths * d;
  std::vector<double> x(pooled), y(pooled);
  auto pooled_cov = [&](std::size_t offset, std::size_t a, std::size_t b) {
    for (std::size_t p = 0; p < mc.paths; ++p)
      for (std::size_t comp = 0; comp < d; ++comp) {
        x[p * d + comp] = samples[p][offset + a * d + comp];
        y[p * d + comp] = samples[p][offset + b * d + comp];
      }
    return mc::covariance_estimate(x, y);
  };

  study.passed = true;
  for (auto& row : study.rows) {
    const std::size_t a = slot(row.i), b = slot(row.j);
    row.implied = implied(row.i - 1, row.j - 1);
    row.volterra = pooled_cov(0, a, b);
    row.cholesky = pooled_cov(k * d, a, b);
    row.z_exact = (row.volterra.mean - row.exact) / row.volterra.std_error;
    row.z_methods = (row.volterra.mean - row.cholesky.mean) / std::hypot(row.volterra.std_error, row.cholesky.std_error);
    row.within = std::abs(row.z_exact) <= 3.0 && std::abs(row.z_methods) <= 3.0;
    study.max_abs_z = std::max({study.max_abs_z, std::abs(row.z_exact), std::abs(row.z_methods)});
    study.passed = study.passed && row.within;
  }
  return study;
}

}  // namespace skewfbm::fbm
