#include "skewfbm/sde/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "skewfbm/core/numerics.hpp"
#include "skewfbm/fbm/kernel.hpp"
#include "skewfbm/mc/parallel.hpp"

namespace skewfbm::sde {

namespace {

// int_lo^hi K_H(u, theta) du for theta <= lo < hi. With v = (u - theta)^p,
// p = H + 1/2, the leading singular factor cancels against the Jacobian.
template <std::size_t N>
double kernel_cell_integral(double H, double theta, double lo_off, double hi_off) {
  const auto& g = numerics::UnitGauss<N>::get();
  const double p = H + 0.5;
  const double a = std::pow(lo_off, p);
  const double b = std::pow(hi_off, p);
  double acc = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const double v = a + (b - a) * g.x[k];
    const double off = std::pow(v, 1.0 / p);
    acc += g.w[k] * fbm::kernel_K(H, theta + off, theta, off) * std::pow(v, 1.0 / p - 1.0);
  }
  return acc * (b - a) / p;
}

// Row vector r of D = K I + 1 r^T at the terminal node, given the drift
// gradients g_j = alpha grad phi_eps(X_j) stacked row-wise.
void terminal_rank_one(const KernelProfile& prof, const TimeGrid& grid, const Eigen::MatrixXd& g,
                       Eigen::Ref<Eigen::VectorXd> r) {
  r.setZero();
  for (std::size_t k = 0; k < prof.cell_integral.size(); ++k) {
    const std::size_t j = prof.first_cell + k;
    const auto gj = g.row(static_cast<Eigen::Index>(j));
    const double h = grid[j + 1] - grid[j];
    r += prof.cell_integral[k] * gj.transpose() + (h * gj.sum()) * r;
  }
}

Eigen::MatrixXd drift_gradients(const SdeSpec& spec, const fbm::PathMatrix& X) {
  Eigen::MatrixXd g(X.values.rows(), X.values.cols());
  std::vector<double> x(X.dim());
  for (Eigen::Index i = 0; i < X.values.rows(); ++i) {
    for (std::size_t c = 0; c < x.size(); ++c) x[c] = X.values(i, static_cast<Eigen::Index>(c));
    g.row(i) = spec.alpha * mollifier_gradient(spec.epsilon, x).transpose();
  }
  return g;
}

void check_solution(const SdeSpec& spec, const fbm::PathMatrix& X) {
  spec.validate();
  if (!(X.grid == spec.fbm.grid())) throw std::invalid_argument("solution grid does not match the SDE spec");
  if (X.dim() != spec.fbm.d) throw std::invalid_argument("solution dimension does not match the SDE spec");
}

}  // namespace

Eigen::VectorXd mollifier_gradient(double epsilon, std::span<const double> x) {
  const double d = static_cast<double>(x.size());
  double xx = 0.0;
  for (double v : x) xx += v * v;
  const double phi = std::pow(2.0 * std::numbers::pi * epsilon, -0.5 * d) * std::exp(-0.5 * xx / epsilon);
  Eigen::VectorXd g(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) g(static_cast<Eigen::Index>(c)) = -phi * x[c] / epsilon;
  return g;
}

Eigen::MatrixXd drift_jacobian(const SdeSpec& spec, std::span<const double> x) {
  const Eigen::VectorXd g = spec.alpha * mollifier_gradient(spec.epsilon, x);
  return Eigen::VectorXd::Ones(static_cast<Eigen::Index>(x.size())) * g.transpose();
}

KernelProfile kernel_profile(double H, const TimeGrid& grid, double theta, double to_end) {
  fbm::require_hurst(H);
  const double T = grid.back();
  if (!(theta > grid.front() && theta > 0.0 && theta < T)) throw std::invalid_argument("differentiation time must lie in (0, T)");
  const auto nodes = grid.nodes();
  const std::size_t j0 = static_cast<std::size_t>(std::upper_bound(nodes.begin(), nodes.end(), theta) - nodes.begin()) - 1;
  const std::size_t n = grid.steps();
  KernelProfile prof;
  prof.theta = theta;
  prof.first_cell = j0;
  prof.cell_integral.reserve(n - j0);
  prof.node_kernel.reserve(n - j0);
  for (std::size_t j = j0; j < n; ++j) {
    const double lo_off = j == j0 ? 0.0 : grid[j] - theta;
    double hi_off = grid[j + 1] - theta;
    if (j + 1 == n && to_end > 0.0) hi_off = to_end;
    // the two cells nearest theta carry the singular behaviour
    prof.cell_integral.push_back(j < j0 + 2 ? kernel_cell_integral<12>(H, theta, lo_off, hi_off)
                                            : kernel_cell_integral<4>(H, theta, lo_off, hi_off));
    prof.node_kernel.push_back(fbm::kernel_K(H, grid[j + 1], theta, hi_off));
  }
  return prof;
}

MalliavinPath solve_malliavin(const SdeSpec& spec, const fbm::PathMatrix& X, double s, double kernel_scale) {
  check_solution(spec, X);
  const auto& grid = X.grid;
  const std::size_t n = grid.steps();
  const double tol = 1e-12 * grid.back();
  const auto nodes = grid.nodes();
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), s - tol);
  if (it == nodes.end() || std::abs(*it - s) > tol) throw std::invalid_argument("differentiation time is not a grid node");
  const std::size_t i = static_cast<std::size_t>(it - nodes.begin());
  if (i == 0 || i >= n) throw std::invalid_argument("differentiation time must be an interior grid node");

  const auto prof = kernel_profile(spec.fbm.H, grid, grid[i]);
  const auto d = static_cast<Eigen::Index>(spec.fbm.d);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  MalliavinPath out;
  out.s = grid[i];
  out.s_index = i;
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(d, d);
  std::vector<double> x(spec.fbm.d);
  for (std::size_t k = 0; k < prof.cell_integral.size(); ++k) {
    const std::size_t j = i + k;
    for (std::size_t c = 0; c < x.size(); ++c) x[c] = X.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
    const Eigen::MatrixXd J = drift_jacobian(spec, x);
    R += J * (kernel_scale * prof.cell_integral[k] * I + (grid[j + 1] - grid[j]) * R);
    out.times.push_back(grid[j + 1]);
    out.values.push_back(kernel_scale * prof.node_kernel[k] * I + R);
  }
  return out;
}

Eigen::MatrixXd terminal_malliavin(const SdeSpec& spec, const fbm::PathMatrix& X, const KernelProfile& profile) {
  check_solution(spec, X);
  if (profile.cell_integral.size() != X.grid.steps() - profile.first_cell)
    throw std::invalid_argument("kernel profile does not match the solution grid");
  const auto d = static_cast<Eigen::Index>(spec.fbm.d);
  Eigen::VectorXd r(d);
  terminal_rank_one(profile, X.grid, drift_gradients(spec, X), r);
  return profile.node_kernel.back() * Eigen::MatrixXd::Identity(d, d) + Eigen::VectorXd::Ones(d) * r.transpose();
}

ThetaRule theta_rule(double T, double H, std::size_t cells, std::size_t order) {
  fbm::require_hurst(H);
  if (cells < 2) throw std::invalid_argument("theta rule needs at least 2 cells");
  if (order != 8) throw std::invalid_argument("theta rule supports order 8 only");
  const auto& g = numerics::UnitGauss<8>::get();
  const double D = T / static_cast<double>(cells);
  const double q = 1.0 / (2.0 * H);
  ThetaRule rule;
  rule.band = D;
  for (std::size_t c = 0; c < cells; ++c) {
    const double lo = D * static_cast<double>(c);
    for (std::size_t k = 0; k < 8; ++k) {
      double th, w, te;
      if (c == 0) {
        th = D * std::pow(g.x[k], q);
        w = D * g.w[k] * q * std::pow(g.x[k], q - 1.0);
        te = T - th;
      } else if (c + 1 == cells) {
        te = D * std::pow(g.x[k], q);
        th = T - te;
        w = D * g.w[k] * q * std::pow(g.x[k], q - 1.0);
      } else {
        th = lo + D * g.x[k];
        w = D * g.w[k];
        te = T - th;
      }
      rule.theta.push_back(th);
      rule.weight.push_back(w);
      rule.cell.push_back(c);
      rule.to_end.push_back(te);
    }
  }
  return rule;
}

namespace {

// W_p W_q / |theta_p - theta_q|^{1+2 beta} for pairs in distinct cells, q < p
Eigen::MatrixXd pair_weights(const ThetaRule& rule, double beta) {
  const auto m = static_cast<Eigen::Index>(rule.theta.size());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index p = 0; p < m; ++p)
    for (Eigen::Index q = 0; q < p; ++q) {
      if (rule.cell[static_cast<std::size_t>(p)] == rule.cell[static_cast<std::size_t>(q)]) continue;
      const double dist = std::abs(rule.theta[static_cast<std::size_t>(p)] - rule.theta[static_cast<std::size_t>(q)]);
      P(p, q) = rule.weight[static_cast<std::size_t>(p)] * rule.weight[static_cast<std::size_t>(q)] * std::pow(dist, -1.0 - 2.0 * beta);
    }
  return P;
}

void require_beta(double beta) {
  if (!(beta > 0.0 && beta < 0.5)) throw std::invalid_argument("beta must lie in (0, 1/2)");
}

}  // namespace

double kernel_band_integral(double H, double T, std::size_t d, double beta, const ThetaRule& rule) {
  require_beta(beta);
  const Eigen::MatrixXd P = pair_weights(rule, beta);
  std::vector<double> k(rule.theta.size());
  for (std::size_t p = 0; p < k.size(); ++p) k[p] = fbm::kernel_K(H, T, rule.theta[p], rule.to_end[p]);
  double acc = 0.0;
  for (Eigen::Index p = 0; p < P.rows(); ++p)
    for (Eigen::Index q = 0; q < p; ++q) {
      const double v = k[static_cast<std::size_t>(p)] - k[static_cast<std::size_t>(q)];
      acc += P(p, q) * v * v;
    }
  return 2.0 * static_cast<double>(d) * acc;
}

CompactnessReport compactness_diagnostic(const SdeSpec& base, std::span<const double> ladder, const mc::McConfig& mc,
                                         double beta, std::size_t cells, fbm::SamplerMethod method) {
  require_beta(beta);
  base.validate();
  if (ladder.empty()) throw std::invalid_argument("epsilon ladder is empty");
  if (mc.paths == 0) throw std::invalid_argument("empty study");
  const double H = base.fbm.H;
  const double T = base.fbm.T;
  const std::size_t d = base.fbm.d;
  const auto grid = base.fbm.grid();
  const ThetaRule rule = theta_rule(T, H, cells);
  const std::size_t m = rule.theta.size();
  const auto profiles = mc::parallel_map(m, mc.workers, [&](std::size_t p) {
    return kernel_profile(H, grid, rule.theta[p], rule.to_end[p]);
  });
  const Eigen::MatrixXd P = pair_weights(rule, beta);
  const std::size_t K = ladder.size();
  const double dd = static_cast<double>(d);

  // per path: [double integral, l2] for each epsilon
  auto per_path = mc::parallel_map(mc.paths, mc.workers, [&](std::size_t path) {
    const auto B = fbm::simulate_fbm(base.fbm, mc.substream(mc::tags::compactness, path), method);
    std::vector<double> res(2 * K);
    Eigen::VectorXd a(static_cast<Eigen::Index>(m));
    Eigen::MatrixXd r(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m));
    for (std::size_t e = 0; e < K; ++e) {
      SdeSpec s = base;
      s.epsilon = ladder[e];
      const auto X = solve_mollified(s, B);
      const Eigen::MatrixXd g = drift_gradients(s, X);
      for (std::size_t p = 0; p < m; ++p) {
        a(static_cast<Eigen::Index>(p)) = profiles[p].node_kernel.back();
        terminal_rank_one(profiles[p], grid, g, r.col(static_cast<Eigen::Index>(p)));
      }
      // |a I + 1 w^T|_F^2 = d a^2 + 2 a sum(w) + d |w|^2
      auto frob = [&](double av, const Eigen::VectorXd& w) { return dd * av * av + 2.0 * av * w.sum() + dd * w.squaredNorm(); };
      double di = 0.0, l2 = 0.0;
      for (Eigen::Index p = 0; p < static_cast<Eigen::Index>(m); ++p) {
        l2 += rule.weight[static_cast<std::size_t>(p)] * frob(a(p), r.col(p));
        for (Eigen::Index q = 0; q < p; ++q)
          if (P(p, q) != 0.0) di += P(p, q) * frob(a(p) - a(q), r.col(p) - r.col(q));
      }
      res[2 * e] = 2.0 * di;
      res[2 * e + 1] = l2;
    }
    return res;
  });

  CompactnessReport rep;
  rep.beta = beta;
  rep.cells = cells;
  rep.band = rule.band;
  rep.outside_proven_regime = !base.in_proven_regime();
  rep.deterministic_reference = kernel_band_integral(H, T, d, beta, rule);
  std::vector<double> buf(mc.paths), buf2(mc.paths);
  double lo = INFINITY, hi = 0.0;
  for (std::size_t e = 0; e < K; ++e) {
    for (std::size_t p = 0; p < mc.paths; ++p) {
      buf[p] = per_path[p][2 * e];
      buf2[p] = per_path[p][2 * e + 1];
    }
    CompactnessRow row{ladder[e], mc::estimate(buf), mc::estimate(buf2)};
    lo = std::min(lo, row.double_integral.mean);
    hi = std::max(hi, row.double_integral.mean);
    rep.rows.push_back(row);
  }
  rep.max_over_min = hi / lo;
  return rep;
}

}  // namespace skewfbm::sde
