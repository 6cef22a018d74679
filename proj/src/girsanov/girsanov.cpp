#include "skewfbm/girsanov/girsanov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

#include "skewfbm/fbm/kernel.hpp"
#include "skewfbm/frac/fractional.hpp"
#include "skewfbm/mc/parallel.hpp"

namespace skewfbm::girsanov {

double inverse_normalisation(double H) { return 1.0 / (fbm::kernel_constant(H) * std::tgamma(H + 0.5)); }

GridFunction kh_inverse_of_integral(double H, const GridFunction& u) {
  fbm::require_hurst(H);
  require_finite(u, "kh_inverse");
  const auto& g = u.grid;
  if (g.front() != 0.0) throw std::invalid_argument("kh_inverse: grid must start at 0");
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) w[i] = g[i] == 0.0 ? 0.0 : std::pow(g[i], 0.5 - H) * u.values[i];
  const double a = 0.5 - H;
  const auto I = frac::rl_integral_left(GridFunction(g, std::move(w)), frac::FracOrder(a));
  const double c = inverse_normalisation(H);
  // The product rule interpolates s^{1/2-H} u(s) linearly on [0, t_1]; swap
  // that piece for u(t_1) s^{1/2-H} integrated exactly against (t - s)^{a-1}.
  const double t1 = g[1];
  const double u1 = u.values[1];
  std::vector<double> out(g.size());
  out[0] = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 1; i < g.size(); ++i) {
    const double t = g[i];
    const double x = std::min(t1 / t, 1.0);
    const double exact = std::pow(t, 2.0 * a) * boost::math::beta(a + 1.0, a, x);
    const double linear = std::pow(t1, a - 1.0) * std::pow(t, a + 1.0) * boost::math::beta(2.0, a, x);
    const double fix = u1 * (exact - linear) / std::tgamma(a);
    out[i] = c * std::pow(t, H - 0.5) * (I.values[i] + fix);
  }
  return GridFunction(g, std::move(out));
}

std::vector<GridFunction> drift_functional(const fbm::PathMatrix& path, const lt::MollifierSpec& spec, double alpha) {
  spec.validate();
  if (spec.dim() != path.dim()) throw std::invalid_argument("mollifier dimension does not match the path");
  std::vector<double> u(path.nodes()), y(path.dim());
  for (std::size_t i = 0; i < path.nodes(); ++i) {
    for (std::size_t c = 0; c < y.size(); ++c) y[c] = path.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    u[i] = alpha * lt::mollifier_eval(spec, y);
  }
  return std::vector<GridFunction>(path.dim(), GridFunction(path.grid, std::move(u)));
}

std::vector<GridFunction> kh_inverse_of_running_integral(double H, const fbm::PathMatrix& path,
                                                         const lt::MollifierSpec& spec, double alpha) {
  const auto u = drift_functional(path, spec, alpha);
  return std::vector<GridFunction>(u.size(), kh_inverse_of_integral(H, u.front()));
}

DensitySample doleans_exponential(std::span<const GridFunction> theta, const Eigen::MatrixXd& dW) {
  if (theta.size() != static_cast<std::size_t>(dW.cols())) throw std::invalid_argument("density: component count mismatch");
  DensitySample out;
  for (std::size_t c = 0; c < theta.size(); ++c) {
    const auto& th = theta[c];
    const std::size_t n = th.grid.steps();
    if (static_cast<std::size_t>(dW.rows()) != n) throw std::invalid_argument("density: driver length does not match the grid");
    auto at = [&](std::size_t i) { return i == 0 ? 0.0 : th.values[i]; };
    for (std::size_t i = 0; i < n; ++i) {
      out.stochastic_integral += at(i) * dW(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      const double a = at(i), b = at(i + 1);
      out.quadratic_term += 0.5 * (th.grid[i + 1] - th.grid[i]) * (a * a + b * b);
    }
  }
  out.log_xi = -out.stochastic_integral - 0.5 * out.quadratic_term;
  out.xi = std::exp(out.log_xi);
  return out;
}

DensitySample doleans_exponential(double H, const fbm::PathMatrix& path, const lt::MollifierSpec& spec,
                                  const fbm::BrownianDriver& driver, double alpha) {
  if (!path.driver) throw std::invalid_argument("path carries no Brownian driver (use the volterra sampler)");
  if (driver.fingerprint() != path.driver_fingerprint)
    throw std::invalid_argument("Brownian driver does not belong to this path");
  if (alpha == 0.0) return {};
  const auto theta = kh_inverse_of_running_integral(H, path, spec, alpha);
  return doleans_exponential(theta, driver.dW);
}

bool in_exponential_moment_regime(double H, std::size_t d) { return H < 1.0 / (2.0 * (1.0 + static_cast<double>(d))); }

namespace {

double trapezoid_sq(const GridFunction& th) {
  double q = 0.0;
  for (std::size_t i = 0; i + 1 < th.size(); ++i) {
    const double a = i == 0 ? 0.0 : th.values[i];
    const double b = th.values[i + 1];
    q += 0.5 * (th.grid[i + 1] - th.grid[i]) * (a * a + b * b);
  }
  return q;
}

}  // namespace

ExpMomentTable exponential_moment_estimate(const fbm::FbmSpec& fbm, std::span<const double> ladder, double mu,
                                           const mc::McConfig& mc, std::vector<double> center) {
  fbm.validate();
  if (ladder.empty()) throw std::invalid_argument("epsilon ladder is empty");
  if (mc.paths == 0) throw std::invalid_argument("empty study");
  if (center.empty()) center.assign(fbm.d, 0.0);
  const std::size_t K = ladder.size();
  // per path: int |theta|^2 for each rung (theta per component, components equal)
  const auto q = mc::parallel_map(mc.paths, mc.workers, [&](std::size_t p) {
    const auto B = fbm::simulate_fbm(fbm, mc.substream(mc::tags::girsanov, p), fbm::SamplerMethod::volterra);
    std::vector<double> r(K);
    for (std::size_t k = 0; k < K; ++k) {
      const auto th = kh_inverse_of_running_integral(fbm.H, B, {ladder[k], center});
      r[k] = static_cast<double>(fbm.d) * trapezoid_sq(th.front());
    }
    return r;
  });
  ExpMomentTable tab;
  tab.mu = mu;
  tab.outside_regime = !in_exponential_moment_regime(fbm.H, fbm.d);
  const double N = static_cast<double>(mc.paths);
  std::vector<double> w(mc.paths);
  for (std::size_t k = 0; k < K; ++k) {
    double top = -INFINITY;
    for (std::size_t p = 0; p < mc.paths; ++p) top = std::max(top, mu * q[p][k]);
    for (std::size_t p = 0; p < mc.paths; ++p) w[p] = std::exp(mu * q[p][k] - top);
    const auto e = mc::estimate(w);
    ExpMomentRow row;
    row.epsilon = ladder[k];
    row.log_estimate = top + std::log(e.mean);
    row.estimate = std::exp(row.log_estimate);
    row.std_error = std::exp(top) * e.std_error;
    row.ess = mc::kish_ess(w);
    row.heavy_tail = row.ess < 0.1 * N;
    tab.sup_estimate = std::max(tab.sup_estimate, row.estimate);
    tab.rows.push_back(row);
  }
  return tab;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "inconclusive";
  }
}

MeasureChangeReport measure_change_covariance_test(const fbm::FbmSpec& fbm, const lt::MollifierSpec& spec, double alpha,
                                                   const mc::McConfig& mc,
                                                   std::vector<std::pair<double, double>> checkpoints) {
  fbm.validate();
  spec.validate();
  if (spec.dim() != fbm.d) throw std::invalid_argument("mollifier dimension does not match d");
  if (mc.paths == 0) throw std::invalid_argument("empty study");
  const double T = fbm.T;
  if (checkpoints.empty()) checkpoints = {{0.25 * T, 0.25 * T}, {0.5 * T, 0.5 * T}, {T, T}, {0.25 * T, 0.75 * T}, {0.5 * T, T}};
  const auto grid = fbm.grid();
  auto node_of = [&](double t) {
    const double pos = t / fbm.step();
    const auto i = static_cast<std::size_t>(std::llround(pos));
    if (std::abs(pos - static_cast<double>(i)) > 1e-9 || i == 0 || i > fbm.n)
      throw std::invalid_argument("checkpoint is not an interior grid node");
    return i;
  };
  std::vector<std::size_t> nodes;
  for (auto [t, s] : checkpoints) {
    nodes.push_back(node_of(t));
    nodes.push_back(node_of(s));
  }
  struct PerPath {
    double xi;
    std::vector<double> y;  // Y at the checkpoint nodes, in order
  };
  const auto per = mc::parallel_map(mc.paths, mc.workers, [&](std::size_t p) {
    const auto B = fbm::simulate_fbm(fbm, mc.substream(mc::tags::girsanov, p), fbm::SamplerMethod::volterra);
    const auto dens = doleans_exponential(fbm.H, B, spec, *B.driver, alpha);
    // Y = B + alpha int_0^t phi_eps(B_s - x) ds on the first component, trapezoid
    const auto u = drift_functional(B, spec, alpha).front();
    std::vector<double> drift(B.nodes(), 0.0);
    for (std::size_t i = 1; i < B.nodes(); ++i) drift[i] = drift[i - 1] + 0.5 * (grid[i] - grid[i - 1]) * (u.values[i - 1] + u.values[i]);
    PerPath r{dens.xi, {}};
    for (std::size_t i : nodes) r.y.push_back(B.values(static_cast<Eigen::Index>(i), 0) + drift[i]);
    return r;
  });
  MeasureChangeReport rep;
  rep.alpha = alpha;
  rep.epsilon = spec.epsilon;
  std::vector<double> w(mc.paths), f(mc.paths);
  for (std::size_t p = 0; p < mc.paths; ++p) w[p] = per[p].xi;
  rep.xi_mean = mc::estimate(w);
  rep.ess = mc::kish_ess(w);
  rep.ess_fraction = rep.ess / static_cast<double>(mc.paths);
  bool all = true;
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    for (std::size_t p = 0; p < mc.paths; ++p) f[p] = per[p].y[2 * k] * per[p].y[2 * k + 1];
    CovarianceRow row;
    row.t = checkpoints[k].first;
    row.s = checkpoints[k].second;
    row.target = fbm::covariance(fbm.H, row.t, row.s);
    row.weighted = mc::weighted_estimate(f, w);
    row.unweighted = mc::estimate(f);
    row.within = std::abs(row.weighted.mean - row.target) <= 3.0 * row.weighted.std_error;
    all = all && row.within;
    rep.covariance.push_back(row);
  }
  std::vector<std::size_t> seen;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (std::find(seen.begin(), seen.end(), nodes[k]) != seen.end()) continue;
    seen.push_back(nodes[k]);
    for (std::size_t p = 0; p < mc.paths; ++p) f[p] = per[p].y[k];
    MeanRow row;
    row.t = grid[nodes[k]];
    row.weighted = mc::weighted_estimate(f, w);
    row.within = std::abs(row.weighted.mean) <= 3.0 * row.weighted.std_error;
    all = all && row.within;
    rep.mean.push_back(row);
  }
  if (rep.ess_fraction < 0.05) {
    rep.verdict = Verdict::inconclusive;
    rep.reason = "effective sample size below 5% of N";
  } else {
    rep.verdict = all ? Verdict::pass : Verdict::fail;
    rep.reason = all ? "all checkpoints within 3 weighted standard errors" : "checkpoint outside 3 weighted standard errors";
  }
  return rep;
}

}  // namespace skewfbm::girsanov

namespace skewfbm::girsanov {

MeanOneReport mean_one_test(const fbm::FbmSpec& fbm, const lt::MollifierSpec& spec, double alpha, const mc::McConfig& mc) {
  fbm.validate();
  spec.validate();
  if (spec.dim() != fbm.d) throw std::invalid_argument("mollifier dimension does not match d");
  if (mc.paths == 0) throw std::invalid_argument("empty study");
  const auto xi = mc::parallel_map(mc.paths, mc.workers, [&](std::size_t p) {
    const auto B = fbm::simulate_fbm(fbm, mc.substream(mc::tags::girsanov, p), fbm::SamplerMethod::volterra);
    return doleans_exponential(fbm.H, B, spec, *B.driver, alpha).xi;
  });
  MeanOneReport rep;
  rep.alpha = alpha;
  rep.epsilon = spec.epsilon;
  rep.xi = mc::estimate(xi);
  rep.xi.ess = mc::kish_ess(xi);
  rep.min_xi = *std::min_element(xi.begin(), xi.end());
  rep.max_xi = *std::max_element(xi.begin(), xi.end());
  rep.all_exactly_one = rep.min_xi == 1.0 && rep.max_xi == 1.0;
  const double dev = rep.xi.mean - 1.0;
  rep.z = rep.xi.std_error > 0.0 ? dev / rep.xi.std_error : 0.0;
  rep.within = std::abs(dev) <= 3.0 * rep.xi.std_error;
  return rep;
}

}  // namespace skewfbm::girsanov
