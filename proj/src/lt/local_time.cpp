#include "skewfbm/lt/local_time.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "skewfbm/core/numerics.hpp"
#include "skewfbm/mc/parallel.hpp"

namespace skewfbm::lt {

namespace {

void check_dims(const fbm::PathMatrix& path, std::size_t dim) {
  if (path.dim() != dim) throw std::invalid_argument("mollifier center dimension does not match the path");
}

// phi_eps(B_{t_i} - x) at every node
std::vector<double> kernel_along(const fbm::PathMatrix& path, const MollifierSpec& spec) {
  check_dims(path, spec.dim());
  const double d = static_cast<double>(spec.dim());
  const double norm = std::pow(2.0 * std::numbers::pi * spec.epsilon, -0.5 * d);
  const double inv = 0.5 / spec.epsilon;
  std::vector<double> v(path.nodes());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double r2 = 0.0;
    for (std::size_t c = 0; c < spec.dim(); ++c) {
      const double z = path.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) - spec.center[c];
      r2 += z * z;
    }
    v[i] = norm * std::exp(-r2 * inv);
  }
  return v;
}

double trapezoid(const TimeGrid& g, const std::vector<double>& f, std::size_t upto) {
  double acc = 0.0;
  for (std::size_t i = 1; i <= upto; ++i) acc += 0.5 * (g[i] - g[i - 1]) * (f[i] + f[i - 1]);
  return acc;
}

std::size_t node_of(const TimeGrid& g, double t) {
  const double h = (g.back() - g.front()) / static_cast<double>(g.steps());
  const double k = std::round((t - g.front()) / h);
  if (k < 1 || k > static_cast<double>(g.steps()) || std::abs(g[static_cast<std::size_t>(k)] - t) > 1e-9 * h * g.steps())
    throw std::invalid_argument("time is not a grid node");
  return static_cast<std::size_t>(k);
}

}  // namespace

void MollifierSpec::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("mollifier bandwidth must be > 0");
  if (center.empty()) throw std::invalid_argument("mollifier center must have dimension >= 1");
}

double mollifier_eval(const MollifierSpec& spec, std::span<const double> y) {
  spec.validate();
  if (y.size() != spec.dim()) throw std::invalid_argument("point dimension does not match the mollifier");
  double r2 = 0.0;
  for (std::size_t c = 0; c < y.size(); ++c) r2 += (y[c] - spec.center[c]) * (y[c] - spec.center[c]);
  const double d = static_cast<double>(y.size());
  return std::pow(2.0 * std::numbers::pi * spec.epsilon, -0.5 * d) * std::exp(-0.5 * r2 / spec.epsilon);
}

std::vector<double> default_ladder() {
  std::vector<double> l;
  for (int k = 1; k <= 8; ++k) l.push_back(std::ldexp(1.0, -k));
  return l;
}

LocalTimeEstimate smoothed_local_time(const fbm::PathMatrix& path, const MollifierSpec& spec) {
  spec.validate();
  const auto f = kernel_along(path, spec);
  LocalTimeEstimate est{path.grid, std::vector<double>(f.size(), 0.0), spec, path.seed};
  for (std::size_t i = 1; i < f.size(); ++i)
    est.values[i] = est.values[i - 1] + 0.5 * (path.grid[i] - path.grid[i - 1]) * (f[i] + f[i - 1]);
  return est;
}

double smoothed_local_time_at_end(const fbm::PathMatrix& path, const MollifierSpec& spec) {
  spec.validate();
  return trapezoid(path.grid, kernel_along(path, spec), path.nodes() - 1);
}

double occupation_density(const fbm::PathMatrix& path, std::span<const double> x, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("occupation window must be > 0");
  if (x.size() != path.dim()) throw std::invalid_argument("level dimension does not match the path");
  std::vector<double> inside(path.nodes());
  for (std::size_t i = 0; i < inside.size(); ++i) {
    bool in = true;
    for (std::size_t c = 0; c < x.size(); ++c)
      in = in && std::abs(path.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) - x[c]) < delta;
    inside[i] = in ? 1.0 : 0.0;
  }
  return trapezoid(path.grid, inside, path.nodes() - 1) / std::pow(2.0 * delta, static_cast<double>(x.size()));
}

bool decreasing_within(const std::vector<CauchyRung>& rungs, double sigmas) {
  for (std::size_t k = 1; k < rungs.size(); ++k) {
    const auto& a = rungs[k - 1].gap;
    const auto& b = rungs[k].gap;
    if (b.mean > a.mean + sigmas * std::hypot(a.std_error, b.std_error)) return false;
  }
  return true;
}

CauchyStudy local_time_cauchy_study(const fbm::FbmSpec& spec, std::span<const double> x, std::span<const double> ladder,
                                    const mc::McConfig& mc, fbm::SamplerMethod method) {
  spec.validate();
  if (ladder.size() < 2) throw std::invalid_argument("epsilon ladder needs at least two entries");
  if (x.size() != spec.d) throw std::invalid_argument("level dimension does not match d");
  if (mc.paths == 0) throw std::invalid_argument("empty study");
  CauchyStudy out;
  out.hd_warning = spec.H * static_cast<double>(spec.d) >= 1.0;
  const std::size_t K = ladder.size();
  auto per_path = mc::parallel_map(mc.paths, mc.workers, [&](std::size_t p) {
    const auto path = fbm::simulate_fbm(spec, mc.substream(mc::tags::local_time, p), method);
    std::vector<double> L(K);
    for (std::size_t k = 0; k < K; ++k)
      L[k] = smoothed_local_time_at_end(path, MollifierSpec{ladder[k], {x.begin(), x.end()}});
    return L;
  });
  std::vector<double> buf(mc.paths);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t p = 0; p < mc.paths; ++p) buf[p] = per_path[p][k];
    out.level.push_back(mc::estimate(buf));
  }
  for (std::size_t k = 0; k + 1 < K; ++k) {
    for (std::size_t p = 0; p < mc.paths; ++p) {
      const double g = per_path[p][k] - per_path[p][k + 1];
      buf[p] = g * g;
    }
    out.rungs.push_back({ladder[k], ladder[k + 1], mc::estimate(buf)});
  }
  out.decreasing = decreasing_within(out.rungs, 1.0);
  return out;
}

double moment_bound_rhs(double H, std::size_t d, double t, int m, double K) {
  const double hd = H * static_cast<double>(d);
  if (!(hd < 1.0)) throw std::invalid_argument("moment bound requires Hd < 1");
  if (m < 1) throw std::invalid_argument("moment order must be >= 1");
  if (!(K > 0.0)) throw std::invalid_argument("nondeterminism constant K must be > 0");
  const double dd = static_cast<double>(d);
  double log_rhs = std::lgamma(m + 1.0) - 0.5 * dd * m * std::log(2.0 * std::numbers::pi) +
                   0.5 * dd * (1.0 - m) * std::log(K) + m * (1.0 - hd) * std::log(t);
  for (int j = 1; j <= m; ++j) log_rhs += numerics::log_beta(j * (1.0 - hd), 1.0 - hd);
  return std::exp(log_rhs);
}

MomentCheck moment_bound_check(const fbm::FbmSpec& spec, double epsilon, std::span<const int> orders, double K,
                               const mc::McConfig& mc, fbm::SamplerMethod method) {
  spec.validate();
  if (mc.paths == 0) throw std::invalid_argument("empty study");
  const MollifierSpec ms{epsilon, std::vector<double>(spec.d, 0.0)};
  const auto L = mc::parallel_map(mc.paths, mc.workers, [&](std::size_t p) {
    return smoothed_local_time_at_end(fbm::simulate_fbm(spec, mc.substream(mc::tags::local_time, p), method), ms);
  });
  MomentCheck out;
  out.K = K;
  out.epsilon = epsilon;
  out.ok = true;
  std::vector<double> pw(L.size());
  for (int m : orders) {
    for (std::size_t p = 0; p < L.size(); ++p) pw[p] = std::pow(L[p], m);
    MomentCheckRow row{m, mc::estimate(pw), moment_bound_rhs(spec.H, spec.d, spec.T, m, K), false};
    row.ok = row.moment.mean <= row.bound;
    out.ok = out.ok && row.ok;
    out.rows.push_back(row);
  }
  return out;
}

SelfSimilarityReport self_similarity_test(const fbm::FbmSpec& spec, double t, double epsilon, const mc::McConfig& mc,
                                          fbm::SamplerMethod method) {
  spec.validate();
  const double hd = spec.H * static_cast<double>(spec.d);
  if (!(hd < 1.0)) throw std::invalid_argument("self-similarity test requires Hd < 1");
  if (!(t > 0.0)) throw std::invalid_argument("t must be > 0");
  if (mc.paths == 0) throw std::invalid_argument("empty study");
  fbm::FbmSpec short_spec = spec;
  short_spec.T = t;
  fbm::FbmSpec unit_spec = spec;
  unit_spec.T = 1.0;
  const std::vector<double> zero(spec.d, 0.0);
  const MollifierSpec ms_t{epsilon, zero};
  const MollifierSpec ms_1{epsilon * std::pow(t, -2.0 * spec.H), zero};
  const double scale = std::pow(t, 1.0 - hd);
  const auto a = mc::parallel_map(mc.paths, mc.workers, [&](std::size_t p) {
    return smoothed_local_time_at_end(fbm::simulate_fbm(short_spec, mc.substream(mc::tags::self_similarity_a, p), method),
                                      ms_t);
  });
  const auto b = mc::parallel_map(mc.paths, mc.workers, [&](std::size_t p) {
    return scale * smoothed_local_time_at_end(
                       fbm::simulate_fbm(unit_spec, mc.substream(mc::tags::self_similarity_b, p), method), ms_1);
  });
  SelfSimilarityReport r;
  r.t = t;
  r.epsilon = epsilon;
  r.ks = stats::ks_two_sample(a, b);
  r.insufficient_sample = mc.paths < 50;
  r.passed = !r.insufficient_sample && r.ks.p_value > 0.01;
  return r;
}

ExponentRegression exponent_regression(const fbm::FbmSpec& spec, std::span<const double> times, double epsilon,
                                       const mc::McConfig& mc, fbm::SamplerMethod method) {
  spec.validate();
  if (times.size() < 2) throw std::invalid_argument("exponent regression needs at least two times");
  if (mc.paths == 0) throw std::invalid_argument("empty study");
  const TimeGrid g = spec.grid();
  std::vector<std::size_t> idx;
  for (double t : times) idx.push_back(node_of(g, t));
  const MollifierSpec ms{epsilon, std::vector<double>(spec.d, 0.0)};
  const auto per_path = mc::parallel_map(mc.paths, mc.workers, [&](std::size_t p) {
    const auto est = smoothed_local_time(fbm::simulate_fbm(spec, mc.substream(mc::tags::local_time, p), method), ms);
    std::vector<double> v;
    for (std::size_t i : idx) v.push_back(est.values[i]);
    return v;
  });
  ExponentRegression out;
  out.times.assign(times.begin(), times.end());
  out.expected_slope = 1.0 - spec.H * static_cast<double>(spec.d);
  std::vector<double> buf(mc.paths), means;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    for (std::size_t p = 0; p < mc.paths; ++p) buf[p] = per_path[p][k];
    out.mean_local_time.push_back(mc::estimate(buf));
    means.push_back(out.mean_local_time.back().mean);
  }
  out.fit = stats::loglog_fit(out.times, means);
  return out;
}

}  // namespace skewfbm::lt
