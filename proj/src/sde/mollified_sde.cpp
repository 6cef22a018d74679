#include "skewfbm/sde/mollified_sde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "skewfbm/lt/local_time.hpp"
#include "skewfbm/mc/parallel.hpp"

namespace skewfbm::sde {

namespace {

// Phi(z2) - Phi(z1) for z2 >= z1 without cancellation in the tails
double normal_mass(double z1, double z2) {
  const double r = 1.0 / std::numbers::sqrt2;
  if (z1 >= 0.0) return 0.5 * (std::erfc(z1 * r) - std::erfc(z2 * r));
  if (z2 <= 0.0) return 0.5 * (std::erfc(-z2 * r) - std::erfc(-z1 * r));
  return 1.0 - 0.5 * std::erfc(z2 * r) - 0.5 * std::erfc(-z1 * r);
}

}  // namespace

Scheme parse_scheme(const std::string& name) {
  if (name == "segment") return Scheme::segment;
  if (name == "euler") return Scheme::euler;
  throw std::invalid_argument("unknown scheme '" + name + "' (expected segment or euler)");
}

std::string to_string(Scheme s) { return s == Scheme::segment ? "segment" : "euler"; }

bool in_proven_regime(double H, std::size_t d) { return H < 1.0 / (2.0 * (2.0 + static_cast<double>(d))); }

void SdeSpec::validate() const {
  fbm.validate();
  if (x0.size() != fbm.d) throw std::invalid_argument("initial point dimension does not match d");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("mollifier bandwidth must be > 0");
  if (!std::isfinite(alpha)) throw std::invalid_argument("drift weight must be finite");
}

bool SdeSpec::in_proven_regime() const { return sde::in_proven_regime(fbm.H, fbm.d); }

nlohmann::json SdeSpec::to_json() const {
  return {{"x0", x0},           {"alpha", alpha}, {"fbm", fbm.to_json()}, {"epsilon", epsilon},
          {"scheme", to_string(scheme)}, {"in_proven_regime", in_proven_regime()}};
}

double drift_increment(const SdeSpec& spec, std::span<const double> x, std::span<const double> dB, double h) {
  const std::size_t d = x.size();
  const double eps = spec.epsilon;
  const double norm = std::pow(2.0 * std::numbers::pi * eps, -0.5 * static_cast<double>(d));
  double xx = 0.0, xb = 0.0, bb = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    xx += x[c] * x[c];
    xb += x[c] * dB[c];
    bb += dB[c] * dB[c];
  }
  if (spec.scheme == Scheme::euler || bb < 1e-24 * eps) return spec.alpha * h * norm * std::exp(-0.5 * xx / eps);
  // |x + tau b|^2 = |b|^2 (tau + c)^2 + perp^2
  const double nb = std::sqrt(bb);
  const double c = xb / bb;
  const double perp2 = std::max(xx - xb * c, 0.0);
  const double se = std::sqrt(eps);
  const double line = std::sqrt(2.0 * std::numbers::pi * eps) / nb * normal_mass(nb * c / se, nb * (1.0 + c) / se);
  return spec.alpha * h * norm * std::exp(-0.5 * perp2 / eps) * line;
}

fbm::PathMatrix solve_mollified(const SdeSpec& spec, const fbm::PathMatrix& path) {
  spec.validate();
  if (!(path.grid == spec.fbm.grid())) throw std::invalid_argument("path grid does not match the SDE spec");
  if (path.dim() != spec.fbm.d) throw std::invalid_argument("path dimension does not match the SDE spec");
  const std::size_t d = spec.fbm.d;
  const auto rows = static_cast<Eigen::Index>(path.nodes());
  fbm::PathMatrix out;
  out.grid = path.grid;
  out.values.resize(rows, static_cast<Eigen::Index>(d));
  out.method = "sde-" + to_string(spec.scheme);
  out.seed = path.seed;
  out.driver_fingerprint = path.driver_fingerprint;
  std::vector<double> x(d), db(d), drift(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) out.values(0, static_cast<Eigen::Index>(c)) = spec.x0[c] + path.values(0, static_cast<Eigen::Index>(c));
  for (Eigen::Index i = 0; i + 1 < rows; ++i) {
    if (spec.alpha != 0.0) {
      for (std::size_t c = 0; c < d; ++c) {
        const auto cc = static_cast<Eigen::Index>(c);
        x[c] = out.values(i, cc);
        db[c] = path.values(i + 1, cc) - path.values(i, cc);
      }
      const double inc = drift_increment(spec, x, db, path.grid[static_cast<std::size_t>(i + 1)] - path.grid[static_cast<std::size_t>(i)]);
      for (std::size_t c = 0; c < d; ++c) drift[c] += inc;
    }
    for (std::size_t c = 0; c < d; ++c) {
      const auto cc = static_cast<Eigen::Index>(c);
      out.values(i + 1, cc) = spec.alpha == 0.0 ? spec.x0[c] + path.values(i + 1, cc)
                                                : spec.x0[c] + path.values(i + 1, cc) + drift[c];
    }
  }
  return out;
}

SdeLadder convergence_ladder(const SdeSpec& base, std::span<const double> ladder, const mc::McConfig& mc,
                             fbm::SamplerMethod method, bool keep_terminal) {
  base.validate();
  if (ladder.size() < 2) throw std::invalid_argument("epsilon ladder needs at least two entries");
  if (mc.paths == 0) throw std::invalid_argument("empty study");
  const std::size_t K = ladder.size();
  const std::size_t d = base.fbm.d;
  struct PerPath {
    std::vector<double> terminal;  // K x d
    fbm::PathMatrix last;
  };
  auto per_path = mc::parallel_map(mc.paths, mc.workers, [&](std::size_t p) {
    const auto B = fbm::simulate_fbm(base.fbm, mc.substream(mc::tags::sde, p), method);
    PerPath r;
    r.terminal.resize(K * d);
    for (std::size_t k = 0; k < K; ++k) {
      SdeSpec s = base;
      s.epsilon = ladder[k];
      auto X = solve_mollified(s, B);
      for (std::size_t c = 0; c < d; ++c) r.terminal[k * d + c] = X.values(X.values.rows() - 1, static_cast<Eigen::Index>(c));
      if (keep_terminal && k + 1 == K) r.last = std::move(X);
    }
    return r;
  });
  SdeLadder out;
  out.outside_proven_regime = !base.in_proven_regime();
  std::vector<double> buf(mc.paths);
  for (std::size_t k = 0; k + 1 < K; ++k) {
    for (std::size_t p = 0; p < mc.paths; ++p) {
      double g = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double v = per_path[p].terminal[k * d + c] - per_path[p].terminal[(k + 1) * d + c];
        g += v * v;
      }
      buf[p] = g;
    }
    out.rungs.push_back({ladder[k], ladder[k + 1], mc::estimate(buf)});
  }
  out.decreasing = true;
  for (std::size_t k = 1; k < out.rungs.size(); ++k) {
    const auto& a = out.rungs[k - 1].gap;
    const auto& b = out.rungs[k].gap;
    const double se = std::hypot(a.std_error, b.std_error);
    if (b.mean > a.mean + se) out.decreasing = false;
    if (b.mean > a.mean + 3.0 * se) out.regime_warning = true;
  }
  if (keep_terminal)
    for (auto& r : per_path) out.terminal.push_back(std::move(r.last));
  return out;
}

HolderReport holder_moment_check(const std::vector<fbm::PathMatrix>& ensemble, int m, std::span<const std::size_t> lag_steps,
                                 double H) {
  if (ensemble.empty()) throw std::invalid_argument("empty study");
  if (m < 1) throw std::invalid_argument("moment order must be >= 1");
  const auto& g = ensemble.front().grid;
  const std::size_t d = ensemble.front().dim();
  const double h = (g.back() - g.front()) / static_cast<double>(g.steps());
  HolderReport rep;
  rep.m = m;
  const double hd = H * static_cast<double>(d);
  rep.expected_min_slope = std::min(m * H, 0.5 * m * (1.0 - hd));
  std::vector<double> fit_x, fit_y;
  std::vector<double> buf(ensemble.size());
  for (std::size_t L : lag_steps) {
    if (L > g.steps()) throw std::invalid_argument("lag exceeds the horizon");
    for (std::size_t p = 0; p < ensemble.size(); ++p) {
      const auto& X = ensemble[p].values;
      if (!(ensemble[p].grid == g)) throw std::invalid_argument("ensemble paths live on different grids");
      double acc = 0.0;
      const std::size_t starts = g.steps() - L + 1;
      for (std::size_t s = 0; s < starts; ++s) {
        double r2 = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          const double v = X(static_cast<Eigen::Index>(s + L), static_cast<Eigen::Index>(c)) -
                           X(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(c));
          r2 += v * v;
        }
        acc += std::pow(r2, 0.5 * m);
      }
      buf[p] = acc / static_cast<double>(starts);
    }
    const double lag = h * static_cast<double>(L);
    rep.lags.push_back(lag);
    rep.moment.push_back(mc::estimate(buf));
    if (L > 0) {
      fit_x.push_back(lag);
      fit_y.push_back(rep.moment.back().mean);
      const double shape = std::pow(lag, 0.5 * m * (1.0 - hd)) + std::pow(lag, m * H);
      rep.fitted_C = std::max(rep.fitted_C, rep.moment.back().mean / shape);
    }
  }
  if (fit_x.size() >= 2) rep.fit = stats::loglog_fit(fit_x, fit_y);
  return rep;
}

}  // namespace skewfbm::sde
