#include "skewfbm/verify/suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "skewfbm/core/csv.hpp"
#include "skewfbm/fbm/kernel.hpp"
#include "skewfbm/fbm/nondeterminism.hpp"
#include "skewfbm/frac/fractional.hpp"
#include "skewfbm/mc/parallel.hpp"
#include "skewfbm/mc/rng.hpp"
#include "skewfbm/mc/study_config.hpp"
#include "skewfbm/verify/gaussian_identities.hpp"
#include "skewfbm/verify/ibp_bound.hpp"
#include "skewfbm/verify/iterated_integrals.hpp"
#include "skewfbm/verify/permanent.hpp"
#include "skewfbm/verify/shuffle.hpp"

namespace skewfbm::verify {

namespace {

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

// substream offsets of the randomized audits
constexpr std::uint64_t kPermAudit = 1'000'000;
constexpr std::uint64_t kRepeated = 2'000'000;
constexpr std::uint64_t kLiWeiMatrix = 3'000'000;
constexpr std::uint64_t kLiWeiPaths = 4'000'000;
constexpr std::uint64_t kDetChain = 5'000'000;
constexpr std::uint64_t kIterated = 6'000'000;
constexpr std::uint64_t kSingle = 7'000'000;

class Builder {
public:
  Builder(const SuiteOptions& o) : opt(o), mc{0, o.seed, o.workers} {}

  const SuiteOptions& opt;
  mc::McConfig mc;
  std::vector<SuiteRow> rows;
  std::string group;

  void add(std::string name, bool passed, std::string detail) {
    rows.push_back({std::move(name), group, passed, std::move(detail)});
  }

  mc::Philox rng(std::uint64_t index) const { return mc::Philox(mc.substream(mc::tags::verify, index)); }

  // Gram matrix of n random vectors in R^{n+1}
  Eigen::MatrixXd random_psd(mc::Philox& r, std::size_t n) const {
    Eigen::MatrixXd V(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n + 1));
    for (Eigen::Index i = 0; i < V.size(); ++i) V.data()[i] = r.normal();
    return V * V.transpose();
  }

  void shuffles() {
    group = "shuffles";
    for (auto [m, n, expect] : {std::tuple{1, 1, 2}, {2, 2, 6}, {3, 2, 10}}) {
      const auto sh = enumerate_shuffles(m, n);
      bool ok = sh.size() == static_cast<std::size_t>(expect);
      for (const auto& s : sh) {
        std::vector<std::size_t> sorted = s.sigma;
        std::sort(sorted.begin(), sorted.end());
        ok = ok && std::is_sorted(s.sigma.begin(), s.sigma.begin() + m) && std::is_sorted(s.sigma.begin() + m, s.sigma.end());
        for (std::size_t k = 0; k < sorted.size(); ++k) ok = ok && sorted[k] == k;
      }
      add(fmt("enumerate S(%d;%d)", m, n), ok, fmt("count %zu expected %d", sh.size(), expect));
    }
    double worst = 0.0;
    std::size_t cases = 0;
    for (std::size_t total = 2; total <= 5; ++total)
      for (std::size_t m = 1; m < total; ++m)
        for (std::size_t shift = 0; shift < 3; ++shift) {
          std::vector<std::size_t> p(total);
          for (std::size_t j = 0; j < total; ++j) p[j] = (j + shift) % 4;
          worst = std::max(worst, shuffle_integral_identity_check(m, total - m, p, 0.25, 1.5).residual);
          ++cases;
        }
    add("shuffle identity m+n<=5", worst <= 1e-10, fmt("%zu monomial families; max residual %.3g", cases, worst));
    const auto ps = partial_shuffle_check({1, 2}, {1}, 1, 0.25, 1.5);
    add("partial shuffle n=2 p=1 k=1", ps.residual <= 1e-10,
        fmt("residual %.3g; #A=%zu; smallest C=%.4g; #A<=2^(n+p): %s", ps.residual, ps.terms, ps.smallest_constant,
            ps.bound_with_2 ? "yes" : "no"));
  }

  void permanents() {
    group = "permanents";
    Eigen::Matrix2d A;
    A << 1.5, -2.0, 0.25, 3.0;
    const double p2 = permanent(A);
    add("perm 2x2 = ad+bc", std::abs(p2 - (1.5 * 3.0 + (-2.0) * 0.25)) <= 1e-14, fmt("perm %.17g", p2));
    add("perm identity", permanent(Eigen::MatrixXd::Identity(7, 7)) == 1.0, "n=7");
    {
      auto r = rng(kSingle);
      Eigen::MatrixXd M(5, 5);
      for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = r.normal();
      const double a = permanent(M), b = permanent_bruteforce(M);
      const double rel = std::abs(a - b) / std::abs(b);
      add("perm random 5x5 vs enumeration", rel <= 1e-12, fmt("relative difference %.3g", rel));
    }
    const auto ones = psd_permanent_bound_check(Eigen::MatrixXd::Ones(3, 3));
    add("perm all-ones n=3", std::abs(ones.permanent - 6.0) <= 1e-12 && ones.holds,
        fmt("perm %.17g bound %.17g", ones.permanent, ones.bound));
    const auto audit = mc::parallel_map(opt.permanent_audits, opt.workers, [&](std::size_t i) {
      auto r = rng(kPermAudit + i);
      const std::size_t n = 1 + static_cast<std::size_t>(r.uniform() * 6.0);
      const auto chk = psd_permanent_bound_check(random_psd(r, n));
      return std::pair{chk.holds && chk.permanent >= 0.0, chk.permanent / chk.bound};
    });
    std::size_t bad = 0;
    double tight = 0.0;
    for (auto [ok, ratio] : audit) {
      bad += ok ? 0 : 1;
      tight = std::max(tight, ratio);
    }
    add("perm <= n! prod a_ii audit", bad == 0,
        fmt("%zu random PSD matrices n<=6; violations %zu; max perm/bound %.4g", opt.permanent_audits, bad, tight));
    // covariances of fBm at sorted times with repeated entries
    std::size_t rep_bad = 0;
    for (std::size_t i = 0; i < 200; ++i) {
      auto r = rng(kRepeated + i);
      const std::size_t k = 2 + static_cast<std::size_t>(r.uniform() * 3.0);
      std::vector<double> times(k);
      for (auto& t : times) t = r.uniform();
      std::sort(times.begin(), times.end());
      Eigen::MatrixXd base(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) base(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = fbm::covariance(0.2, times[a], times[b]);
      std::vector<std::size_t> mult(k);
      std::size_t total = 0;
      for (auto& m : mult) total += (m = static_cast<std::size_t>(r.uniform() * 3.0));
      if (total == 0 || total > 10) continue;
      const auto C = repeated_row_covariance(base, mult);
      const double perm = permanent(C);
      double bound = std::tgamma(static_cast<double>(total) + 1.0);
      for (Eigen::Index d = 0; d < C.rows(); ++d) bound *= C(d, d);
      if (!(perm <= bound * (1.0 + 1e-12))) ++rep_bad;
    }
    add("repeated-row perm <= (2|alpha|)! prod a_ii", rep_bad == 0, fmt("200 fBm covariances; violations %zu", rep_bad));
  }

  void gaussian() {
    group = "gaussian";
    {
      Eigen::MatrixXd S(1, 1);
      S << 2.25;
      const auto c = gaussian_abs_moment_bound_check(S, opt.li_wei_paths, mc.substream(mc::tags::verify, kSingle + 1));
      const double exact = 1.5 * std::sqrt(2.0 / 3.141592653589793);
      add("E|X| closed form n=1", c.holds && std::abs(c.moment.mean - exact) <= 3.0 * c.moment.std_error,
          fmt("estimate %.5g exact %.5g bound %.5g", c.moment.mean, exact, c.bound));
    }
    {
      Eigen::MatrixXd S = Eigen::Vector2d(0.5, 2.0).asDiagonal();
      const auto c = gaussian_abs_moment_bound_check(S, opt.li_wei_paths, mc.substream(mc::tags::verify, kSingle + 2));
      const double exact = 2.0 * std::sqrt(0.5 * 2.0) / 3.141592653589793;
      add("E|X||Y| independent n=2", c.holds && std::abs(c.moment.mean - exact) <= 3.0 * c.moment.std_error,
          fmt("estimate %.5g exact %.5g bound %.5g", c.moment.mean, exact, c.bound));
    }
    std::size_t bad = 0;
    double worst_z = -1e300;
    for (std::size_t i = 0; i < opt.li_wei_matrices; ++i) {
      auto r = rng(kLiWeiMatrix + i);
      const std::size_t n = 1 + static_cast<std::size_t>(r.uniform() * 4.0);
      const auto c = gaussian_abs_moment_bound_check(random_psd(r, n), opt.li_wei_paths,
                                                     mc.substream(mc::tags::verify, kLiWeiPaths + i * 1000));
      bad += c.holds ? 0 : 1;
      worst_z = std::max(worst_z, (c.moment.mean - c.bound) / c.moment.std_error);
    }
    add("Li-Wei bound audit", bad == 0,
        fmt("%zu covariances n<=4; N=%zu; violations %zu; max (estimate-bound)/SE %.3g", opt.li_wei_matrices,
            opt.li_wei_paths, bad, worst_z));
    {
      const auto c = gaussian_marginal_identity_check(Eigen::Matrix2d::Identity(), TestFunction{}, 1e-10);
      add("marginal identity n=2 independent", c.residual <= 1e-6, fmt("lhs %.12g rhs %.12g residual %.3g", c.lhs, c.rhs, c.residual));
    }
    {
      Eigen::Matrix2d S;
      S << 1.0, 0.6, 0.6, 2.0;
      const auto c = gaussian_marginal_identity_check(S, TestFunction{TestFunction::Kind::constant}, 1e-10);
      add("marginal identity g=1", c.residual <= 1e-8, fmt("lhs %.12g rhs %.12g residual %.3g", c.lhs, c.rhs, c.residual));
    }
    {
      Eigen::Matrix3d S;
      S << 1, .5, .2, .5, 1, .3, .2, .3, 1;
      const auto c = gaussian_marginal_identity_check(S, TestFunction{}, 1e-7);
      add("marginal identity n=3 correlated", c.residual <= 1e-4,
          fmt("lhs %.12g rhs %.12g sigma1 %.6g residual %.3g", c.lhs, c.rhs, c.sigma1, c.residual));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < 50; ++i) {
      auto r = rng(kDetChain + i);
      const std::size_t k = 2 + static_cast<std::size_t>(r.uniform() * 7.0);
      std::vector<double> times(k);
      for (auto& t : times) t = 0.05 + r.uniform();
      std::sort(times.begin(), times.end());
      const auto dc = fbm::determinant_chain(0.1 + 0.3 * r.uniform(), times);
      worst = std::max(worst, std::abs(dc.log_det - dc.log_chain));
      const auto dg = fbm::determinant_chain(random_psd(r, k));
      worst = std::max(worst, std::abs(dg.log_det - dg.log_chain));
    }
    add("det Cov = product of conditional variances", worst <= 1e-10, fmt("100 covariances; max |log det - log chain| %.3g", worst));
  }

  void iterated() {
    group = "iterated";
    {
      IteratedIntegralSpec s;
      s.w = {0.0};
      s.eps = {0};
      const auto b = iterated_integral_bound(s, 1.0);
      add("m=1 w=0 eps=0", std::abs(b.lhs - 0.5) <= 1e-12 && std::abs(b.rhs - 0.5) <= 1e-12,
          fmt("integral %.15g bound %.15g", b.lhs, b.rhs));
    }
    for (std::vector<double> w : {std::vector<double>{-0.3, -0.3}, {0.4, -0.5, 0.2}}) {
      IteratedIntegralSpec s;
      s.w = w;
      s.eps.assign(w.size(), 0);
      const auto b = iterated_integral_bound(s, 2.0);
      const double rel = std::abs(b.lhs / b.classical - 1.0);
      add(fmt("classical formula m=%zu", w.size()), rel <= 1e-6 && b.holds,
          fmt("numeric %.12g classical %.12g relative %.2g; implied C %.4g", b.lhs, b.classical, rel, b.implied_C));
    }
    {
      IteratedIntegralSpec s;
      s.w = {-0.3, -0.3};
      s.eps = {1, 0};
      const auto b = iterated_integral_bound(s, 2.0);
      add("m=2 eps=(1;0) w=(-0.3;-0.3)", b.holds, fmt("lhs %.6g rhs(C=2) %.6g implied C %.4g", b.lhs, b.rhs, b.implied_C));
    }
    // w_j drawn from [-0.4, 1]; the bound needs C^m >= 1/(sum w + m) in the eps = 0 direction
    std::size_t bad = 0, m3 = 0;
    double worst_C = 0.0, worst_ratio = 0.0;
    for (std::size_t i = 0; i < opt.iterated_draws; ++i) {
      auto r = rng(kIterated + i);
      IteratedIntegralSpec s;
      const double u = r.uniform();
      const std::size_t m = u < 0.45 ? 1 : (u < 0.9 ? 2 : 3);
      m3 += m == 3;
      s.H = 0.05 + 0.4 * r.uniform();
      s.gamma = s.H * (0.1 + 0.8 * r.uniform());
      s.t = 1.0;
      s.theta = 0.1 + 0.8 * r.uniform();
      s.theta_prime = r.uniform() < 0.25 ? 0.0 : s.theta * (0.1 + 0.8 * r.uniform());
      for (std::size_t j = 0; j < m; ++j) {
        s.eps.push_back(r.uniform() < 0.5 ? 1 : 0);
        double w;
        do w = -0.4 + 1.4 * r.uniform();
        while (!(w + (s.H - 0.5 - s.gamma) * s.eps.back() > -0.9));
        s.w.push_back(w);
      }
      const auto b = iterated_integral_bound(s, 2.0);
      bad += b.holds ? 0 : 1;
      worst_C = std::max(worst_C, b.implied_C);
      worst_ratio = std::max(worst_ratio, b.lhs / b.rhs);
    }
    add("randomized in-hypothesis draws", bad == 0,
        fmt("%zu draws (m=3: %zu); violations %zu; max lhs/rhs %.4g; max implied C %.4g", opt.iterated_draws, m3, bad,
            worst_ratio, worst_C));
  }

  void simplex() {
    group = "simplex";
    for (auto [H, d] : {std::pair{0.1, std::size_t{1}}, {0.05, 1}, {0.1, 2}}) {
      const auto r = simplex_moment_bound_check(3, H, d);
      add(fmt("Beta product forms H=%g d=%zu", H, d), r.max_form_mismatch <= 1e-12,
          fmt("bounds %.6g %.6g %.6g; max relative mismatch %.2g", r.bounds[0].product, r.bounds[1].product,
              r.bounds[2].product, r.max_form_mismatch));
      add(fmt("direct m=1 below bound H=%g d=%zu", H, d), r.direct_below_bound,
          fmt("direct %.10g bound %.10g ratio %.4f", r.direct_m1, r.bounds[0].product, r.direct_m1 / r.bounds[0].product));
      // normalised growth at rate (m!)^{2H(1+d)}; one extra factorial per step
      // shows up as growth(m) ~ c (m+1)
      const double g1 = r.growth[0] / 2.0, g2 = r.growth[1] / 3.0;
      add(fmt("Beta product growth H=%g d=%zu", H, d), std::max(g1, g2) / std::min(g1, g2) <= 1.25,
          fmt("ratios over (m!)^{2H(1+d)}: %.4g %.4g; divided by (m+1): %.4g %.4g", r.growth[0], r.growth[1], g1, g2));
    }
  }

  void ibp() {
    group = "ibp";
    mc::McConfig m = mc;
    m.paths = opt.ibp_paths;
    {
      IbpSpec s;
      s.alpha = 0;
      s.eps = 0;
      const auto r = ibp_bound_mc_check(s, m);
      add("alpha=0 kappa=1 MC vs marginal quadrature", r.agrees,
          fmt("MC %.6g +- %.2g oracle %.6g", r.lhs.mean, r.lhs.std_error, r.oracle));
    }
    {
      IbpSpec s;
      s.shift = 0.0;
      const auto r = ibp_bound_mc_check(s, m);
      add("odd integrand gives zero", std::abs(r.lhs.mean) <= 3.0 * r.lhs.std_error && std::abs(r.oracle) <= 1e-12,
          fmt("MC %.3g +- %.2g oracle %.3g", r.lhs.mean, r.lhs.std_error, r.oracle));
    }
    double cmax = 0.0, cmin = 1e300;
    bool ok = true;
    std::string detail;
    for (auto [th, thp] : {std::pair{0.5, 0.25}, {0.3, 0.1}}) {
      IbpSpec s;
      s.theta = th;
      s.theta_prime = thp;
      const auto r = ibp_bound_mc_check(s, m);
      ok = ok && r.agrees && std::isfinite(r.implied_C);
      cmax = std::max(cmax, r.implied_C);
      cmin = std::min(cmin, r.implied_C);
      detail += fmt("(theta %.2g theta' %.2g) MC %.4g oracle %.4g C %.4g; ", th, thp, r.lhs.mean, r.oracle, r.implied_C);
    }
    add("first derivative implied C", ok && cmax <= 1.0, detail + fmt("common C %.4g", std::max(1.0, cmax)));
    {
      IbpSpec s;
      s.theta_prime = 0.0;
      const auto r = ibp_bound_mc_check(s, m);
      add("kappa = K_H(s;theta) variant", r.agrees && r.implied_C <= 1.0,
          fmt("MC %.5g oracle %.5g rhs(C=1) %.4g implied C %.4g", r.lhs.mean, r.oracle, r.rhs_unit, r.implied_C));
    }
  }

  void fractional() {
    group = "frac";
    const auto g = TimeGrid::uniform(0, 1, 4096);
    double worst = 0.0;
    for (double a : {0.2, 0.5, 0.8}) {
      for (int p = 0; p <= 2; ++p) {
        const auto f = GridFunction::sample(g, [p](double x) { return std::pow(x, p); });
        const auto r = frac::rl_integral_left(f, frac::FracOrder(a));
        const double c = std::tgamma(p + 1.0) / std::tgamma(p + a + 1.0);
        for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(r[i] - c * std::pow(g[i], p + a)));
      }
      const auto d = frac::rl_derivative_left(GridFunction::sample(g, [](double) { return 1.0; }), frac::FracOrder(a));
      for (std::size_t i = 1; i < g.size(); ++i)
        worst = std::max(worst, std::abs(d.value[i] - std::pow(g[i], -a) / std::tgamma(1.0 - a)) / std::max(1.0, d.value[i]));
    }
    add("power rule", worst <= 1e-6, fmt("max error %.3g at n=4096", worst));
    auto err = [](std::size_t n) {
      const auto grid = TimeGrid::uniform(0, 1, n);
      const auto f = GridFunction::sample(grid, [](double x) { return x * std::cos(2 * x); });
      const auto r = frac::rl_derivative_left(frac::rl_integral_left(f, frac::FracOrder(0.3)), frac::FracOrder(0.3)).value;
      double e = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] >= 0.1 && grid[i] <= 0.9) e = std::max(e, std::abs(r[i] - f[i]));
      return e;
    };
    const double e1 = err(512), e2 = err(1024), e3 = err(2048);
    add("D of I halves under doubling", e2 <= 0.5 * e1 && e3 <= 0.5 * e2, fmt("interior errors %.3g %.3g %.3g", e1, e2, e3));
    const auto grid = TimeGrid::uniform(0, 1, 1024);
    const auto f = frac::rl_integral_right(GridFunction::sample(grid, [](double x) { return std::exp(-x); }), frac::FracOrder(0.4));
    auto d = frac::rl_derivative_right(f, frac::FracOrder(0.4)).value;
    d.values.back() = 0.0;
    const auto back = frac::rl_integral_right(d, frac::FracOrder(0.4));
    double e = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (grid[i] >= 0.1 && grid[i] <= 0.9) e = std::max(e, std::abs(back[i] - f[i]));
    add("I of D on the image class", e <= 2e-2, fmt("interior error %.3g", e));
  }
};

}  // namespace

const std::vector<std::string>& suite_groups() {
  static const std::vector<std::string> g{"shuffles", "permanents", "gaussian", "iterated", "simplex", "ibp", "frac"};
  return g;
}

std::vector<SuiteRow> run_verify_suite(const SuiteOptions& opt) {
  const auto& groups = suite_groups();
  if (!opt.only.empty() && std::find(groups.begin(), groups.end(), opt.only) == groups.end())
    throw std::invalid_argument("unknown verify group '" + opt.only + "'");
  Builder b(opt);
  auto want = [&](const char* g) { return opt.only.empty() || opt.only == g; };
  if (want("shuffles")) b.shuffles();
  if (want("permanents")) b.permanents();
  if (want("gaussian")) b.gaussian();
  if (want("iterated")) b.iterated();
  if (want("simplex")) b.simplex();
  if (want("ibp")) b.ibp();
  if (want("frac")) b.fractional();
  return b.rows;
}

bool all_passed(const std::vector<SuiteRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const SuiteRow& r) { return r.passed; });
}

std::string suite_csv(const std::vector<SuiteRow>& rows) {
  CsvTable t({"name", "group", "passed", "detail"});
  for (const auto& r : rows) t.row() << r.name << r.group << (r.passed ? "true" : "false") << r.detail;
  return t.str();
}

}  // namespace skewfbm::verify
