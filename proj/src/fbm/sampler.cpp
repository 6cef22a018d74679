#include "skewfbm/fbm/sampler.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "skewfbm/core/csv.hpp"
#include "skewfbm/core/numerics.hpp"
#include "skewfbm/fbm/kernel.hpp"

namespace skewfbm::fbm {

void FbmSpec::validate() const {
  require_hurst(H);
  if (d < 1) throw std::invalid_argument("dimension d must be >= 1");
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("horizon T must be > 0");
  if (n < 2) throw std::invalid_argument("step count n must be >= 2");
}

nlohmann::json FbmSpec::to_json() const { return {{"H", H}, {"d", d}, {"T", T}, {"n", n}}; }

std::uint64_t BrownianDriver::fingerprint() const {
  // FNV-1a over shapes and raw bits
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](std::uint64_t v) {
    for (int k = 0; k < 8; ++k) {
      h ^= (v >> (8 * k)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  };
  for (const Eigen::MatrixXd* m : {&dW, &aux}) {
    mix(static_cast<std::uint64_t>(m->rows()));
    mix(static_cast<std::uint64_t>(m->cols()));
    for (Eigen::Index k = 0; k < m->size(); ++k) mix(std::bit_cast<std::uint64_t>(m->data()[k]));
  }
  return h;
}

namespace {

template <class Sampler>
std::shared_ptr<const Sampler> cached(double H, double T, std::size_t n) {
  static std::mutex mu;
  static std::map<std::tuple<double, double, std::size_t>, std::shared_ptr<const Sampler>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{H, T, n}];
  if (!slot) slot = std::make_shared<const Sampler>(H, T, n);
  return slot;
}

}  // namespace

CholeskySampler::CholeskySampler(double H, double T, std::size_t n) : H_(H), T_(T), n_(n) {
  FbmSpec{H, 1, T, n}.validate();
  if (n > kMaxSteps) throw std::invalid_argument("Cholesky sampler is limited to n <= 4096");
  const double h = T / static_cast<double>(n);
  Eigen::MatrixXd C(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) C(i, j) = C(j, i) = covariance(H, h * (i + 1), h * (j + 1));
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (llt.info() != Eigen::Success) {
    jitter_ = 1e-12;
    C.diagonal().array() += jitter_;
    llt.compute(C);
    if (llt.info() != Eigen::Success) throw std::runtime_error("covariance factorisation failed after 1e-12 jitter");
  }
  L_ = llt.matrixL();
}

PathMatrix CholeskySampler::sample(mc::SeedSpec seed, std::size_t d) const {
  mc::Philox rng(seed);
  Eigen::MatrixXd z(n_, d);
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t i = 0; i < n_; ++i) z(i, c) = rng.normal();
  PathMatrix p;
  p.grid = TimeGrid::uniform(0.0, T_, n_);
  p.values = Eigen::MatrixXd::Zero(n_ + 1, d);
  p.values.bottomRows(n_) = L_.triangularView<Eigen::Lower>() * z;
  p.method = "cholesky";
  p.seed = seed;
  p.jitter = jitter_;
  return p;
}

std::shared_ptr<const CholeskySampler> CholeskySampler::shared(double H, double T, std::size_t n) {
  return cached<CholeskySampler>(H, T, n);
}

VolterraSampler::VolterraSampler(double H, double T, std::size_t n) : H_(H), T_(T), n_(n) {
  FbmSpec{H, 1, T, n}.validate();
  const double h = T / static_cast<double>(n);
  const auto& g6 = numerics::UnitGauss<6>::get();
  const auto first = graded_gauss_rule(0.0, h, H);

  // shape u^{H-1/2} on the first cell, minus its mean, normalised
  const double e_avg = std::pow(h, H - 0.5) / (H + 0.5);
  const double e_norm = std::pow(h, H) * std::sqrt(1.0 / (2.0 * H) - 1.0 / ((H + 0.5) * (H + 0.5)));

  A_ = Eigen::MatrixXd::Zero(n, n);
  load_.resize(n);
  diag_sd_.resize(n);
  prev_load_ = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = h * static_cast<double>(i + 1);
    if (i > 1) {
      std::vector<double> nodes;
      nodes.reserve((i - 1) * g6.x.size());
      for (std::size_t j = 1; j < i; ++j)
        for (std::size_t k = 0; k < g6.x.size(); ++k) nodes.push_back(h * (static_cast<double>(j) + g6.x[k]));
      const auto kv = kernel_K_row(H, t, nodes);
      for (std::size_t j = 1; j < i; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < g6.x.size(); ++k) acc += g6.w[k] * kv[(j - 1) * g6.x.size() + k];
        A_(i, j) = acc;
      }
    }
    // first cell: average and projection on the shape
    double avg0 = 0.0, proj = 0.0;
    for (const auto& q : first) {
      const double k = kernel_K(H, t, q.x, (t - h) + q.to_hi);
      avg0 += q.w * k;
      proj += q.w * k * std::pow(q.x, H - 0.5);
    }
    avg0 /= h;
    A_(i, 0) = avg0;
    load_(i) = (proj - e_avg * h * avg0) / e_norm;

    // diagonal cell
    double avg = 0.0, sq = 0.0;
    for (const auto& q : graded_gauss_rule(h * static_cast<double>(i), t, H)) {
      const double k = kernel_K(H, t, q.x, q.to_hi);
      avg += q.w * k;
      sq += q.w * k * k;
    }
    avg /= h;
    A_(i, i) = avg;
    double var = sq - h * avg * avg;
    if (i == 0) var -= load_(0) * load_(0);
    diag_sd_(i) = std::sqrt(std::max(var, 0.0));

    // projection of this row's remainder on cell i-1 onto the previous
    // row's diagonal remainder, which is carried by aux row i-1
    if (i >= 2 && diag_sd_(i - 1) > 0.0) {
      const double tp = t - h;
      double cross = 0.0;
      for (const auto& q : graded_gauss_rule(tp - h, tp, H))
        cross += q.w * kernel_K(H, t, q.x, h + q.to_hi) * kernel_K(H, tp, q.x, q.to_hi);
      prev_load_(i) = (cross - h * A_(i, i - 1) * A_(i - 1, i - 1)) / diag_sd_(i - 1);
    }
  }
}

BrownianDriver VolterraSampler::draw_driver(mc::SeedSpec seed, std::size_t d) const {
  mc::Philox rng(seed);
  const double sh = std::sqrt(T_ / static_cast<double>(n_));
  BrownianDriver drv;
  drv.dW.resize(n_, d);
  drv.aux.resize(n_ + 1, d);
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t j = 0; j < n_; ++j) drv.dW(j, c) = sh * rng.normal();
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t j = 0; j <= n_; ++j) drv.aux(j, c) = rng.normal();
  return drv;
}

PathMatrix VolterraSampler::assemble(const BrownianDriver& drv) const {
  if (static_cast<std::size_t>(drv.dW.rows()) != n_ || drv.aux.rows() != drv.dW.rows() + 1 ||
      drv.aux.cols() != drv.dW.cols())
    throw std::invalid_argument("Brownian driver does not match the sampler grid");
  const Eigen::Index d = drv.dW.cols();
  PathMatrix p;
  p.grid = TimeGrid::uniform(0.0, T_, n_);
  p.values = Eigen::MatrixXd::Zero(n_ + 1, d);
  Eigen::MatrixXd body = A_.triangularView<Eigen::Lower>() * drv.dW;
  for (Eigen::Index c = 0; c < d; ++c)
  {
    body.col(c) += load_ * drv.aux(0, c) + diag_sd_.cwiseProduct(drv.aux.col(c).tail(n_));
    body.col(c).tail(n_ - 1) += prev_load_.tail(n_ - 1).cwiseProduct(drv.aux.col(c).segment(1, n_ - 1));
  }
  p.values.bottomRows(n_) = body;
  p.driver_fingerprint = drv.fingerprint();
  p.driver = drv;
  p.method = "volterra";
  return p;
}

PathMatrix VolterraSampler::sample(mc::SeedSpec seed, std::size_t d) const {
  PathMatrix p = assemble(draw_driver(seed, d));
  p.seed = seed;
  return p;
}

Eigen::MatrixXd VolterraSampler::implied_covariance() const {
  const double h = T_ / static_cast<double>(n_);
  const Eigen::MatrixXd Al = A_.triangularView<Eigen::Lower>();
  Eigen::MatrixXd C = h * Al * Al.transpose() + load_ * load_.transpose();
  C.diagonal() += diag_sd_.cwiseAbs2() + prev_load_.cwiseAbs2();
  for (std::size_t i = 1; i < n_; ++i) {
    const auto a = static_cast<Eigen::Index>(i);
    C(a, a - 1) += prev_load_(a) * diag_sd_(a - 1);
    C(a - 1, a) = C(a, a - 1);
  }
  return C;
}

std::shared_ptr<const VolterraSampler> VolterraSampler::shared(double H, double T, std::size_t n) {
  return cached<VolterraSampler>(H, T, n);
}

PathMatrix simulate_fbm_cholesky(const FbmSpec& spec, mc::SeedSpec seed) {
  spec.validate();
  return CholeskySampler::shared(spec.H, spec.T, spec.n)->sample(seed, spec.d);
}

PathMatrix simulate_fbm_volterra(const FbmSpec& spec, mc::SeedSpec seed) {
  spec.validate();
  return VolterraSampler::shared(spec.H, spec.T, spec.n)->sample(seed, spec.d);
}

SamplerMethod parse_sampler_method(const std::string& name) {
  if (name == "cholesky") return SamplerMethod::cholesky;
  if (name == "volterra") return SamplerMethod::volterra;
  throw std::invalid_argument("unknown sampler method '" + name + "' (expected volterra or cholesky)");
}

std::string to_string(SamplerMethod m) { return m == SamplerMethod::cholesky ? "cholesky" : "volterra"; }

PathMatrix simulate_fbm(const FbmSpec& spec, mc::SeedSpec seed, SamplerMethod method) {
  return method == SamplerMethod::cholesky ? simulate_fbm_cholesky(spec, seed) : simulate_fbm_volterra(spec, seed);
}

std::string path_csv(const PathMatrix& path) {
  std::vector<std::string> header{"t"};
  for (std::size_t c = 0; c < path.dim(); ++c) header.push_back("component_" + std::to_string(c + 1));
  CsvTable table(std::move(header));
  for (std::size_t i = 0; i < path.nodes(); ++i) {
    auto& row = table.row();
    row << path.grid[i];
    for (std::size_t c = 0; c < path.dim(); ++c) row << path.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
  }
  return table.str();
}

void write_path_csv(const PathMatrix& path, const std::filesystem::path& file) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + file.string() + " for writing");
  f << path_csv(path);
}

}  // namespace skewfbm::fbm
