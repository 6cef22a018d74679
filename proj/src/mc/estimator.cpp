#include "skewfbm/mc/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace skewfbm::mc {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    comp_ += (sum_ - t) + x;
  else
    comp_ += (x - t) + sum_;
  sum_ = t;
}

EstimatorResult estimate(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("empty study");
  CompensatedSum s;
  for (double v : values) s.add(v);
  const double n = static_cast<double>(values.size());
  const double mean = s.value() / n;
  CompensatedSum ss;
  for (double v : values) ss.add((v - mean) * (v - mean));
  EstimatorResult r;
  r.mean = mean;
  r.count = values.size();
  r.std_error = values.size() > 1 ? std::sqrt(ss.value() / (n - 1.0) / n) : 0.0;
  return r;
}

double kish_ess(std::span<const double> weights) {
  CompensatedSum s, s2;
  for (double w : weights) {
    s.add(w);
    s2.add(w * w);
  }
  if (s2.value() <= 0.0) return 0.0;
  return s.value() * s.value() / s2.value();
}

EstimatorResult weighted_estimate(std::span<const double> values, std::span<const double> weights) {
  if (values.empty()) throw std::invalid_argument("empty study");
  if (values.size() != weights.size()) throw std::invalid_argument("weighted estimate: size mismatch");
  CompensatedSum sw, swf;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sw.add(weights[i]);
    swf.add(weights[i] * values[i]);
  }
  if (!(sw.value() > 0.0)) throw std::domain_error("weighted estimate: weights sum to zero");
  const double mean = swf.value() / sw.value();
  CompensatedSum var;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = weights[i] * (values[i] - mean);
    var.add(d * d);
  }
  EstimatorResult r;
  r.mean = mean;
  r.count = values.size();
  r.std_error = std::sqrt(var.value()) / sw.value();
  r.ess = kish_ess(weights);
  return r;
}

EstimatorResult importance_estimate(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw std::invalid_argument("importance estimate: size mismatch");
  std::vector<double> prod(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) prod[i] = weights[i] * values[i];
  EstimatorResult r = estimate(prod);
  r.ess = kish_ess(weights);
  return r;
}

EstimatorResult covariance_estimate(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("covariance estimate: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("covariance estimate needs at least two samples");
  const double mx = estimate(x).mean;
  const double my = estimate(y).mean;
  std::vector<double> prod(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) prod[i] = (x[i] - mx) * (y[i] - my);
  EstimatorResult r = estimate(prod);
  const double n = static_cast<double>(x.size());
  r.mean *= n / (n - 1.0);
  return r;
}

}  // namespace skewfbm::mc
