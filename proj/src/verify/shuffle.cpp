#include "skewfbm/verify/shuffle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace skewfbm::verify {

std::vector<Shuffle> enumerate_shuffles(std::size_t m, std::size_t n) {
  if (m + n > 12) throw std::invalid_argument("shuffle enumeration is limited to m + n <= 12");
  // choose the slots of the first block; the second block fills the rest in order
  std::vector<Shuffle> out;
  std::vector<bool> first(m + n, false);
  std::fill(first.begin(), first.begin() + static_cast<long>(m), true);
  do {
    Shuffle s;
    s.sigma.resize(m + n);
    std::size_t a = 0, b = m;
    for (std::size_t slot = 0; slot < m + n; ++slot) s.sigma[first[slot] ? a++ : b++] = slot;
    out.push_back(std::move(s));
  } while (std::prev_permutation(first.begin(), first.end()));
  std::sort(out.begin(), out.end(), [](const Shuffle& x, const Shuffle& y) { return x.sigma < y.sigma; });
  return out;
}

namespace {

// exponents placed in slot order: slot sigma[j] carries function j
std::vector<std::size_t> arrange(const Shuffle& s, const std::vector<std::size_t>& p) {
  std::vector<std::size_t> w(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) w[s.sigma[j]] = p[j];
  return w;
}

}  // namespace

ShuffleCheck shuffle_integral_identity_check(std::size_t m, std::size_t n, const std::vector<std::size_t>& p,
                                             double theta, double t) {
  if (p.size() != m + n) throw std::invalid_argument("shuffle check: need m + n exponents");
  if (!(theta < t)) throw std::invalid_argument("shuffle check: theta must be below t");
  const std::vector<std::size_t> a(p.begin(), p.begin() + static_cast<long>(m));
  const std::vector<std::size_t> b(p.begin() + static_cast<long>(m), p.end());
  ShuffleCheck out;
  out.lhs = simplex_monomial_integral<double>(a, theta, t) * simplex_monomial_integral<double>(b, theta, t);
  const auto sh = enumerate_shuffles(m, n);
  out.shuffles = sh.size();
  for (const auto& s : sh) out.rhs += simplex_monomial_integral<double>(arrange(s, p), theta, t);
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

PartialShuffleCheck partial_shuffle_check(const std::vector<std::size_t>& f, const std::vector<std::size_t>& g,
                                          std::size_t k, double theta, double t) {
  if (k < 1 || k > f.size()) throw std::invalid_argument("partial shuffle: need 1 <= k <= n");
  if (!(theta < t)) throw std::invalid_argument("partial shuffle: theta must be below t");
  PartialShuffleCheck out;
  out.nested = partial_shuffle_nested<double>(f, g, k, theta, t);
  const std::vector<std::size_t> tail(f.begin() + static_cast<long>(k), f.end());
  std::vector<std::size_t> merged = tail;
  merged.insert(merged.end(), g.begin(), g.end());
  for (const auto& s : enumerate_shuffles(tail.size(), g.size())) {
    std::vector<std::size_t> word(f.begin(), f.begin() + static_cast<long>(k));
    const auto rest = arrange(s, merged);
    word.insert(word.end(), rest.begin(), rest.end());
    out.decomposed += simplex_monomial_integral<double>(word, theta, t);
    ++out.terms;
  }
  out.residual = std::abs(out.nested - out.decomposed);
  const double np = static_cast<double>(f.size() + g.size());
  out.smallest_constant = std::max(1.0, std::pow(static_cast<double>(out.terms), 1.0 / np));
  out.bound_with_2 = static_cast<double>(out.terms) <= std::pow(2.0, np);
  return out;
}

}  // namespace skewfbm::verify
