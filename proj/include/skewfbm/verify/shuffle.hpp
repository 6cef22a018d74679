#pragma once

#include <cstddef>
#include <vector>

namespace skewfbm::verify {

/// sigma(1) < ... < sigma(m) and sigma(m+1) < ... < sigma(m+n), stored
/// 0-based: sigma[j] is the slot of function j.
struct Shuffle {
  std::vector<std::size_t> sigma;
};

/// All (m+n)!/(m! n!) shuffles in lexicographic order of sigma. m + n <= 12.
std::vector<Shuffle> enumerate_shuffles(std::size_t m, std::size_t n);

/// Polynomial sum_k c_k x^k with coefficients in R (double or an exact
/// rational type).
template <class R>
struct Polynomial {
  std::vector<R> c;

  static Polynomial monomial(std::size_t p, R coef = R(1)) {
    Polynomial q;
    q.c.assign(p + 1, R(0));
    q.c[p] = coef;
    return q;
  }
  R operator()(const R& x) const {
    R acc(0);
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
  }
  Polynomial operator*(const Polynomial& o) const {
    Polynomial q;
    if (c.empty() || o.c.empty()) return q;
    q.c.assign(c.size() + o.c.size() - 1, R(0));
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < o.c.size(); ++j) q.c[i + j] += c[i] * o.c[j];
    return q;
  }
  /// x -> int_lo^x p(s) ds
  Polynomial integral_from(const R& lo) const {
    Polynomial q;
    q.c.assign(c.size() + 1, R(0));
    for (std::size_t k = 0; k < c.size(); ++k) q.c[k + 1] = c[k] / R(static_cast<int>(k + 1));
    q.c[0] = -q(lo);
    return q;
  }
};

/// x -> int over theta < s_m < ... < s_1 < x of prod_j s_j^{p_j}.
template <class R>
Polynomial<R> simplex_polynomial(const std::vector<std::size_t>& p, const R& theta) {
  Polynomial<R> acc;
  acc.c = {R(1)};
  for (std::size_t j = p.size(); j-- > 0;) acc = (acc * Polynomial<R>::monomial(p[j])).integral_from(theta);
  return acc;
}

/// int over theta < s_m < ... < s_1 < t of prod_j s_j^{p_j}, exact up to the
/// arithmetic of R.
template <class R>
R simplex_monomial_integral(const std::vector<std::size_t>& p, const R& theta, const R& t) {
  return simplex_polynomial<R>(p, theta)(t);
}

struct ShuffleCheck {
  double lhs = 0.0;  // product of the two simplex integrals
  double rhs = 0.0;  // sum over shuffles
  double residual = 0.0;
  std::size_t shuffles = 0;
};

/// f_j(s) = s^{p_j}; the first m exponents form the first block.
ShuffleCheck shuffle_integral_identity_check(std::size_t m, std::size_t n, const std::vector<std::size_t>& p,
                                             double theta, double t);

/// Nested integral with the block g_1..g_p inserted below s_k, and its
/// decomposition into simplex integrals over A_{n,p} (prefix f_1..f_k then
/// shuffles of f_{k+1..n} with g).
struct PartialShuffleCheck {
  double nested = 0.0;
  double decomposed = 0.0;
  double residual = 0.0;
  std::size_t terms = 0;          // #A_{n,p}
  double smallest_constant = 1.0; // max(1, #A^{1/(n+p)})
  bool bound_with_2 = false;      // #A <= 2^{n+p}
};

PartialShuffleCheck partial_shuffle_check(const std::vector<std::size_t>& f_exponents,
                                          const std::vector<std::size_t>& g_exponents, std::size_t k, double theta,
                                          double t);

/// Nested integral of partial_shuffle_check, generic in R.
template <class R>
R partial_shuffle_nested(const std::vector<std::size_t>& f, const std::vector<std::size_t>& g, std::size_t k,
                         const R& theta, const R& t) {
  // below s_k: the f-tail simplex and the g simplex, both with upper limit s_k
  const std::vector<std::size_t> tail(f.begin() + static_cast<long>(k), f.end());
  const Polynomial<R> below = simplex_polynomial<R>(tail, theta) * simplex_polynomial<R>(g, theta);
  // outer chain f_k, ..., f_1
  Polynomial<R> acc = below;
  for (std::size_t j = k; j-- > 0;) acc = (acc * Polynomial<R>::monomial(f[j])).integral_from(theta);
  return acc(t);
}

}  // namespace skewfbm::verify
