#include "skewfbm/verify/permanent.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace skewfbm::verify {

double permanent(const Eigen::MatrixXd& A) {
  const auto n = A.rows();
  if (A.cols() != n) throw std::invalid_argument("permanent: matrix must be square");
  if (n > 10) throw std::invalid_argument("permanent: n must be <= 10");
  if (n == 0) return 1.0;
  // perm = (-1)^n sum_{S} (-1)^{|S|} prod_i sum_{j in S} a_ij
  std::vector<double> row(static_cast<std::size_t>(n), 0.0);
  double total = 0.0;
  std::uint32_t gray = 0;
  for (std::uint32_t k = 1; k < (1u << n); ++k) {
    const std::uint32_t next = k ^ (k >> 1);
    const int j = std::countr_zero(next ^ gray);
    const double sign = (next >> j) & 1u ? 1.0 : -1.0;
    for (Eigen::Index i = 0; i < n; ++i) row[static_cast<std::size_t>(i)] += sign * A(i, j);
    gray = next;
    double prod = 1.0;
    for (double r : row) prod *= r;
    total += (std::popcount(gray) % 2 == n % 2) ? prod : -prod;
  }
  return total;
}

double permanent_bruteforce(const Eigen::MatrixXd& A) {
  const auto n = A.rows();
  if (A.cols() != n) throw std::invalid_argument("permanent: matrix must be square");
  if (n > 8) throw std::invalid_argument("brute-force permanent: n must be <= 8");
  std::vector<Eigen::Index> pi(static_cast<std::size_t>(n));
  std::iota(pi.begin(), pi.end(), 0);
  double total = 0.0;
  do {
    double prod = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) prod *= A(i, pi[static_cast<std::size_t>(i)]);
    total += prod;
  } while (std::next_permutation(pi.begin(), pi.end()));
  return total;
}

bool is_psd(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) return false;
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -1e-10;
}

PermanentBound psd_permanent_bound_check(const Eigen::MatrixXd& A) {
  if (!is_psd(A)) throw std::invalid_argument("permanent bound: matrix is not positive semidefinite");
  PermanentBound out;
  out.permanent = permanent(A);
  out.bound = std::tgamma(static_cast<double>(A.rows()) + 1.0) * A.diagonal().prod();
  out.holds = out.permanent <= out.bound * (1.0 + 1e-12);
  return out;
}

Eigen::MatrixXd repeated_row_covariance(const Eigen::MatrixXd& base, std::span<const std::size_t> multiplicity) {
  if (static_cast<std::size_t>(base.rows()) != multiplicity.size()) throw std::invalid_argument("multiplicity count mismatch");
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < multiplicity.size(); ++i)
    for (std::size_t r = 0; r < multiplicity[i]; ++r) idx.push_back(static_cast<Eigen::Index>(i));
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd out(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) out(a, b) = base(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
  return out;
}

}  // namespace skewfbm::verify
