#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace skewfbm::verify {

/// Ryser's formula with Gray-code updates, O(2^n n). n <= 10.
double permanent(const Eigen::MatrixXd& A);

/// Sum over all n! permutations; the reference for permanent(). n <= 8.
double permanent_bruteforce(const Eigen::MatrixXd& A);

/// Symmetric to 1e-12 relative and smallest eigenvalue >= -1e-10.
bool is_psd(const Eigen::MatrixXd& A);

struct PermanentBound {
  double permanent = 0.0;
  double bound = 0.0;  // n! prod a_ii
  bool holds = false;
};

/// perm(A) <= n! prod a_ii for positive semidefinite A. Rejects non-PSD input.
PermanentBound psd_permanent_bound_check(const Eigen::MatrixXd& A);

/// Covariance of (X_1 repeated k_1 times, ..., X_n repeated k_n times) for
/// X with covariance `base`.
Eigen::MatrixXd repeated_row_covariance(const Eigen::MatrixXd& base, std::span<const std::size_t> multiplicity);

}  // namespace skewfbm::verify
