#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "skewfbm/core/grid.hpp"
#include "skewfbm/mc/rng.hpp"

namespace skewfbm::fbm {

struct FbmSpec {
  double H = 0.2;
  std::size_t d = 1;
  double T = 1.0;
  std::size_t n = 256;

  /// Throws std::invalid_argument on an invalid field.
  void validate() const;
  TimeGrid grid() const { return TimeGrid::uniform(0.0, T, n); }
  double step() const { return T / static_cast<double>(n); }
  nlohmann::json to_json() const;
};

/// Normal variates that fully determine a Volterra path.
struct BrownianDriver {
  /// n x d Brownian increments W(t_{j+1}) - W(t_j).
  Eigen::MatrixXd dW;
  /// (n+1) x d standard normals for the within-cell fluctuation of W that
  /// the increments do not capture; row 0 is shared by every node, row i
  /// belongs to node i.
  Eigen::MatrixXd aux;

  /// Hash of the bit patterns; identifies the driver a path was built from.
  std::uint64_t fingerprint() const;
};

struct PathMatrix {
  TimeGrid grid;
  /// (n+1) x d, row 0 is zero.
  Eigen::MatrixXd values;
  std::optional<BrownianDriver> driver;
  std::uint64_t driver_fingerprint = 0;
  std::string method;
  mc::SeedSpec seed;
  double jitter = 0.0;

  std::size_t dim() const { return static_cast<std::size_t>(values.cols()); }
  std::size_t nodes() const { return static_cast<std::size_t>(values.rows()); }
};

/// Exact Gaussian sampler from the Cholesky factor of the n x n covariance
/// of (B_{t_1}, ..., B_{t_n}). Limited to n <= 4096 (128 MiB factor).
class CholeskySampler {
public:
  static constexpr std::size_t kMaxSteps = 4096;

  CholeskySampler(double H, double T, std::size_t n);

  PathMatrix sample(mc::SeedSpec seed, std::size_t d) const;
  /// Jitter added to the diagonal before a successful factorisation (0 or 1e-12).
  double jitter() const { return jitter_; }
  const Eigen::MatrixXd& factor() const { return L_; }

  static std::shared_ptr<const CholeskySampler> shared(double H, double T, std::size_t n);

private:
  double H_, T_;
  std::size_t n_;
  Eigen::MatrixXd L_;
  double jitter_ = 0.0;
};

/// Volterra representation B_{t_i} = int_0^{t_i} K_H(t_i, u) dW_u on a
/// uniform grid. The kernel row is split per cell into its cell average,
/// which multiplies the Brownian increment, and a remainder. Remainders are
/// kept where they matter: on the first cell along the u^{H-1/2} shape
/// (shared by all rows) and on the diagonal cell of each row (independent
/// per row), plus the part of each row's remainder on the previous cell
/// that is correlated with the previous row's diagonal remainder.
class VolterraSampler {
public:
  VolterraSampler(double H, double T, std::size_t n);

  PathMatrix sample(mc::SeedSpec seed, std::size_t d) const;
  BrownianDriver draw_driver(mc::SeedSpec seed, std::size_t d) const;
  /// Path from a given driver; deterministic.
  PathMatrix assemble(const BrownianDriver& driver) const;
  /// Covariance matrix of (B_{t_1}, ..., B_{t_n}) implied by the scheme.
  Eigen::MatrixXd implied_covariance() const;

  /// Cell-average kernel weights: weights()(i, j) multiplies dW_j for node i+1.
  const Eigen::MatrixXd& weights() const { return A_; }

  static std::shared_ptr<const VolterraSampler> shared(double H, double T, std::size_t n);

private:
  double H_, T_;
  std::size_t n_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd load_;
  Eigen::VectorXd diag_sd_;
  Eigen::VectorXd prev_load_;
};

PathMatrix simulate_fbm_cholesky(const FbmSpec& spec, mc::SeedSpec seed);
PathMatrix simulate_fbm_volterra(const FbmSpec& spec, mc::SeedSpec seed);

enum class SamplerMethod { cholesky, volterra };

SamplerMethod parse_sampler_method(const std::string& name);
std::string to_string(SamplerMethod m);
PathMatrix simulate_fbm(const FbmSpec& spec, mc::SeedSpec seed, SamplerMethod method);

/// Columns t, component_1, ..., component_d.
void write_path_csv(const PathMatrix& path, const std::filesystem::path& file);
std::string path_csv(const PathMatrix& path);

}  // namespace skewfbm::fbm
