#pragma once

// Stationary isotropic Gaussian random fields with exponential correlation:
// dense sampling at scattered sites, exact grid simulation by circulant
// embedding, multivariate normal densities and orthant-truncated Gibbs
// sampling.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pqpf/rng.hpp"

namespace pqpf {

struct Point {
  double x = 0.0;  // km
  double y = 0.0;  // km
};

struct Site {
  std::string id;
  double x_km = 0.0;
  double y_km = 0.0;

  Point location() const noexcept { return {x_km, y_km}; }
};

double distance(Point a, Point b) noexcept;

class ExpCorrelation {
 public:
  explicit ExpCorrelation(double range_km);

  double range() const noexcept { return range_; }
  double operator()(double distance_km) const noexcept;

 private:
  double range_;
};

// exp(-d / range).
double exp_correlation(double distance_km, double range_km);

// Regular grid; node (col, row) sits at (origin_x + col * cell, origin_y + row * cell).
// Fields on a grid are stored row-major: value(col, row) = field[row * nx + col].
struct GridSpec {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_km = 1.0;
  int nx = 1;
  int ny = 1;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
  Point node(int col, int row) const noexcept {
    return {origin_x + col * cell_km, origin_y + row * cell_km};
  }
  std::vector<Point> nodes() const;
  void validate() const;
};

Eigen::MatrixXd correlation_matrix(std::span<const Point> points, const ExpCorrelation& corr,
                                   std::vector<std::string>* warnings = nullptr);
Eigen::MatrixXd correlation_matrix(std::span<const Site> sites, const ExpCorrelation& corr,
                                   std::vector<std::string>* warnings = nullptr);

// Lower Cholesky factor. Retries once with 1e-10 added to the diagonal, then
// throws NumericalError.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& matrix);

double mvn_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                       const Eigen::MatrixXd& corr);

// Same density from a precomputed lower Cholesky factor.
double mvn_log_density_factored(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                                const Eigen::MatrixXd& lower);

class MvnSampler {
 public:
  MvnSampler(Eigen::VectorXd mean, const Eigen::MatrixXd& corr);

  Eigen::VectorXd sample(Rng& rng) const;
  Eigen::Index dimension() const noexcept { return mean_.size(); }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd lower_;
};

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& corr,
                           std::uint64_t seed);

// Exact simulation of a zero-mean, unit-variance stationary field on a grid.
// The embedding torus starts at the minimal even size and is doubled at most
// twice per axis until its spectrum is nonnegative; otherwise the constructor
// throws EmbeddingFailure.
class CirculantEmbedding {
 public:
  CirculantEmbedding(const GridSpec& grid, const ExpCorrelation& corr);
  ~CirculantEmbedding();
  CirculantEmbedding(CirculantEmbedding&&) noexcept;
  CirculantEmbedding& operator=(CirculantEmbedding&&) noexcept;

  // One field of grid.size() values, row-major.
  std::vector<double> sample(Rng& rng) const;

  int embedding_nx() const noexcept { return mx_; }
  int embedding_ny() const noexcept { return my_; }
  // Most negative eigenvalue before truncation, relative to the largest.
  double min_relative_eigenvalue() const noexcept { return min_rel_eigen_; }

 private:
  struct Plan;

  GridSpec grid_;
  int mx_ = 0;
  int my_ = 0;
  double min_rel_eigen_ = 0.0;
  std::vector<double> amplitude_;  // sqrt(lambda / (mx * my))
  std::unique_ptr<Plan> plan_;
};

std::vector<double> sample_grf_grid(const GridSpec& grid, const ExpCorrelation& corr,
                                    std::uint64_t seed);

enum class Orthant : std::uint8_t { Positive, Nonpositive };

// One sign restriction per coordinate: x_i > 0 or x_i <= 0.
using OrthantConstraint = std::vector<Orthant>;

Eigen::MatrixXd inverse_from_lower(const Eigen::MatrixXd& lower);

// Draw from N(mean, sd^2) restricted to the orthant side, by inversion in the
// tail that keeps precision.
double sample_truncated_normal(double mean, double sd, Orthant side, Rng& rng);

// Systematic-scan Gibbs sampler for N(mean, corr) restricted to an orthant.
class TruncatedMvnGibbs {
 public:
  TruncatedMvnGibbs(Eigen::VectorXd mean, const Eigen::MatrixXd& corr,
                    OrthantConstraint constraint);

  // Reuses a precision matrix (inverse correlation) shared across many chains.
  static TruncatedMvnGibbs from_precision(Eigen::VectorXd mean, Eigen::MatrixXd precision,
                                          OrthantConstraint constraint);

  // Feasible deterministic starting point.
  void reset();
  void set_state(const Eigen::VectorXd& state);
  const Eigen::VectorXd& state() const noexcept { return state_; }
  void sweep(Rng& rng);

 private:
  TruncatedMvnGibbs() = default;
  void init();

  Eigen::VectorXd mean_;
  Eigen::MatrixXd precision_;
  Eigen::VectorXd cond_sd_;
  OrthantConstraint constraint_;
  Eigen::VectorXd state_;
};

// n_samples consecutive post-burn-in states, one per row.
Eigen::MatrixXd sample_truncated_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& corr,
                                     const OrthantConstraint& constraint, int n_samples,
                                     int burn_in, std::uint64_t seed);

double bilinear_interpolate(std::span<const double> field, const GridSpec& grid, Point site);

}  // namespace pqpf
