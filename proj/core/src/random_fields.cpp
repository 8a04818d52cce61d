#include "pqpf/random_fields.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "pqpf/error.hpp"
#include "pqpf/special_functions.hpp"

namespace pqpf {

double distance(Point a, Point b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

ExpCorrelation::ExpCorrelation(double range_km) : range_(range_km) {
  if (!(range_km > 0.0) || !std::isfinite(range_km)) {
    fail(ErrorKind::Domain, "correlation range must be positive, got " + std::to_string(range_km));
  }
}

double ExpCorrelation::operator()(double d) const noexcept { return std::exp(-d / range_); }

double exp_correlation(double distance_km, double range_km) {
  if (!(distance_km >= 0.0)) fail(ErrorKind::Domain, "distance must be nonnegative");
  return ExpCorrelation(range_km)(distance_km);
}

std::vector<Point> GridSpec::nodes() const {
  std::vector<Point> out;
  out.reserve(size());
  for (int row = 0; row < ny; ++row) {
    for (int col = 0; col < nx; ++col) out.push_back(node(col, row));
  }
  return out;
}

void GridSpec::validate() const {
  if (!(cell_km > 0.0) || !std::isfinite(cell_km)) fail(ErrorKind::Domain, "grid cell size must be positive");
  if (nx < 1 || ny < 1) fail(ErrorKind::Domain, "grid must have at least one node");
  if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) fail(ErrorKind::Domain, "grid origin must be finite");
}

Eigen::MatrixXd correlation_matrix(std::span<const Point> points, const ExpCorrelation& corr,
                                   std::vector<std::string>* warnings) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n == 0) fail(ErrorKind::Domain, "correlation matrix needs at least one site");
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double d = distance(points[i], points[j]);
      if (d == 0.0 && warnings != nullptr) {
        warnings->push_back("DegenerateMatrix: sites " + std::to_string(j) + " and " +
                            std::to_string(i) + " share coordinates");
      }
      m(i, j) = m(j, i) = corr(d);
    }
  }
  return m;
}

Eigen::MatrixXd correlation_matrix(std::span<const Site> sites, const ExpCorrelation& corr,
                                   std::vector<std::string>* warnings) {
  std::vector<Point> pts;
  pts.reserve(sites.size());
  for (const auto& s : sites) pts.push_back(s.location());
  return correlation_matrix(std::span<const Point>(pts), corr, warnings);
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& matrix) {
  Eigen::LLT<Eigen::MatrixXd> llt(matrix);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::MatrixXd jittered = matrix;
  jittered.diagonal().array() += 1e-10;
  llt.compute(jittered);
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::Numerical, "Cholesky factorization failed after diagonal jitter");
  }
  return llt.matrixL();
}

double mvn_log_density_factored(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                                const Eigen::MatrixXd& lower) {
  if (x.size() != mean.size() || x.size() != lower.rows()) {
    fail(ErrorKind::Domain, "dimension mismatch in multivariate normal density");
  }
  const Eigen::VectorXd u = lower.triangularView<Eigen::Lower>().solve(x - mean);
  const double log_det = 2.0 * lower.diagonal().array().log().sum();
  return -0.5 * u.squaredNorm() - 0.5 * log_det -
         static_cast<double>(x.size()) * special::kLogSqrt2Pi;
}

double mvn_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                       const Eigen::MatrixXd& corr) {
  if (corr.rows() != corr.cols()) fail(ErrorKind::Domain, "correlation matrix must be square");
  return mvn_log_density_factored(x, mean, cholesky_lower(corr));
}

MvnSampler::MvnSampler(Eigen::VectorXd mean, const Eigen::MatrixXd& corr)
    : mean_(std::move(mean)), lower_(cholesky_lower(corr)) {
  if (lower_.rows() != mean_.size()) fail(ErrorKind::Domain, "dimension mismatch in MVN sampler");
}

Eigen::VectorXd MvnSampler::sample(Rng& rng) const {
  Eigen::VectorXd n(mean_.size());
  for (Eigen::Index i = 0; i < n.size(); ++i) n[i] = rng.normal();
  return mean_ + lower_.triangularView<Eigen::Lower>() * n;
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& corr,
                           std::uint64_t seed) {
  Rng rng(seed);
  return MvnSampler(mean, corr).sample(rng);
}

// ---------------------------------------------------------------------------
// Circulant embedding

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

FftwBuffer make_buffer(std::size_t n) {
  auto* raw = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (raw == nullptr) throw std::bad_alloc();
  return FftwBuffer(raw);
}

int minimal_embedding(int n) { return n > 1 ? 2 * (n - 1) : 1; }

}  // namespace

struct CirculantEmbedding::Plan {
  fftw_plan plan = nullptr;
  std::size_t n = 0;

  Plan(int mx, int my) : n(static_cast<std::size_t>(mx) * static_cast<std::size_t>(my)) {
    auto in = make_buffer(n);
    auto out = make_buffer(n);
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_2d(my, mx, in.get(), out.get(), FFTW_FORWARD, FFTW_ESTIMATE);
    if (plan == nullptr) fail(ErrorKind::Numerical, "FFTW planning failed");
  }
  ~Plan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  void execute(fftw_complex* in, fftw_complex* out) const { fftw_execute_dft(plan, in, out); }
};

CirculantEmbedding::CirculantEmbedding(const GridSpec& grid, const ExpCorrelation& corr)
    : grid_(grid) {
  grid.validate();
  const int base_x = minimal_embedding(grid.nx);
  const int base_y = minimal_embedding(grid.ny);
  constexpr double kNegativeTolerance = 1e-10;

  for (int doubling = 0; doubling <= 2; ++doubling) {
    const int mx = base_x == 1 ? 1 : base_x << doubling;
    const int my = base_y == 1 ? 1 : base_y << doubling;
    auto plan = std::make_unique<Plan>(mx, my);
    auto in = make_buffer(plan->n);
    auto out = make_buffer(plan->n);
    for (int iy = 0; iy < my; ++iy) {
      const double dy = std::min(iy, my - iy) * grid.cell_km;
      for (int ix = 0; ix < mx; ++ix) {
        const double dx = std::min(ix, mx - ix) * grid.cell_km;
        auto& cell = in[static_cast<std::size_t>(iy) * mx + ix];
        cell[0] = corr(std::hypot(dx, dy));
        cell[1] = 0.0;
      }
    }
    plan->execute(in.get(), out.get());

    double lambda_max = 0.0;
    double lambda_min = 0.0;
    for (std::size_t k = 0; k < plan->n; ++k) {
      lambda_max = std::max(lambda_max, out[k][0]);
      lambda_min = std::min(lambda_min, out[k][0]);
    }
    min_rel_eigen_ = lambda_max > 0.0 ? lambda_min / lambda_max : -1.0;
    if (min_rel_eigen_ >= -kNegativeTolerance) {
      mx_ = mx;
      my_ = my;
      amplitude_.resize(plan->n);
      const double inv_n = 1.0 / static_cast<double>(plan->n);
      for (std::size_t k = 0; k < plan->n; ++k) {
        amplitude_[k] = std::sqrt(std::max(out[k][0], 0.0) * inv_n);
      }
      plan_ = std::move(plan);
      return;
    }
    // Both axes are degenerate: nothing left to enlarge.
    if (base_x == 1 && base_y == 1) break;
  }
  fail(ErrorKind::EmbeddingFailure,
       "circulant embedding is indefinite (relative min eigenvalue " +
           std::to_string(min_rel_eigen_) + ") after enlarging to 4x; shrink the grid, " +
           "reduce the range, or sample densely");
}

CirculantEmbedding::~CirculantEmbedding() = default;
CirculantEmbedding::CirculantEmbedding(CirculantEmbedding&&) noexcept = default;
CirculantEmbedding& CirculantEmbedding::operator=(CirculantEmbedding&&) noexcept = default;

std::vector<double> CirculantEmbedding::sample(Rng& rng) const {
  auto in = make_buffer(plan_->n);
  auto out = make_buffer(plan_->n);
  for (std::size_t k = 0; k < plan_->n; ++k) {
    in[k][0] = amplitude_[k] * rng.normal();
    in[k][1] = amplitude_[k] * rng.normal();
  }
  plan_->execute(in.get(), out.get());
  std::vector<double> field(grid_.size());
  for (int row = 0; row < grid_.ny; ++row) {
    for (int col = 0; col < grid_.nx; ++col) {
      field[static_cast<std::size_t>(row) * grid_.nx + col] =
          out[static_cast<std::size_t>(row) * mx_ + col][0];
    }
  }
  return field;
}

std::vector<double> sample_grf_grid(const GridSpec& grid, const ExpCorrelation& corr,
                                    std::uint64_t seed) {
  Rng rng(seed);
  return CirculantEmbedding(grid, corr).sample(rng);
}

// ---------------------------------------------------------------------------
// Truncated normal sampling

Eigen::MatrixXd inverse_from_lower(const Eigen::MatrixXd& lower) {
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(lower.rows(), lower.cols());
  const Eigen::MatrixXd inv_lower = lower.triangularView<Eigen::Lower>().solve(identity);
  return inv_lower.transpose() * inv_lower;
}

double sample_truncated_normal(double mean, double sd, Orthant side, Rng& rng) {
  // Standardized lower bound for the positive side; the nonpositive side is
  // the mirror image.
  const double sign = side == Orthant::Positive ? 1.0 : -1.0;
  const double m = sign * mean;
  const double a = -m / sd;  // truncation point in standard units, X > a
  const double tail = special::normal_sf(a);
  double x;
  if (tail > 1e-300) {
    // P(X > x) is uniform on (0, tail).
    x = -special::normal_quantile(tail * rng.uniform_open());
    x = std::max(x, a);
  } else {
    // Far tail: exponential approximation to the truncated normal beyond a.
    x = a - std::log(rng.uniform_open()) / a;
  }
  double value = sign * (m + sd * x);
  // Rounding can land exactly on the boundary; the positive side is open.
  if (side == Orthant::Positive && !(value > 0.0)) value = std::numeric_limits<double>::min();
  if (side == Orthant::Nonpositive && value > 0.0) value = 0.0;
  return value;
}

TruncatedMvnGibbs::TruncatedMvnGibbs(Eigen::VectorXd mean, const Eigen::MatrixXd& corr,
                                     OrthantConstraint constraint)
    : mean_(std::move(mean)), constraint_(std::move(constraint)) {
  if (corr.rows() != mean_.size() || corr.cols() != mean_.size()) {
    fail(ErrorKind::Domain, "dimension mismatch in truncated MVN sampler");
  }
  precision_ = inverse_from_lower(cholesky_lower(corr));
  init();
}

TruncatedMvnGibbs TruncatedMvnGibbs::from_precision(Eigen::VectorXd mean,
                                                    Eigen::MatrixXd precision,
                                                    OrthantConstraint constraint) {
  TruncatedMvnGibbs g;
  g.mean_ = std::move(mean);
  g.precision_ = std::move(precision);
  g.constraint_ = std::move(constraint);
  if (g.precision_.rows() != g.mean_.size() || g.precision_.cols() != g.mean_.size()) {
    fail(ErrorKind::Domain, "dimension mismatch in truncated MVN sampler");
  }
  g.init();
  return g;
}

void TruncatedMvnGibbs::init() {
  if (static_cast<Eigen::Index>(constraint_.size()) != mean_.size()) {
    fail(ErrorKind::Domain, "orthant constraint has the wrong dimension");
  }
  cond_sd_ = precision_.diagonal().array().rsqrt();
  reset();
}

void TruncatedMvnGibbs::reset() {
  state_.resize(mean_.size());
  for (Eigen::Index i = 0; i < mean_.size(); ++i) {
    const double mag = std::max(std::abs(mean_[i]), 0.5);
    state_[i] = constraint_[i] == Orthant::Positive ? mag : -mag;
  }
}

void TruncatedMvnGibbs::set_state(const Eigen::VectorXd& state) {
  if (state.size() != mean_.size()) fail(ErrorKind::Domain, "state dimension mismatch");
  for (Eigen::Index i = 0; i < state.size(); ++i) {
    const bool positive = state[i] > 0.0;
    if (positive != (constraint_[i] == Orthant::Positive)) {
      fail(ErrorKind::Domain, "initial state violates the orthant constraint");
    }
  }
  state_ = state;
}

void TruncatedMvnGibbs::sweep(Rng& rng) {
  const auto n = mean_.size();
  Eigen::VectorXd resid = state_ - mean_;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double qii = precision_(i, i);
    const double cross = precision_.col(i).dot(resid) - qii * resid[i];
    const double cond_mean = mean_[i] - cross / qii;
    state_[i] = sample_truncated_normal(cond_mean, cond_sd_[i], constraint_[i], rng);
    resid[i] = state_[i] - mean_[i];
  }
}

Eigen::MatrixXd sample_truncated_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& corr,
                                     const OrthantConstraint& constraint, int n_samples,
                                     int burn_in, std::uint64_t seed) {
  if (n_samples < 1) fail(ErrorKind::Domain, "n_samples must be at least 1");
  if (burn_in < 0) fail(ErrorKind::Domain, "burn_in must be nonnegative");
  TruncatedMvnGibbs gibbs(mean, corr, constraint);
  Rng rng(seed);
  for (int i = 0; i < burn_in; ++i) gibbs.sweep(rng);
  Eigen::MatrixXd out(n_samples, mean.size());
  for (int s = 0; s < n_samples; ++s) {
    gibbs.sweep(rng);
    out.row(s) = gibbs.state().transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------

double bilinear_interpolate(std::span<const double> field, const GridSpec& grid, Point site) {
  grid.validate();
  if (field.size() != grid.size()) fail(ErrorKind::Domain, "field size does not match grid");
  constexpr double kSlack = 1e-9;
  auto locate = [&](double coord, double origin, int n, const char* axis) {
    const double f = (coord - origin) / grid.cell_km;
    if (f < -kSlack || f > (n - 1) + kSlack) {
      fail(ErrorKind::OutOfDomain, std::string("site lies outside the grid along ") + axis);
    }
    const double clamped = std::clamp(f, 0.0, static_cast<double>(n - 1));
    const int i0 = std::min(static_cast<int>(std::floor(clamped)), std::max(n - 2, 0));
    return std::pair<int, double>{i0, n > 1 ? clamped - i0 : 0.0};
  };
  const auto [c0, tx] = locate(site.x, grid.origin_x, grid.nx, "x");
  const auto [r0, ty] = locate(site.y, grid.origin_y, grid.ny, "y");
  const int c1 = std::min(c0 + 1, grid.nx - 1);
  const int r1 = std::min(r0 + 1, grid.ny - 1);
  auto at = [&](int c, int r) { return field[static_cast<std::size_t>(r) * grid.nx + c]; };
  return (1.0 - tx) * (1.0 - ty) * at(c0, r0) + tx * (1.0 - ty) * at(c1, r0) +
         (1.0 - tx) * ty * at(c0, r1) + tx * ty * at(c1, r1);
}

}  // namespace pqpf
