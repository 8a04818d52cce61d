#include "pqpf/verification.hpp"

#include <algorithm>
#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/prim_minimum_spanning_tree.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "pqpf/error.hpp"
#include "pqpf/special_functions.hpp"

namespace pqpf {
namespace {

void require_members(std::size_t m) {
  if (m == 0) fail(ErrorKind::Domain, "ensemble needs at least one member");
}

std::vector<double> sorted(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return s;
}

// Uniform tie-break: 1 + #below + U{0..#equal}.
int randomized_rank(std::size_t below, std::size_t equal, Rng& rng) {
  return 1 + static_cast<int>(below) + static_cast<int>(rng.uniform_int(0, static_cast<std::int64_t>(equal)));
}

}  // namespace

double crps_ensemble(std::span<const double> members, double obs) {
  require_members(members.size());
  const auto x = sorted(members);
  const double m = static_cast<double>(x.size());
  double abs_err = 0.0;
  double spread = 0.0;  // sum_{i<j} (x_(j) - x_(i))
  for (std::size_t i = 0; i < x.size(); ++i) {
    abs_err += std::abs(x[i] - obs);
    spread += x[i] * (2.0 * static_cast<double>(i) - m + 1.0);
  }
  return std::max(0.0, abs_err / m - spread / (m * m));
}

PredictiveCdf PredictiveCdf::empirical(std::span<const double> members) {
  require_members(members.size());
  auto x = sorted(members);
  PredictiveCdf f;
  f.breakpoints = x;
  f.upper = std::max(x.back(), 0.0);
  f.cdf = [x = std::move(x)](double t) {
    const auto k = std::upper_bound(x.begin(), x.end(), t) - x.begin();
    return static_cast<double>(k) / static_cast<double>(x.size());
  };
  return f;
}

PredictiveCdf PredictiveCdf::mixed(double p0, const GammaMarginal& g) {
  if (!(p0 >= 0.0 && p0 <= 1.0)) fail(ErrorKind::Domain, "p0 must lie in [0, 1]");
  PredictiveCdf f;
  f.breakpoints = {0.0};
  if (p0 < 1.0) {
    const double y = special::gamma_quantile(g.alpha, g.beta, 1e-12, true);
    f.upper = y * y * y;
  }
  f.cdf = [p0, g](double t) {
    if (t < 0.0) return 0.0;
    return mixed_cdf(p0, g, Accumulation(t));
  };
  return f;
}

PredictiveCdf PredictiveCdf::point_mass(double at) {
  const double v[1] = {at};
  return empirical(v);
}

double crps_numeric(const PredictiveCdf& forecast, double obs, double tolerance) {
  if (!(obs >= 0.0) || !std::isfinite(obs)) fail(ErrorKind::Domain, "observation must be >= 0");
  const double upper = std::max(obs, forecast.upper) + 10.0;
  std::vector<double> knots{0.0, obs, upper};
  for (const double b : forecast.breakpoints) {
    if (b > 0.0 && b < upper) knots.push_back(b);
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  // Integrate on the cube-root scale, t = u^3, which removes the t^(a/3)
  // behaviour of the Gamma part near zero.
  auto integrand = [&](double u) {
    const double t = u * u * u;
    const double step = obs <= t ? 1.0 : 0.0;
    const double d = forecast.cdf(t) - step;
    return d * d * 3.0 * u * u;
  };
  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 15>;
  double total = 0.0;
  double total_error = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    double err = 0.0;
    total += Quadrature::integrate(integrand, std::cbrt(knots[k]), std::cbrt(knots[k + 1]), 20,
                                   1e-12, &err);
    total_error += err;
  }
  if (!std::isfinite(total) || total_error > tolerance * std::max(1.0, total)) {
    fail(ErrorKind::Numerical, "CRPS quadrature did not converge (error estimate " +
                                   std::to_string(total_error) + ")");
  }
  return total;
}

double ensemble_median(std::span<const double> members) {
  require_members(members.size());
  const auto x = sorted(members);
  const std::size_t n = x.size();
  return n % 2 == 1 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

double mae_of_median(std::span<const double> members, double obs) {
  return std::abs(ensemble_median(members) - obs);
}

double brier_score(double prob, bool occurred) {
  if (!(prob >= 0.0 && prob <= 1.0)) {
    fail(ErrorKind::Domain, "probability outside [0, 1]: " + std::to_string(prob));
  }
  const double o = occurred ? 1.0 : 0.0;
  return (prob - o) * (prob - o);
}

double energy_score(const Eigen::MatrixXd& members, const Eigen::VectorXd& obs) {
  require_members(static_cast<std::size_t>(members.rows()));
  if (members.cols() != obs.size()) {
    fail(ErrorKind::Domain, "energy score dimension mismatch: members have " +
                                std::to_string(members.cols()) + " columns, observation " +
                                std::to_string(obs.size()));
  }
  const auto m = members.rows();
  double to_obs = 0.0;
  double spread = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    to_obs += (members.row(i).transpose() - obs).norm();
    for (Eigen::Index j = i + 1; j < m; ++j) spread += (members.row(i) - members.row(j)).norm();
  }
  const double md = static_cast<double>(m);
  return std::max(0.0, to_obs / md - spread / (md * md));
}

int verification_rank(std::span<const double> members, double obs, Rng& rng) {
  require_members(members.size());
  std::size_t below = 0, equal = 0;
  for (const double x : members) {
    below += x < obs;
    equal += x == obs;
  }
  return randomized_rank(below, equal, rng);
}

double pit_value(double p0, const GammaMarginal& marginal, double obs, Rng& rng) {
  if (!(p0 >= 0.0 && p0 <= 1.0)) fail(ErrorKind::Domain, "p0 must lie in [0, 1]");
  if (obs == 0.0) return rng.uniform() * p0;
  return mixed_cdf(p0, marginal, Accumulation(obs));
}

double pit_empirical(std::span<const double> members, double obs, Rng& rng) {
  require_members(members.size());
  std::size_t below = 0, at_or_below = 0;
  for (const double x : members) {
    below += x < obs;
    at_or_below += x <= obs;
  }
  const double m = static_cast<double>(members.size());
  const double lo = static_cast<double>(below) / m;
  const double hi = static_cast<double>(at_or_below) / m;
  return lo + rng.uniform() * (hi - lo);
}

double mst_length(const Eigen::MatrixXd& points) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n <= 1) return 0.0;
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS, boost::no_property,
                                      boost::property<boost::edge_weight_t, double>>;
  Graph g(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
      boost::add_edge(i, j, (points.row(a) - points.row(b)).norm(), g);
    }
  }
  std::vector<Graph::vertex_descriptor> parent(n);
  boost::prim_minimum_spanning_tree(g, parent.data());
  const auto weight = boost::get(boost::edge_weight, g);
  double total = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    if (parent[v] != v) total += boost::get(weight, boost::edge(parent[v], v, g).first);
  }
  return total;
}

int mst_rank(const Eigen::MatrixXd& members, const Eigen::VectorXd& obs, Rng& rng) {
  require_members(static_cast<std::size_t>(members.rows()));
  if (members.cols() != obs.size()) fail(ErrorKind::Domain, "MST rank dimension mismatch");
  const double base = mst_length(members);
  const double tie = 1e-12 * std::max(1.0, base);
  std::size_t below = 0, equal = 0;
  Eigen::MatrixXd swapped = members;
  for (Eigen::Index i = 0; i < members.rows(); ++i) {
    swapped.row(i) = obs.transpose();
    const double len = mst_length(swapped);
    swapped.row(i) = members.row(i);
    if (std::abs(len - base) <= tie) {
      ++equal;
    } else if (len < base) {
      ++below;
    }
  }
  return randomized_rank(below, equal, rng);
}

std::vector<ReliabilityBin> reliability_table(std::span<const double> probs,
                                              const std::vector<bool>& outcomes, int n_bins) {
  if (probs.size() != outcomes.size()) {
    fail(ErrorKind::Domain, "reliability table needs one outcome per probability");
  }
  if (n_bins < 1) fail(ErrorKind::Domain, "reliability table needs at least one bin");
  std::vector<ReliabilityBin> bins(static_cast<std::size_t>(n_bins));
  std::vector<double> hits(bins.size(), 0.0);
  for (std::size_t k = 0; k < bins.size(); ++k) bins[k].center = (static_cast<double>(k) + 0.5) / n_bins;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::Domain, "probability outside [0, 1]");
    const auto k = std::min(static_cast<std::size_t>(p * n_bins), bins.size() - 1);
    bins[k].mean_prob += p;
    hits[k] += outcomes[i] ? 1.0 : 0.0;
    ++bins[k].count;
  }
  for (std::size_t k = 0; k < bins.size(); ++k) {
    if (bins[k].count == 0) continue;
    const double n = static_cast<double>(bins[k].count);
    bins[k].mean_prob /= n;
    bins[k].observed_freq = hits[k] / n;
  }
  return bins;
}

std::vector<std::size_t> rank_histogram(std::span<const int> ranks, int n_members) {
  if (n_members < 1) fail(ErrorKind::Domain, "rank histogram needs m >= 1");
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_members) + 1, 0);
  for (const int r : ranks) {
    if (r < 1 || r > n_members + 1) {
      fail(ErrorKind::Domain, "rank " + std::to_string(r) + " outside 1.." + std::to_string(n_members + 1));
    }
    ++counts[static_cast<std::size_t>(r - 1)];
  }
  return counts;
}

std::vector<std::size_t> pit_histogram(std::span<const double> values, int n_bins) {
  if (n_bins < 1) fail(ErrorKind::Domain, "histogram needs at least one bin");
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_bins), 0);
  for (const double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::Domain, "PIT value outside [0, 1]");
    ++counts[std::min(static_cast<std::size_t>(v * n_bins), counts.size() - 1)];
  }
  return counts;
}

double chi_square_statistic(std::span<const std::size_t> counts) {
  if (counts.empty()) return 0.0;
  double total = 0.0;
  for (const auto c : counts) total += static_cast<double>(c);
  if (total == 0.0) return 0.0;
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (const auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

double chi_square_critical(std::size_t n_bins, double level) {
  if (n_bins < 2) fail(ErrorKind::Domain, "chi-square check needs at least two bins");
  return special::chi_square_quantile(static_cast<double>(n_bins - 1), level);
}

bool passes_uniformity(std::span<const std::size_t> counts, double level) {
  return chi_square_statistic(counts) < chi_square_critical(counts.size(), level);
}

}  // namespace pqpf
