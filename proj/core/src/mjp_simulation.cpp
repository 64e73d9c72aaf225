#include "zsinfer/mjp_simulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "zsinfer/errors.hpp"

namespace zsinfer {

namespace {

constexpr double kFluxZero = 1e-300;
constexpr double kFluxFloor = 1e-12;

double pair_term(double f, double g, ZeroFluxPolicy policy) {
  const bool f_zero = f < kFluxZero;
  const bool g_zero = g < kFluxZero;
  if (f_zero && g_zero) return 0.0;
  if (policy == ZeroFluxPolicy::kFloor) {
    f = std::max(f, kFluxFloor);
    g = std::max(g, kFluxFloor);
  } else if (f_zero || g_zero) {
    throw DataError(
        "infinite entropy production: one-sided probability flux between two "
        "states");
  }
  return (f - g) * std::log(f / g);
}

// Decodes a Prüfer sequence over K labeled nodes into the K-1 tree edges.
// Quadratic scan, fine for the small state counts used here.
std::vector<std::pair<int, int>> prufer_tree(const std::vector<int>& seq, int k) {
  std::vector<int> degree(static_cast<std::size_t>(k), 1);
  for (int s : seq) ++degree[static_cast<std::size_t>(s)];
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(k - 1));
  for (int s : seq) {
    for (int j = 0; j < k; ++j) {
      if (degree[static_cast<std::size_t>(j)] == 1) {
        edges.emplace_back(j, s);
        --degree[static_cast<std::size_t>(j)];
        --degree[static_cast<std::size_t>(s)];
        break;
      }
    }
  }
  int u = -1;
  for (int j = 0; j < k; ++j)
    if (degree[static_cast<std::size_t>(j)] == 1) {
      if (u < 0) {
        u = j;
      } else {
        edges.emplace_back(u, j);
        break;
      }
    }
  return edges;
}

}  // namespace

RateMatrix dfr_generator(double v, double r, double b) {
  if (!(r > 0.0) || !(b > 0.0))
    throw ConfigError("flashing-ratchet rates r and b must be positive");
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i != j) q(i, j) = std::exp(-0.5 * v * static_cast<double>(j - i));
      if (i != j) q(i + 3, j + 3) = b;
    }
  for (int i = 0; i < 3; ++i) {
    q(i, i + 3) = r;
    q(i + 3, i) = r;
  }
  q.diagonal() = -q.rowwise().sum();
  return RateMatrix(std::move(q));
}

Trajectory gillespie_sample(const RateMatrix& q, const ProbVector& init,
                            double horizon, Pcg32& rng) {
  if (!(horizon > 0.0)) throw ConfigError("simulation horizon must be positive");
  const int k = q.num_states();
  Trajectory traj;
  traj.horizon = horizon;
  int state = static_cast<int>(rng.categorical(
      std::span<const double>(init.probs().data(),
                              static_cast<std::size_t>(init.probs().size()))));
  traj.jump_times.push_back(0.0);
  traj.states.push_back(state);
  double t = 0.0;
  std::vector<double> weights(static_cast<std::size_t>(k));
  while (true) {
    const double exit_rate = -q(state, state);
    if (!(exit_rate > 0.0)) break;
    t += rng.exponential(exit_rate);
    if (t > horizon) break;
    for (int j = 0; j < k; ++j)
      weights[static_cast<std::size_t>(j)] = j == state ? 0.0 : q(state, j);
    state = static_cast<int>(rng.categorical(weights));
    traj.jump_times.push_back(t);
    traj.states.push_back(state);
  }
  return traj;
}

std::vector<int> observe_on_grid(const Trajectory& traj,
                                 std::span<const double> grid) {
  std::vector<int> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double tau = grid[i];
    if (tau < 0.0 || tau > traj.horizon)
      throw DataError("observation time " + std::to_string(tau) +
                      " lies outside the simulated horizon [0, " +
                      std::to_string(traj.horizon) + "]");
    auto it = std::upper_bound(traj.jump_times.begin(), traj.jump_times.end(), tau);
    const auto idx = static_cast<std::size_t>(it - traj.jump_times.begin()) - 1;
    out[i] = traj.states[idx];
  }
  return out;
}

ProbVector solve_master_equation(const RateMatrix& q, const ProbVector& init,
                                 double t) {
  if (t < 0.0) throw ConfigError("master equation requires t >= 0");
  const int k = q.num_states();
  const double lambda = (-q.entries().diagonal()).maxCoeff();
  const double rate = lambda * t;
  if (!(rate > 0.0)) return init;

  Eigen::MatrixXd kernel_t =
      (Eigen::MatrixXd::Identity(k, k) + q.entries() / lambda).transpose();
  Eigen::VectorXd v = init.probs();
  const double log_rate = std::log(rate);

  Eigen::VectorXd result = std::exp(-rate) * v;
  double cum = std::exp(-rate);
  double log_weight = -rate;
  for (std::size_t n = 1;; ++n) {
    v = kernel_t * v;
    log_weight += log_rate - std::log(static_cast<double>(n));
    const double w = std::exp(log_weight);
    result += w * v;
    cum += w;
    if (static_cast<double>(n) >= rate && (1.0 - cum < 1e-12 || w < 1e-18)) break;
  }
  return ProbVector(result);
}

ProbVector stationary_distribution(const RateMatrix& q) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(q.entries().transpose());
  if (lu.dimensionOfKernel() != 1)
    throw DataError("non-unique stationary distribution");
  Eigen::VectorXd v = lu.kernel().col(0);
  const double total = v.sum();
  if (total == 0.0) throw DataError("non-unique stationary distribution");
  v /= total;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i) < 0.0 && v(i) > -1e-9) v(i) = 0.0;
  v /= v.sum();
  return ProbVector(v);
}

std::vector<double> relaxation_times(const RateMatrix& q) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(q.entries(), false);
  std::vector<double> times;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double re = es.eigenvalues()(i).real();
    if (re < -1e-12) times.push_back(-1.0 / re);
  }
  std::sort(times.begin(), times.end(), std::greater<>());
  return times;
}

Eigen::VectorXd mean_first_passage_times(const RateMatrix& q, int target) {
  const int k = q.num_states();
  if (target < 0 || target >= k)
    throw ConfigError("target state " + std::to_string(target) +
                      " outside [0, " + std::to_string(k) + ")");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(k);
  if (k == 1) return out;

  std::vector<int> rest;
  rest.reserve(static_cast<std::size_t>(k - 1));
  for (int i = 0; i < k; ++i)
    if (i != target) rest.push_back(i);
  const int n = k - 1;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a(i, j) = q(rest[static_cast<std::size_t>(i)], rest[static_cast<std::size_t>(j)]);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible())
    throw DataError("target state " + std::to_string(target) +
                    " is unreachable from some state");
  const Eigen::VectorXd m = lu.solve(Eigen::VectorXd::Constant(n, -1.0));
  for (int i = 0; i < n; ++i) out(rest[static_cast<std::size_t>(i)]) = m(i);
  return out;
}

double entropy_production_rate(const RateMatrix& q, const ProbVector& p,
                               ZeroFluxPolicy policy) {
  const int k = q.num_states();
  if (p.probs().size() != k)
    throw DataError("distribution length does not match the generator");
  double total = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      total += pair_term(p[i] * q(i, j), p[j] * q(j, i), policy);
  return total;
}

double total_entropy_production(const RateMatrix& q, const ProbVector& init,
                                double horizon, int n_quad,
                                ZeroFluxPolicy policy) {
  if (horizon < 0.0) throw ConfigError("integration horizon must be nonnegative");
  if (n_quad < 2) throw ConfigError("quadrature needs at least 2 nodes");
  if (horizon == 0.0) return 0.0;
  int n = n_quad;
  if (n % 2 == 0) ++n;
  const double h = horizon / static_cast<double>(n - 1);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = h * static_cast<double>(i);
    const double f =
        entropy_production_rate(q, solve_master_equation(q, init, t), policy);
    const double coeff = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    total += coeff * f;
  }
  return total * h / 3.0;
}

SyntheticMjp generate_synthetic_mjp(const SyntheticMjpConfig& cfg,
                                    std::uint64_t seed,
                                    std::uint64_t stream_base) {
  if (cfg.k_min < 1 || cfg.k_max < cfg.k_min)
    throw ConfigError("state-count range is empty");
  if (cfg.corruption < 0.0 || cfg.corruption >= 1.0)
    throw ConfigError("corruption fraction must lie in [0, 1)");
  if (cfg.min_grid_points < 2 || cfg.max_grid_points < cfg.min_grid_points)
    throw ConfigError("grid-point range is empty");
  if (!(cfg.horizon > 0.0)) throw ConfigError("horizon must be positive");
  if (cfg.paths_per_process < 1) throw ConfigError("need at least one path");

  Pcg32 rng(seed, stream_base);
  const int k =
      cfg.k_min + static_cast<int>(rng.uniform_int(cfg.k_max - cfg.k_min + 1));

  // Connected adjacency: uniform labeled tree, then optional extra edges.
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(k, k);
  if (k > 1) {
    std::vector<int> prufer(static_cast<std::size_t>(std::max(0, k - 2)));
    for (auto& s : prufer) s = static_cast<int>(rng.uniform_int(k));
    auto edges = prufer_tree(prufer, k);
    std::vector<bool> allowed(static_cast<std::size_t>(k * k), false);
    for (auto [u, w] : edges) {
      allowed[static_cast<std::size_t>(u * k + w)] = true;
      allowed[static_cast<std::size_t>(w * k + u)] = true;
    }
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) {
        if (allowed[static_cast<std::size_t>(i * k + j)]) continue;
        if (rng.next_double() < cfg.extra_edge_prob) {
          allowed[static_cast<std::size_t>(i * k + j)] = true;
          allowed[static_cast<std::size_t>(j * k + i)] = true;
        }
      }

    // One Beta shape pair per process, one independent rate per direction.
    constexpr double kShapes[3][2] = {{1.0, 2.0}, {2.0, 2.0}, {2.0, 5.0}};
    const auto shape = kShapes[rng.uniform_int(3)];
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (i != j && allowed[static_cast<std::size_t>(i * k + j)])
          q(i, j) = cfg.rate_scale * rng.beta(shape[0], shape[1]);
    q.diagonal() = -q.rowwise().sum();
  }
  RateMatrix rate_matrix(std::move(q));

  ProbVector init = ProbVector::uniform(k);
  if (k > 1) {
    if (cfg.init_mode == InitMode::kStationary) {
      init = stationary_distribution(rate_matrix);
    } else {
      Eigen::VectorXd draw(k);
      rng.dirichlet(cfg.dirichlet_concentration,
                    std::span<double>(draw.data(), static_cast<std::size_t>(k)));
      init = ProbVector(draw);
    }
  }

  // One shared grid per process, regular or sorted uniform with t=0 first.
  const int span = cfg.max_grid_points - cfg.min_grid_points + 1;
  const int len = cfg.min_grid_points + static_cast<int>(rng.uniform_int(span));
  Eigen::VectorXd grid(len);
  if (cfg.grid_mode == GridMode::kRegular) {
    for (int i = 0; i < len; ++i)
      grid(i) = cfg.horizon * static_cast<double>(i) / static_cast<double>(len - 1);
  } else {
    grid(0) = 0.0;
    std::vector<double> draws(static_cast<std::size_t>(len - 1));
    for (auto& d : draws) d = cfg.horizon * rng.next_double();
    std::sort(draws.begin(), draws.end());
    for (int i = 1; i < len; ++i) grid(i) = draws[static_cast<std::size_t>(i - 1)];
  }

  MjpObservationSet obs =
      sample_observation_set(rate_matrix, init, grid, cfg.horizon,
                             cfg.paths_per_process, cfg.corruption, seed,
                             stream_base);
  return {std::move(rate_matrix), std::move(init), std::move(obs)};
}

MjpObservationSet sample_observation_set(const RateMatrix& q,
                                         const ProbVector& init,
                                         const Eigen::VectorXd& grid,
                                         double horizon, int paths,
                                         double corruption, std::uint64_t seed,
                                         std::uint64_t stream_base) {
  if (paths < 1) throw ConfigError("need at least one path");
  if (corruption < 0.0 || corruption >= 1.0)
    throw ConfigError("corruption fraction must lie in [0, 1)");
  const int k = q.num_states();
  const auto len = static_cast<int>(grid.size());
  MjpObservationSet obs;
  obs.n_states = k;
  obs.grid = grid.transpose().replicate(paths, 1);
  obs.values = Eigen::MatrixXi::Zero(paths, len);
  obs.seq_lengths = Eigen::VectorXi::Constant(paths, len);
  for (int p = 0; p < paths; ++p) {
    Pcg32 path_rng(seed, stream_base + 1 + static_cast<std::uint64_t>(p));
    const Trajectory traj = gillespie_sample(q, init, horizon, path_rng);
    auto states = observe_on_grid(
        traj, std::span<const double>(grid.data(), static_cast<std::size_t>(len)));
    for (int i = 0; i < len; ++i) {
      int s = states[static_cast<std::size_t>(i)];
      if (corruption > 0.0 && path_rng.next_double() < corruption && k > 1) {
        const int shift = static_cast<int>(path_rng.uniform_int(k - 1));
        s = shift >= s ? shift + 1 : shift;
      }
      obs.values(p, i) = s;
    }
  }
  return obs;
}

}  // namespace zsinfer
