#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "zsinfer/rng.hpp"
#include "zsinfer/types.hpp"

namespace zsinfer {

// Six-state flashing-ratchet generator. States 0..2 carry the potential
// (depth V), states 3..5 are the flat sector. Within the potential sector
// q(i, j) = exp(-V/2 * (j - i)); the flat sector hops at rate b; switching
// between corresponding states of the two sectors happens at rate r; all
// other cross-sector entries are zero. Requires r, b > 0.
RateMatrix dfr_generator(double v, double r, double b);

// Samples one right-continuous piecewise-constant path on [0, horizon].
// The initial state is drawn from init; holding times are exponential with
// the state's exit rate and the next state is chosen proportionally to the
// outgoing rates. A state with no outgoing rate holds until the horizon.
Trajectory gillespie_sample(const RateMatrix& q, const ProbVector& init,
                            double horizon, Pcg32& rng);

// State of the path at each grid time (right-continuous: a grid point equal
// to a jump time reads the post-jump state). Grid must be nondecreasing and
// lie within [0, horizon].
std::vector<int> observe_on_grid(const Trajectory& traj,
                                 std::span<const double> grid);

// Distribution at time t under dp/dt = Q^T p, computed by uniformization:
// Poisson-weighted powers of the uniformized kernel I + Q/lambda, truncated
// once the accumulated Poisson mass is within 1e-12 of 1 (past the mode).
// Per-entry absolute error is below 1e-10.
ProbVector solve_master_equation(const RateMatrix& q, const ProbVector& init,
                                 double t);

// Unique normalized left null vector of the generator. A multi-dimensional
// null space (reducible chain with several closed classes) is an error.
ProbVector stationary_distribution(const RateMatrix& q);

// Relaxation times -1/Re(lambda) for every eigenvalue with Re(lambda) below
// -1e-12, sorted descending (slowest first).
std::vector<double> relaxation_times(const RateMatrix& q);

// Expected hitting times of target from every state (0 at the target),
// obtained from the linear system on the non-target states. A singular
// system means the target is unreachable from some state and is an error.
Eigen::VectorXd mean_first_passage_times(const RateMatrix& q, int target);

// Handling of one-sided zero probability flux in entropy computations:
// error out (the true value is infinite) or floor both fluxes at 1e-12.
enum class ZeroFluxPolicy { kError, kFloor };

// Instantaneous total entropy production rate
//   1/2 * sum_{i,j} (p_i q_ij - p_j q_ji) * ln(p_i q_ij / (p_j q_ji)).
// Pairs whose fluxes are both below 1e-300 contribute zero. Nonnegative.
double entropy_production_rate(const RateMatrix& q, const ProbVector& p,
                               ZeroFluxPolicy policy = ZeroFluxPolicy::kError);

// Integral of the entropy production rate over [0, horizon] along the
// master-equation trajectory started at init, by composite Simpson rule on
// n_quad uniform nodes (an even count is bumped up to the next odd one).
double total_entropy_production(const RateMatrix& q, const ProbVector& init,
                                double horizon, int n_quad = 201,
                                ZeroFluxPolicy policy = ZeroFluxPolicy::kError);

enum class GridMode { kRegular, kIrregular };
enum class InitMode { kStationary, kDirichlet };

// Random-process family for benchmark generation: a connected random graph
// (uniform spanning tree plus independently retained extra edges) carries
// scaled-Beta rates, with the Beta shape pair drawn per process from a small
// fixed family. All paths of one process share a single observation grid.
struct SyntheticMjpConfig {
  int k_min = 2;
  int k_max = 6;
  double extra_edge_prob = 0.3;
  double rate_scale = 10.0;
  InitMode init_mode = InitMode::kStationary;
  double dirichlet_concentration = 1.0;
  double horizon = 10.0;
  int max_grid_points = 100;
  int min_grid_points = 10;
  GridMode grid_mode = GridMode::kIrregular;
  double corruption = 0.01;
  int paths_per_process = 300;
};

struct SyntheticMjp {
  RateMatrix q;
  ProbVector init;
  MjpObservationSet observations;
};

// Simulates `paths` trajectories of (q, init) over [0, grid.max()] horizon
// given by `horizon`, records each on the shared grid, and corrupts every
// recorded state independently with the given probability (uniform over the
// other states). Path i draws from rng stream stream_base + 1 + i; the
// stream_base slot itself is reserved for process-level draws by callers.
MjpObservationSet sample_observation_set(const RateMatrix& q,
                                         const ProbVector& init,
                                         const Eigen::VectorXd& grid,
                                         double horizon, int paths,
                                         double corruption, std::uint64_t seed,
                                         std::uint64_t stream_base);

// Draws one random process and its observed paths. Process-level choices
// (state count, graph, rates, initial distribution, grid) use the rng stream
// stream_base; path i uses stream_base + 1 + i, so datasets are reproducible
// for a fixed (seed, stream_base) and paths can be sampled in parallel.
// Corruption independently replaces each recorded state with a uniformly
// chosen different state at the configured fraction.
SyntheticMjp generate_synthetic_mjp(const SyntheticMjpConfig& cfg,
                                    std::uint64_t seed,
                                    std::uint64_t stream_base);

}  // namespace zsinfer
