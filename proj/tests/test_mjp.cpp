#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "zsinfer/errors.hpp"
#include "zsinfer/mjp_estimator.hpp"
#include "zsinfer/mjp_simulation.hpp"
#include "zsinfer/rng.hpp"

using namespace zsinfer;
using nlohmann::json;

namespace {

MjpObservationSet obs_from_fixture(const json& j) {
  MjpObservationSet obs;
  obs.n_states = j.at("K").get<int>();
  const auto grid = j.at("grid").get<std::vector<std::vector<double>>>();
  const auto values = j.at("values").get<std::vector<std::vector<int>>>();
  const auto lens = j.at("seq_lengths").get<std::vector<int>>();
  const auto rows = static_cast<Eigen::Index>(grid.size());
  Eigen::Index cols = 0;
  for (const auto& row : grid)
    cols = std::max(cols, static_cast<Eigen::Index>(row.size()));
  obs.grid = Eigen::MatrixXd::Zero(rows, cols);
  obs.values = Eigen::MatrixXi::Zero(rows, cols);
  obs.seq_lengths.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < grid[static_cast<std::size_t>(r)].size(); ++c) {
      obs.grid(r, static_cast<Eigen::Index>(c)) =
          grid[static_cast<std::size_t>(r)][c];
      obs.values(r, static_cast<Eigen::Index>(c)) =
          values[static_cast<std::size_t>(r)][c];
    }
    obs.seq_lengths(r) = lens[static_cast<std::size_t>(r)];
  }
  return obs;
}

Eigen::MatrixXd matrix_from(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.at(0).size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return m;
}

MjpObservationSet random_observations(Pcg32& rng, int k, int paths,
                                      int max_len) {
  MjpObservationSet obs;
  obs.n_states = k;
  obs.grid = Eigen::MatrixXd::Zero(paths, max_len);
  obs.values = Eigen::MatrixXi::Zero(paths, max_len);
  obs.seq_lengths.resize(paths);
  for (int p = 0; p < paths; ++p) {
    const int len = static_cast<int>(rng.uniform_int(max_len + 1));
    obs.seq_lengths(p) = len;
    double t = 0.0;
    for (int i = 0; i < len; ++i) {
      // Occasional repeated timestamps exercise the dt > 0 guard.
      if (i > 0 && rng.next_double() < 0.2)
        t += 0.0;
      else
        t += rng.exponential(4.0);
      obs.grid(p, i) = t;
      obs.values(p, i) = static_cast<int>(rng.uniform_int(k));
    }
  }
  return obs;
}

}  // namespace

TEST_CASE("estimator matches frozen vectors") {
  const json fixture = testutil::load_fixture("mjp_vectors.json");
  for (const auto& kase : fixture) {
    INFO(kase.at("name").get<std::string>());
    const MjpObservationSet obs = obs_from_fixture(kase);
    const MjpEstimate est = estimate_mjp_parameters(obs);
    const Eigen::MatrixXd want_q = matrix_from(kase.at("q"));
    REQUIRE(est.q.num_states() == want_q.rows());
    CHECK(testutil::max_abs_diff(est.q.entries(), want_q) <= 1e-9);
    const auto want_init = kase.at("init").get<std::vector<double>>();
    for (int i = 0; i < est.init.size(); ++i)
      CHECK(std::abs(est.init[i] - want_init[static_cast<std::size_t>(i)]) <=
            1e-9);
    CHECK(std::abs(est.typical_dt - kase.at("typical_dt").get<double>()) <=
          1e-9);
  }
}

TEST_CASE("estimator returns the trivial model for empty batches") {
  MjpObservationSet obs;
  obs.n_states = 4;
  obs.grid = Eigen::MatrixXd::Zero(3, 2);
  obs.values = Eigen::MatrixXi::Zero(3, 2);
  obs.seq_lengths = Eigen::VectorXi::Zero(3);
  const MjpEstimate est = estimate_mjp_parameters(obs);
  CHECK(est.q.entries().cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 4; ++i) CHECK(est.init[i] == doctest::Approx(0.25));
  CHECK(est.typical_dt == 1.0);
}

TEST_CASE("estimates are always valid models") {
  Pcg32 rng(81, 5);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_int(5));
    const MjpObservationSet obs =
        random_observations(rng, k, 1 + static_cast<int>(rng.uniform_int(6)),
                            1 + static_cast<int>(rng.uniform_int(12)));
    const MjpEstimate est = estimate_mjp_parameters(obs);
    CHECK(validate_generator(est.q.entries()).ok());
    CHECK(validate_probability(est.init.probs()).ok());
    CHECK(est.typical_dt > 0.0);
  }
}

TEST_CASE("rescaling the grid rescales the generator exactly") {
  Pcg32 rng(7, 7);
  const MjpObservationSet obs = random_observations(rng, 3, 6, 10);
  const MjpEstimate base = estimate_mjp_parameters(obs);

  MjpObservationSet scaled = obs;
  scaled.grid *= 4.0;
  const MjpEstimate fast = estimate_mjp_parameters(scaled);

  // A power-of-two rescaling is exact in floating point: q scales by 1/c
  // and the initial distribution is untouched.
  CHECK(testutil::max_abs_diff(fast.q.entries() * 4.0, base.q.entries()) ==
        0.0);
  CHECK((fast.init.probs() - base.init.probs()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(fast.typical_dt == 4.0 * base.typical_dt);
}

TEST_CASE("ratchet parameter extraction inverts the generator builder") {
  for (const auto& [v, r, b] :
       {std::tuple{1.0, 1.0, 1.0}, std::tuple{2.0, 0.5, 3.0},
        std::tuple{0.3, 4.0, 0.1}}) {
    const RateMatrix q = dfr_generator(v, r, b);
    const DfrParameters got = extract_dfr_parameters(q);
    CHECK(got.v == doctest::Approx(v).epsilon(1e-12));
    CHECK(got.r == doctest::Approx(r).epsilon(1e-12));
    CHECK(got.b == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("ratchet extraction rejects unusable generators") {
  Eigen::MatrixXd q4 = Eigen::MatrixXd::Zero(4, 4);
  CHECK_THROWS_AS(extract_dfr_parameters(RateMatrix(q4)), DataError);

  // All on-sector off-diagonals zero: nothing to fit the depth from.
  Eigen::MatrixXd q6 = Eigen::MatrixXd::Zero(6, 6);
  CHECK_THROWS_AS(extract_dfr_parameters(RateMatrix(q6)), DataError);
}

TEST_CASE("ratchet extraction tolerates isolated nonpositive entries") {
  // Zeroing one on-sector entry drops it from the fit instead of producing
  // -inf; the remaining entries still determine a depth.
  Eigen::MatrixXd q = dfr_generator(1.5, 1.0, 1.0).entries();
  q(0, 1) = 0.0;
  q.diagonal().setZero();
  for (int i = 0; i < 6; ++i) q(i, i) = -q.row(i).sum();
  const DfrParameters got = extract_dfr_parameters(RateMatrix(q));
  CHECK(std::isfinite(got.v));
  CHECK(got.v > 0.0);
}

TEST_CASE("cross entropy and fitness") {
  Eigen::VectorXd p(2), q(2);
  p << 1.0, 0.0;
  q << 0.5, 0.5;
  CHECK(cross_entropy(p, q) == doctest::Approx(std::log(2.0)));
  CHECK(cross_entropy(p, p) == doctest::Approx(0.0));

  // Zero predicted mass is clamped rather than infinite.
  Eigen::VectorXd z(2);
  z << 0.0, 1.0;
  CHECK(cross_entropy(p, z) == doctest::Approx(-std::log(1e-12)));

  Eigen::VectorXd len3(3);
  len3 << 0.2, 0.3, 0.5;
  CHECK_THROWS_AS(cross_entropy(p, len3), DataError);

  // Exact recovery of a deterministic start scores zero.
  Eigen::MatrixXd truth_q(2, 2);
  truth_q << -1.0, 1.0, 2.0, -2.0;
  Eigen::VectorXd start(2);
  start << 1.0, 0.0;
  MjpEstimate exact{RateMatrix(truth_q), ProbVector(start), 1.0};
  CHECK(mjp_fitness(exact, truth_q, start) == doctest::Approx(0.0));

  // Worse estimates score strictly lower.
  Eigen::MatrixXd off_q(2, 2);
  off_q << -2.0, 2.0, 2.0, -2.0;
  MjpEstimate off{RateMatrix(off_q), ProbVector::uniform(2), 1.0};
  CHECK(mjp_fitness(off, truth_q, start) < mjp_fitness(exact, truth_q, start));

  Eigen::MatrixXd wrong_shape = Eigen::MatrixXd::Zero(3, 3);
  CHECK_THROWS_AS(mjp_fitness(exact, wrong_shape, start), DataError);
}

TEST_CASE("estimator recovers a two-state chain from dense observations") {
  // Long regular observation of a fast-mixing chain: the estimate lands in
  // the right neighborhood (coarse-graining bias allowed).
  Eigen::MatrixXd q(2, 2);
  q << -1.0, 1.0, 1.5, -1.5;
  const RateMatrix truth(q);
  Pcg32 path_rng(0, 0);
  const int paths = 400, obs_count = 40;
  Eigen::VectorXd grid(obs_count);
  for (int i = 0; i < obs_count; ++i) grid(i) = 0.1 * i;
  const MjpObservationSet obs = sample_observation_set(
      truth, ProbVector::uniform(2), grid, 0.1 * (obs_count - 1), paths, 0.0,
      4242, 0);
  const MjpEstimate est = estimate_mjp_parameters(obs);
  CHECK(est.q(0, 1) == doctest::Approx(1.0).epsilon(0.35));
  CHECK(est.q(1, 0) == doctest::Approx(1.5).epsilon(0.35));
  CHECK(est.init[0] == doctest::Approx(0.5).epsilon(0.15));
}
