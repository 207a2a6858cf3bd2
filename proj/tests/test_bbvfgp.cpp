#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "support.hpp"
#include "vfsm/bbvfgp.hpp"

using namespace vfsm;
using namespace vfsm::testing;

namespace {

std::shared_ptr<LowFidelityOracle> constant_oracle(double v) {
  return std::make_shared<LowFidelityOracle>([v](const Point&) { return v; });
}

std::shared_ptr<LowFidelityOracle> sum_oracle() {
  return std::make_shared<LowFidelityOracle>([](const Point& x) { return x.sum(); });
}

}  // namespace

TEST_CASE("fixed instance against the frozen expanded system") {
  Vector wl(2), wd(2);
  wl << 1.2, 0.8;
  wd << 2.0, 1.5;
  const VfgpParams p{SeKernel(1.1, wl), NoiseSpec(0.01), SeKernel(0.4, wd), NoiseSpec(0.002), 1.7};
  Dataset low{Matrix(4, 2), Vector(4)};
  low.x << 0.0, 0.0, 0.5, 0.2, 0.9, 0.7, 0.3, 0.8;
  low.y << 1.0, -0.5, 0.7, 0.2;
  Dataset high{Matrix(2, 2), Vector(2)};
  high.x << 0.4, 0.3, 0.8, 0.9;
  high.y << 1.5, 0.1;
  const VfgpModel base(p, VfDataset{low, high});
  Point x(2);
  x << 0.2, 0.5;

  const BbPrediction noisy = BbVfgpModel(base, constant_oracle(0.9)).predict_one(x);
  CHECK(noisy.oracle_value == 0.9);
  CHECK(noisy.mean == doctest::Approx(2.2809280750195815).epsilon(1e-12));
  CHECK(noisy.variance == doctest::Approx(0.10041086188812987).epsilon(1e-10));

  const BbPrediction exact =
      BbVfgpModel(base, constant_oracle(0.9), BbOptions{false}).predict_one(x);
  CHECK(exact.mean == doctest::Approx(2.405039701166416).epsilon(1e-12));
  CHECK(exact.variance == doctest::Approx(0.0881225326780446).epsilon(1e-10));
}

TEST_CASE("random instances match a dense expanded solve") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 1 + trial % 3;
    const VfInstance inst = random_vf_instance(rng, d, 8, 4);
    const VfgpModel base(inst.params, inst.data);
    for (bool noisy : {true, false}) {
      const BbVfgpModel bb(base, sum_oracle(), BbOptions{noisy});
      const Matrix q = random_points(rng, 3, d);
      for (Index i = 0; i < q.rows(); ++i) {
        const BbPrediction got = bb.predict_one(q.row(i));
        const auto [mean, var] =
            dense_expanded(inst.params, inst.data, q.row(i), q.row(i).sum(), noisy);
        CHECK(std::abs(got.mean - mean) <= 1e-9 * std::max(1.0, std::abs(mean)));
        CHECK(std::abs(got.variance - std::max(var, 0.0)) <= 1e-9 * std::max(1.0, std::abs(var)));
      }
    }
  }
}

TEST_CASE("zero correlation ignores the oracle") {
  Rng rng(2);
  VfInstance inst = random_vf_instance(rng, 2, 8, 4);
  inst.params.rho = 0.0;
  const VfgpModel base(inst.params, inst.data);
  const Matrix q = random_points(rng, 5, 2);
  const Vector mean = base.predict_mean(q);
  const Vector var = base.predict_variance(q);
  for (double v : {-100.0, 0.0, 37.0}) {
    const BbBatch b = BbVfgpModel(base, constant_oracle(v)).predict_batch(q);
    CHECK((b.mean() - mean).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((b.variance() - var).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("conditioning never increases the variance") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const VfInstance inst = random_vf_instance(rng, 2, 10, 5);
    const VfgpModel base(inst.params, inst.data);
    const Matrix q = random_points(rng, 10, 2);
    for (bool noisy : {true, false}) {
      const BbBatch b = BbVfgpModel(base, sum_oracle(), BbOptions{noisy}).predict_batch(q);
      CHECK((b.variance() - base.predict_variance(q)).maxCoeff() <= 1e-10);
      CHECK(b.variance().minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("batches and memoization") {
  Rng rng(4);
  const VfInstance inst = random_vf_instance(rng, 2, 8, 4);
  const VfgpModel base(inst.params, inst.data);
  const Matrix factor_before = base.joint_factor().lower();

  auto oracle = sum_oracle();
  const BbVfgpModel bb(base, oracle);
  const Point x = random_points(rng, 1, 2).row(0);
  const BbPrediction one = bb.predict_one(x);
  const BbBatch single = bb.predict_batch(Matrix(x));
  CHECK(single.points.size() == 1);
  CHECK(single.points[0].mean == one.mean);
  CHECK(single.points[0].variance == one.variance);
  CHECK(single.oracle_calls == 0);  // memoized by the first call

  Matrix rep(3, 2);
  const Point y = random_points(rng, 1, 2).row(0);
  rep << y, x, y;
  const BbBatch b = bb.predict_batch(rep);
  CHECK(b.oracle_calls == 1);
  CHECK(b.points[0].mean == b.points[2].mean);
  CHECK(b.points[0].variance == b.points[2].variance);
  CHECK(b.points[1].mean == one.mean);
  CHECK(oracle->evaluations() == 2);
  CHECK(oracle->requests() == 5);

  CHECK(bb.base().joint_factor().lower() == factor_before);
  CHECK(bb.factor().has_inverse());
  CHECK(bb.factor().dim() == 12);
  CHECK_THROWS_AS(bb.predict_batch(Matrix(0, 2)), InvalidArgument);
  CHECK_THROWS_AS(bb.predict_one(Point::Zero(3)), DimensionMismatch);
}

TEST_CASE("query at a low-fidelity training point") {
  Rng rng(5);
  const VfInstance inst = random_vf_instance(rng, 2, 8, 4);
  const VfgpModel base(inst.params, inst.data);
  const Point x = inst.data.low.x.row(3);
  const BbPrediction p = BbVfgpModel(base, sum_oracle()).predict_one(x);
  CHECK(std::isfinite(p.mean));
  CHECK(p.variance >= 0.0);
}

TEST_CASE("oracle failures name the point") {
  Rng rng(6);
  const VfInstance inst = random_vf_instance(rng, 1, 5, 3);
  const VfgpModel base(inst.params, inst.data);
  Point x(1);
  x << 0.25;
  auto throwing = std::make_shared<LowFidelityOracle>(
      [](const Point&) -> double { throw std::runtime_error("solver crashed"); });
  try {
    BbVfgpModel(base, throwing).predict_one(x);
    FAIL("expected OracleFailure");
  } catch (const OracleFailure& e) {
    CHECK(std::string(e.what()).find("0.25") != std::string::npos);
    CHECK(std::string(e.what()).find("solver crashed") != std::string::npos);
  }
  auto nan = std::make_shared<LowFidelityOracle>([](const Point&) { return std::nan(""); });
  CHECK_THROWS_AS(BbVfgpModel(base, nan).predict_one(x), OracleFailure);
  CHECK(format_point(x) == "(0.25)");
}

TEST_CASE("external process oracle") {
  LowFidelityOracle twice(make_process_oracle(
      "while read a b; do awk -v a=$a -v b=$b 'BEGIN { print 2 * (a + b) }'; done"));
  Point x(2);
  x << 0.5, 1.25;
  CHECK(twice(x) == doctest::Approx(3.5));
  CHECK(twice(x) == doctest::Approx(3.5));
  CHECK(twice.evaluations() == 1);
  x << 1.0, 1.0;
  CHECK(twice(x) == doctest::Approx(4.0));

  LowFidelityOracle garbage(make_process_oracle("while read l; do echo nope; done"));
  CHECK_THROWS_AS(garbage(x), OracleFailure);
  LowFidelityOracle dead(make_process_oracle("exit 0"));
  CHECK_THROWS_AS(dead(x), OracleFailure);
}
