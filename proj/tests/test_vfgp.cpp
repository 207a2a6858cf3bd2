#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "vfsm/vfgp.hpp"

using namespace vfsm;
using namespace vfsm::testing;

namespace {

// Fixed two-dimensional instance also evaluated by tests/oracles/frozen_values.py.
VfInstance fixed_instance() {
  Vector wl(2), wd(2);
  wl << 1.2, 0.8;
  wd << 2.0, 1.5;
  VfgpParams p{SeKernel(1.1, wl), NoiseSpec(0.01), SeKernel(0.4, wd), NoiseSpec(0.002), 1.7};
  Dataset low{Matrix(4, 2), Vector(4)};
  low.x << 0.0, 0.0, 0.5, 0.2, 0.9, 0.7, 0.3, 0.8;
  low.y << 1.0, -0.5, 0.7, 0.2;
  Dataset high{Matrix(2, 2), Vector(2)};
  high.x << 0.4, 0.3, 0.8, 0.9;
  high.y << 1.5, 0.1;
  return {p, VfDataset{low, high}};
}

SeKernel vanishing_kernel(Index d) { return SeKernel(1e-200, Vector::Ones(d)); }

double smooth(const Point& x) { return std::sin(3.0 * x(0)) + x(1) * x(1); }

}  // namespace

TEST_CASE("fixed instance against the frozen dense reference") {
  const VfInstance inst = fixed_instance();
  const VfgpModel m(inst.params, inst.data);
  Matrix q(2, 2);
  q << 0.2, 0.5, 0.6, 0.6;
  const Prediction p = m.predict(q);
  CHECK(p.mean(0) == doctest::Approx(1.9544913069346896).epsilon(1e-12));
  CHECK(p.mean(1) == doctest::Approx(0.5232045450122182).epsilon(1e-12));
  CHECK(p.covariance(0, 0) == doctest::Approx(0.13273146389005008).epsilon(1e-12));
  CHECK(p.covariance(1, 1) == doctest::Approx(0.09183433906606986).epsilon(1e-12));
  const Vector noisy = m.predict_variance(q, true);
  CHECK(noisy(0) ==
        doctest::Approx(0.13273146389005008 + inst.params.high_noise_variance()).epsilon(1e-12));
}

TEST_CASE("joint covariance layout") {
  Rng rng(1);
  VfInstance inst = random_vf_instance(rng, 2, 6, 3);
  const Index nl = 6, nh = 3;

  inst.params.rho = 0.0;
  const Matrix k0 = assemble_joint_cov(inst.params, inst.data.low.x, inst.data.high.x).matrix();
  CHECK(k0.topRightCorner(nl, nh).cwiseAbs().maxCoeff() == 0.0);
  const Matrix want_high = gram(inst.params.diff_kernel, inst.data.high.x, inst.data.high.x) +
                           inst.params.diff_noise.variance * Matrix::Identity(nh, nh);
  CHECK((k0.bottomRightCorner(nh, nh) - want_high).cwiseAbs().maxCoeff() < 1e-14);

  VfgpParams single = inst.params;
  single.rho = 1.0;
  single.diff_kernel = vanishing_kernel(2);
  single.diff_noise = NoiseSpec(0.0);
  const Matrix k1 = assemble_joint_cov(single, inst.data.low.x, inst.data.high.x).matrix();
  Matrix stacked(nl + nh, 2);
  stacked << inst.data.low.x, inst.data.high.x;
  const Matrix want = gram(single.low_kernel, stacked, stacked) +
                      single.low_noise.variance * Matrix::Identity(nl + nh, nl + nh);
  CHECK((k1 - want).cwiseAbs().maxCoeff() < 1e-14);

  inst.params.rho = 1.3;
  const Matrix k = assemble_joint_cov(inst.params, inst.data.low.x, inst.data.high.x).matrix();
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * k.cwiseAbs().maxCoeff());
  CHECK((k - dense_joint(inst.params, inst.data).cov).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("random instances match the dense reference") {
  Rng rng(2);
  for (int trial = 0; trial < 25; ++trial) {
    const Index d = 1 + trial % 4;
    const VfInstance inst = random_vf_instance(rng, d, 8, 4);
    const VfgpModel m(inst.params, inst.data);
    const Matrix q = random_points(rng, 6, d);
    const Prediction got = m.predict(q);
    const Prediction want = dense_vfgp(inst.params, inst.data, q);
    CHECK(relative_error(got.mean, want.mean) < 1e-9);
    CHECK(relative_error(got.variance(), want.variance()) < 1e-9);
    CHECK((m.predict_mean(q) - got.mean).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((m.predict_variance(q) - got.variance()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(got.variance().minCoeff() >= 0.0);
  }
}

TEST_CASE("zero correlation decouples the fidelities") {
  Rng rng(3);
  VfInstance inst = random_vf_instance(rng, 2, 10, 5);
  inst.params.rho = 0.0;
  const VfgpModel vf(inst.params, inst.data);
  const GpModel gp(inst.params.diff_kernel, inst.params.diff_noise, inst.data.high);
  const Matrix q = random_points(rng, 7, 2);
  const Prediction a = vf.predict(q);
  const Prediction b = gp.predict(q, false);
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((a.covariance - b.covariance).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("single-process limit equals a gp on the stacked sample") {
  Rng rng(4);
  VfInstance inst = random_vf_instance(rng, 3, 9, 4);
  inst.params.rho = 1.0;
  inst.params.diff_kernel = vanishing_kernel(3);
  inst.params.diff_noise = NoiseSpec(0.0);
  Dataset stacked{Matrix(13, 3), Vector(13)};
  stacked.x << inst.data.low.x, inst.data.high.x;
  stacked.y << inst.data.low.y, inst.data.high.y;
  const VfgpModel vf(inst.params, inst.data);
  const GpModel gp(inst.params.low_kernel, inst.params.low_noise, stacked);
  const Matrix q = random_points(rng, 10, 3);
  CHECK((vf.predict_mean(q) - gp.predict_mean(q)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((vf.predict_variance(q) - gp.predict_variance(q, false)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ordering within a fidelity block does not matter") {
  Rng rng(5);
  const VfInstance inst = random_vf_instance(rng, 2, 10, 6);
  VfDataset shuffled = inst.data;
  shuffled.low.x = inst.data.low.x.colwise().reverse();
  shuffled.low.y = inst.data.low.y.reverse();
  shuffled.high.x = inst.data.high.x.colwise().reverse();
  shuffled.high.y = inst.data.high.y.reverse();
  const Matrix q = random_points(rng, 8, 2);
  const Prediction a = VfgpModel(inst.params, inst.data).predict(q);
  const Prediction b = VfgpModel(inst.params, shuffled).predict(q);
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((a.covariance - b.covariance).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fit recovers a linear link") {
  Rng rng(6);
  const Matrix xl = random_points(rng, 50, 2);
  const Matrix xh = random_points(rng, 20, 2);
  Vector yl(50), yh(20);
  for (Index i = 0; i < 50; ++i) yl(i) = smooth(xl.row(i));
  for (Index i = 0; i < 20; ++i) yh(i) = 2.0 * smooth(xh.row(i));
  const VfgpModel m = fit_vfgp(VfDataset{Dataset{xl, yl}, Dataset{xh, yh}});
  CHECK(m.params().rho == doctest::Approx(2.0).epsilon(0.025));
  CHECK(m.params().diff_kernel.variance() < 1e-3);
  const Matrix q = random_points(rng, 50, 2);
  Vector truth(50);
  for (Index i = 0; i < 50; ++i) truth(i) = 2.0 * smooth(q.row(i));
  CHECK((m.predict_mean(q) - truth).cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("high sample with no new information") {
  Rng rng(7);
  const Matrix xl = random_points(rng, 30, 2);
  Vector yl(30);
  for (Index i = 0; i < 30; ++i) yl(i) = smooth(xl.row(i));
  const Dataset high{xl.topRows(10), yl.head(10)};
  const VfgpModel m = fit_vfgp(VfDataset{Dataset{xl, yl}, high});
  CHECK(m.params().rho == doctest::Approx(1.0).epsilon(0.05));
  // Interpolation at the high-fidelity training inputs.
  CHECK((m.predict_mean(high.x) - high.y).cwiseAbs().maxCoeff() < 1e-5);

  FitConfig low_floor;
  low_floor.nugget_floor = 1e-10;
  const VfgpModel tight = fit_vfgp(VfDataset{Dataset{xl, yl}, high}, low_floor);
  CHECK((tight.predict_mean(high.x) - high.y).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("fit preconditions") {
  Rng rng(8);
  const VfInstance inst = random_vf_instance(rng, 2, 5, 1);
  CHECK_THROWS_AS(fit_vfgp(inst.data), InvalidArgument);
  VfDataset mixed = random_vf_instance(rng, 2, 5, 3).data;
  mixed.high.x = random_points(rng, 3, 3);
  CHECK_THROWS_AS(fit_vfgp(mixed), DimensionMismatch);
  const VfgpModel m(inst.params, inst.data);
  CHECK_THROWS_AS(m.predict(Matrix::Zero(2, 3)), DimensionMismatch);
}

TEST_CASE("difference sample") {
  Matrix x = Matrix::Zero(2, 1);
  Vector yh(2), low(2);
  yh << 3.0, 5.0;
  low << 1.0, 2.0;
  const DiffDataset d = make_diff_dataset(x, yh, low, 2.0);
  CHECK(d.y_diff(0) == 1.0);
  CHECK(d.y_diff(1) == 1.0);
  CHECK_THROWS_AS(make_diff_dataset(x, yh, Vector::Zero(3), 1.0), DimensionMismatch);
}
