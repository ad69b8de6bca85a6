#include <doctest.h>

#include <numbers>
#include <random>

#include "helpers.hpp"
#include "scenegen/latent.hpp"

using namespace scenegen;
using namespace scenegen::testing;
using doctest::Approx;

namespace {

Trajectory random_walk(std::mt19937_64& rng, int rows) {
  Trajectory t(rows, 2);
  t.row(0) << uniform(rng, -5, 5), uniform(rng, -5, 5);
  for (int h = 1; h < rows; ++h) {
    t.row(h) = t.row(h - 1) + Eigen::RowVector2d(uniform(rng, -1, 2), uniform(rng, -1, 1));
  }
  return t;
}

}  // namespace

TEST_CASE("local frame transforms") {
  Trajectory t(3, 2);
  t << 0, 0, 1, 0, 2, 0.5;
  const Trajectory same = to_local_frame(t, {0, 0, 0, 1, 0});
  CHECK((same - t).norm() == 0.0);

  Trajectory p(1, 2);
  p << 1, 2;
  const Trajectory local = to_local_frame(p, {1, 1, std::numbers::pi / 2, 0, 0});
  CHECK(local(0, 0) == Approx(1.0));
  CHECK(std::abs(local(0, 1)) < 1e-12);

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Trajectory w = random_walk(rng, 12);
    const AgentInit a{uniform(rng, -9, 9), uniform(rng, -9, 9), uniform(rng, -3, 3), 1, 0};
    CHECK((from_local_frame(to_local_frame(w, a), a) - w).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("flatten interleaves coordinates") {
  Trajectory t(2, 2);
  t << 1, 2, 3, 4;
  const Eigen::VectorXd f = flatten(t);
  CHECK(f == Eigen::Vector4d(1, 2, 3, 4));
  CHECK(unflatten(f) == t);
}

TEST_CASE("identical trajectories have zero variance") {
  std::mt19937_64 rng(1);
  const Trajectory t = random_walk(rng, 8);
  const PcaModel m = pca_fit(std::vector<Trajectory>(12, t));
  CHECK(m.explained_variance.cwiseAbs().maxCoeff() < 1e-20);
  CHECK(encode(m, t).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rank-2 affine family round trips with two components") {
  std::mt19937_64 rng(3);
  const Trajectory base = random_walk(rng, 10), u = random_walk(rng, 10), v = random_walk(rng, 10);
  std::vector<Trajectory> set;
  for (int i = 0; i < 20; ++i) set.push_back(base + uniform(rng, -2, 2) * u + uniform(rng, -2, 2) * v);
  const PcaModel m = pca_fit(set, 2);
  for (const auto& t : set) CHECK((decode(m, encode(m, t)) - t).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(m.residual_bound < 1e-9);
}

TEST_CASE("explained variance matches a covariance eigen-decomposition") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  const int rows = 6, dim = 12, n = 400;
  Eigen::VectorXd spectrum(dim);
  for (int i = 0; i < dim; ++i) spectrum[i] = 10.0 / (1 + i * i);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(dim, dim)).householderQ();
  std::vector<Trajectory> set;
  Eigen::MatrixXd data(n, dim);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd z(dim);
    for (int j = 0; j < dim; ++j) z[j] = std::sqrt(spectrum[j]) * normal(rng);
    const Eigen::VectorXd x = q * z;
    data.row(i) = x.transpose();
    set.push_back(unflatten(x));
  }
  const PcaModel m = pca_fit(set, 10);
  REQUIRE(m.points() == rows);

  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / (n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  for (int c = 0; c < 10; ++c) {
    CHECK(m.explained_variance[c] == Approx(eig.eigenvalues()[dim - 1 - c]).epsilon(1e-6));
    if (c > 0) CHECK(m.explained_variance[c] <= m.explained_variance[c - 1]);
  }
  CHECK((m.basis * m.basis.transpose() - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() <
        1e-8);
  for (int c = 0; c < 10; ++c) {
    Eigen::Index arg = 0;
    m.basis.row(c).cwiseAbs().maxCoeff(&arg);
    CHECK(m.basis(c, arg) > 0.0);
  }
}

TEST_CASE("encode and decode") {
  std::mt19937_64 rng(6);
  std::vector<Trajectory> set;
  for (int i = 0; i < 40; ++i) set.push_back(random_walk(rng, 15));
  const PcaModel m = pca_fit(set);
  CHECK(encode(m, unflatten(m.mean)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((decode(m, Eigen::VectorXd::Zero(10)) - unflatten(m.mean)).norm() == 0.0);
  for (const auto& t : set) {
    CHECK((decode(m, encode(m, t)) - t).cwiseAbs().maxCoeff() <= m.residual_bound + 1e-12);
  }
  // Exact inverse inside the span.
  const Eigen::VectorXd code = Eigen::VectorXd::Random(10);
  CHECK((encode(m, decode(m, code)) - code).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("reconstruction error is non-increasing in k") {
  std::mt19937_64 rng(7);
  std::vector<Trajectory> set;
  for (int i = 0; i < 40; ++i) set.push_back(random_walk(rng, 15));
  double previous = 1e300;
  for (int k = 1; k <= 10; ++k) {
    const PcaModel m = pca_fit(set, k);
    double total = 0.0;
    for (const auto& t : set) total += (decode(m, encode(m, t)) - t).squaredNorm();
    CHECK(total <= previous + 1e-9);
    previous = total;
  }
}

TEST_CASE("codec errors") {
  std::mt19937_64 rng(8);
  std::vector<Trajectory> few(5, random_walk(rng, 10));
  try {
    pca_fit(few, 10);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientSamples);
  }
  const PcaModel empty;
  try {
    encode(empty, few[0]);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kModelNotFitted);
  }
  CHECK_THROWS_AS(decode(empty, Eigen::VectorXd::Zero(10)), Error);
}

TEST_CASE("latent scale floors tiny variances") {
  PcaModel m;
  m.mean = Eigen::VectorXd::Zero(4);
  m.basis = Eigen::MatrixXd::Identity(2, 4);
  m.explained_variance = Eigen::Vector2d(4.0, 0.0);
  const Eigen::VectorXd s = latent_scale(m);
  CHECK(s[0] == Approx(2.0));
  CHECK(s[1] == Approx(1e-3));
}

TEST_CASE("normalize_scene examples") {
  const VectorMap map = make_map({line_lane({0, 0}, {100, 100})});
  Scene scene;
  scene.agents = {{0, 0, 0.3, 2, 0}, {100, 100, -1.0, 10, 1}, {50, 20, 2.0, 6, 0}};
  const auto [norm_scene, norm] = normalize_scene(scene, map);
  CHECK(norm_scene.agents[0].x == Approx(-1.0));
  CHECK(norm_scene.agents[0].y == Approx(-1.0));
  CHECK(norm_scene.agents[1].x == Approx(1.0));
  CHECK(norm_scene.agents[1].y == Approx(1.0));
  for (std::size_t i = 0; i < scene.agents.size(); ++i) {
    CHECK(norm_scene.agents[i].theta == scene.agents[i].theta);
    CHECK(std::abs(norm_scene.agents[i].x) <= 1.0 + 1e-12);
    CHECK(std::abs(norm_scene.agents[i].y) <= 1.0 + 1e-12);
  }
  const Scene back = denormalize_scene(norm_scene, norm);
  for (std::size_t i = 0; i < scene.agents.size(); ++i) {
    CHECK(std::abs(back.agents[i].x - scene.agents[i].x) < 1e-9);
    CHECK(std::abs(back.agents[i].y - scene.agents[i].y) < 1e-9);
    CHECK(std::abs(back.agents[i].v - scene.agents[i].v) < 1e-9);
    CHECK(back.agents[i].type == scene.agents[i].type);
  }

  Scene single;
  single.agents = {{30, -4, 1.0, 5, 0}};
  const auto [one, n1] = normalize_scene(single, map);
  CHECK(one.agents[0].x == 0.0);
  CHECK(one.agents[0].y == 0.0);
  CHECK(n1.half_extent == 1.0);
}

TEST_CASE("normalization is a similarity transform") {
  std::mt19937_64 rng(9);
  const VectorMap map = make_map({line_lane({0, 0}, {10, 0})});
  Scene scene;
  for (int i = 0; i < 6; ++i) {
    scene.agents.push_back({uniform(rng, -40, 60), uniform(rng, 0, 20), uniform(rng, -3, 3), 3, 0});
  }
  const auto [ns, norm] = normalize_scene(scene, map, {0.0, 20.0});
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double a = (scene.agents[i].position() - scene.agents[j].position()).norm();
      const double b = (ns.agents[i].position() - ns.agents[j].position()).norm();
      CHECK(b * norm.half_extent == Approx(a));
    }
  }
  CHECK(norm.speed_to_normalized(0.0) == Approx(-1.0));
  CHECK(norm.speed_to_normalized(20.0) == Approx(1.0));
  CHECK(norm.speed_from_normalized(norm.speed_to_normalized(7.5)) == Approx(7.5));
}
