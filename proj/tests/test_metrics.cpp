// Copyright 2026 The amsample Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "amsample/metrics.hpp"
#include "amsample/rng.hpp"
#include "doctest.h"

using namespace amsample;

namespace {

Matrix random_cloud(Eigen::Index n, Eigen::Index d, RngStream& rng, double scale = 1.0) {
  return Matrix::NullaryExpr(n, d, [&] { return scale * rng.normal(); });
}

// Minimum over all permutations, by enumeration.
double brute_force_w2(const Matrix& X, const Matrix& Y) {
  std::vector<int> perm(static_cast<std::size_t>(X.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double cost = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      cost += (X.row(i) - Y.row(perm[static_cast<std::size_t>(i)])).squaredNorm();
    }
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best / static_cast<double>(X.rows()));
}

Matrix rotation(double theta) {
  Matrix R(2, 2);
  R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return R;
}

}  // namespace

TEST_CASE("exact w2 examples") {
  RngStream rng(1, 0);
  const PointCloud X(random_cloud(30, 3, rng));
  CHECK(exact_w2(X, X) == 0.0);

  Matrix a(1, 2), b(1, 2);
  a << 0.0, 0.0;
  b << 3.0, 4.0;
  CHECK(exact_w2(PointCloud(a), PointCloud(b)) == doctest::Approx(5.0).epsilon(1e-15));

  Matrix u(2, 1), v(2, 1);
  u << 0.0, 1.0;
  v << 1.0, 2.0;
  CHECK(exact_w2(PointCloud(u), PointCloud(v)) == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(exact_w2(PointCloud(u), PointCloud(a)), ValidationError);
  CHECK_THROWS_AS(exact_w2(PointCloud(random_cloud(3, 2, rng)), PointCloud(random_cloud(4, 2, rng))),
                  ValidationError);
}

TEST_CASE("exact w2 equals the brute-force permutation minimum") {
  RngStream rng(2, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + trial % 7;
    const Eigen::Index d = 1 + (trial / 7) % 3;
    const Matrix X = random_cloud(n, d, rng), Y = random_cloud(n, d, rng, 2.0);
    CHECK(std::abs(exact_w2(PointCloud(X), PointCloud(Y)) - brute_force_w2(X, Y)) <= 1e-10);
  }
}

TEST_CASE("assignment solver returns an optimal permutation") {
  RngStream rng(3, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 1 + trial % 6;
    const Matrix C = Matrix::NullaryExpr(n, n, [&] { return rng.uniform(); });
    const auto assign = solve_assignment(C);
    std::vector<int> sorted = assign;
    std::sort(sorted.begin(), sorted.end());
    for (Eigen::Index i = 0; i < n; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
    double cost = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) cost += C(i, assign[static_cast<std::size_t>(i)]);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
      double c = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) c += C(i, perm[static_cast<std::size_t>(i)]);
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(cost == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("exact w2 is a metric on equal-size clouds") {
  RngStream rng(4, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = 1 + trial % 16;
    const PointCloud X(random_cloud(n, 2, rng)), Y(random_cloud(n, 2, rng, 1.5)),
        Z(random_cloud(n, 2, rng, 0.5));
    const double xy = exact_w2(X, Y), yz = exact_w2(Y, Z), xz = exact_w2(X, Z);
    CHECK(xy == doctest::Approx(exact_w2(Y, X)).epsilon(1e-12));
    CHECK(xz <= xy + yz + 1e-10);
    CHECK(xy >= 0.0);
  }
}

TEST_CASE("exact w2 handles the largest supported clouds") {
  RngStream rng(5, 0);
  const PointCloud X(random_cloud(2048, 2, rng));
  const PointCloud Y(random_cloud(2048, 2, rng));
  const double w = exact_w2(X, Y);
  CHECK(std::isfinite(w));
  CHECK(w > 0.0);
  CHECK_THROWS_AS(exact_w2(PointCloud(random_cloud(2049, 1, rng)), PointCloud(random_cloud(2049, 1, rng))),
                  ValidationError);
}

TEST_CASE("sliced w2 examples") {
  RngStream rng(6, 0);
  const PointCloud X(random_cloud(100, 2, rng));
  RngStream proj(7, 0);
  CHECK(sliced_w2(X, X, 64, proj) == 0.0);

  for (int trial = 0; trial < 10; ++trial) {
    const PointCloud A(random_cloud(40, 1, rng)), B(random_cloud(40, 1, rng, 3.0));
    for (int k : {1, 7}) {
      RngStream p(8, static_cast<std::uint64_t>(trial));
      CHECK(sliced_w2(A, B, k, p) == doctest::Approx(exact_w2(A, B)).epsilon(1e-12));
    }
  }

  RngStream p1(9, 0), p2(9, 0);
  const PointCloud Y(random_cloud(100, 2, rng, 2.0));
  CHECK(sliced_w2(X, Y, 32, p1) == sliced_w2(X, Y, 32, p2));
}

TEST_CASE("sliced w2 of isotropic gaussian clouds tracks the closed form") {
  RngStream rng(10, 0);
  for (Eigen::Index d : {1, 2, 3}) {
    for (int trial = 0; trial < 3; ++trial) {
      Matrix a = random_cloud(4096, d, rng);
      Matrix b = random_cloud(4096, d, rng, 2.0);
      b.col(0).array() += 1.5;
      const Moments ma = moments(PointCloud(a)), mb = moments(PointCloud(b));
      const double dd = static_cast<double>(d);
      const double closed = gaussian_w2(ma.mean, ma.covariance.trace() / dd, mb.mean,
                                        mb.covariance.trace() / dd);
      // A unit projection of an isotropic Gaussian keeps its variance, so
      // averaging (u.dm)^2 + (s1 - s2)^2 over directions gives closed^2 / d.
      RngStream p(11, static_cast<std::uint64_t>(trial));
      const double got = sliced_w2(PointCloud(a), PointCloud(b), 256, p);
      CHECK(std::abs(got / (closed / std::sqrt(dd)) - 1.0) < 0.10);
    }
  }
}

TEST_CASE("sliced w2 is invariant under a common rotation") {
  RngStream rng(12, 0);
  Matrix a = random_cloud(1000, 2, rng);
  Matrix b = random_cloud(1000, 2, rng, 0.5);
  b.col(0).array() += 2.0;
  RngStream p0(13, 0);
  const double base = sliced_w2(PointCloud(a), PointCloud(b), 512, p0);
  for (double theta : {0.3, 1.1, 2.5}) {
    const Matrix R = rotation(theta);
    RngStream p(13, 1);
    const double rotated = sliced_w2(PointCloud(a * R.transpose()), PointCloud(b * R.transpose()), 512, p);
    CHECK(std::abs(rotated - base) < 0.05 * base);
  }
}

TEST_CASE("one-dimensional w2 on unequal sizes") {
  CHECK(w2_1d({0.0, 1.0}, {0.0, 1.0}) == 0.0);
  CHECK(w2_1d({0.0}, {2.0, 2.0}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(w2_1d({}, {1.0}), ValidationError);
}

TEST_CASE("gaussian w2 examples") {
  const Vector z1 = Vector::Zero(1), z2 = Vector::Zero(2);
  CHECK(gaussian_w2(z2, 0.7, z2, 0.7) == 0.0);
  CHECK(gaussian_w2(z1, 1.0, z1, 4.0) == doctest::Approx(1.0).epsilon(1e-15));
  Vector m(2);
  m << 3.0, 4.0;
  CHECK(gaussian_w2(m, 0.5, z2, 0.5) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK_THROWS_AS(gaussian_w2(z1, 0.0, z1, 1.0), ValidationError);
}

TEST_CASE("mmd examples") {
  RngStream rng(14, 0);
  const PointCloud X(random_cloud(50, 2, rng)), Y(random_cloud(60, 2, rng, 2.0));
  CHECK(rbf_mmd(X, X, 0.7) == 0.0);
  CHECK(rbf_mmd(X, Y, 0.7) == doctest::Approx(rbf_mmd(Y, X, 0.7)).epsilon(1e-12));

  Matrix x(1, 2), y(1, 2);
  x << 0.0, 0.0;
  y << 1.0, 1.0;
  CHECK(rbf_mmd(PointCloud(x), PointCloud(y), 1.0) ==
        doctest::Approx(std::sqrt(2.0 - 2.0 * std::exp(-1.0))).epsilon(1e-14));
  CHECK(rbf_mmd(PointCloud(x), PointCloud(y), 1.0) == doctest::Approx(1.12439).epsilon(1e-5));
  CHECK_THROWS_AS(rbf_mmd(X, Y, 0.0), ValidationError);
}

TEST_CASE("mmd matches a direct double sum") {
  RngStream rng(15, 0);
  const Matrix a = random_cloud(20, 3, rng), b = random_cloud(25, 3, rng, 1.3);
  const double h = 0.9;
  auto k = [&](const Matrix& P, Eigen::Index i, const Matrix& R, Eigen::Index j) {
    return std::exp(-(P.row(i) - R.row(j)).squaredNorm() / (2 * h * h));
  };
  double kxx = 0, kyy = 0, kxy = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.rows(); ++j) kxx += k(a, i, a, j);
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) kyy += k(b, i, b, j);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) kxy += k(a, i, b, j);
  const double na = static_cast<double>(a.rows()), nb = static_cast<double>(b.rows());
  const double oracle = std::sqrt(kxx / (na * na) + kyy / (nb * nb) - 2 * kxy / (na * nb));
  CHECK(rbf_mmd(PointCloud(a), PointCloud(b), h) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("median heuristic bandwidth is positive and symmetric") {
  RngStream rng(16, 0);
  const PointCloud X(random_cloud(200, 2, rng)), Y(random_cloud(200, 2, rng, 2.0));
  const double h = median_heuristic_bandwidth(X, Y);
  CHECK(h > 0.0);
  CHECK(h == median_heuristic_bandwidth(Y, X));
}

TEST_CASE("moment examples") {
  Matrix x(2, 2);
  x << 1.0, 1.0, -1.0, -1.0;
  const Moments m = moments(PointCloud(x));
  CHECK(m.mean.norm() == 0.0);
  CHECK((m.covariance - Matrix::Constant(2, 2, 2.0)).norm() < 1e-15);

  const Moments c = moments(PointCloud(Matrix::Constant(10, 3, 4.2)));
  CHECK(c.covariance.norm() < 1e-12);

  RngStream rng(17, 0);
  const Moments g = moments(PointCloud(random_cloud(100000, 3, rng)));
  CHECK((g.covariance - Matrix::Identity(3, 3)).norm() / std::sqrt(3.0) < 0.05);
  CHECK_THROWS_AS(moments(PointCloud(Matrix::Zero(1, 2))), ValidationError);
}

TEST_CASE("point clouds reject empty input") {
  CHECK_THROWS_AS(PointCloud(Matrix::Zero(0, 2)), ValidationError);
  const PointCloud X(Matrix::Identity(3, 3));
  CHECK(X.head(2).n() == 2);
  CHECK_THROWS_AS(X.head(4), ValidationError);
}
