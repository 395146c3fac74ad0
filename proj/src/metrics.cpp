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

#include "amsample/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace amsample {

PointCloud::PointCloud(Matrix points) : points_(std::move(points)) {
  require(points_.rows() >= 1, "points: cloud must contain at least one point");
  require(points_.cols() >= 1, "points: dimension must be >= 1");
  if (!points_.allFinite()) throw NumericalError("points: cloud contains non-finite entries");
}

PointCloud PointCloud::head(Eigen::Index count) const {
  require(count >= 1 && count <= n(), "head: count out of range");
  return PointCloud(points_.topRows(count));
}

std::vector<int> solve_assignment(const Matrix& cost) {
  require(cost.rows() == cost.cols(), "cost: must be square");
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based Kuhn-Munkres with row/column potentials u, v; way[] stores the
  // alternating path.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n);
  for (int j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

double exact_w2(const PointCloud& X, const PointCloud& Y) {
  require(X.n() == Y.n(), "exact_w2: clouds must have equal size");
  require(X.d() == Y.d(), "exact_w2: clouds must have equal dimension");
  require(X.n() <= 2048, "exact_w2: at most 2048 points");
  const Eigen::Index n = X.n();
  Matrix cost(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      cost(i, j) = (X.points().row(i) - Y.points().row(j)).squaredNorm();
    }
  }
  const std::vector<int> match = solve_assignment(cost);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) total += cost(i, match[static_cast<std::size_t>(i)]);
  return std::sqrt(total / static_cast<double>(n));
}

double w2_1d(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "w2_1d: samples must be non-empty");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double diff = a[i] - b[i];
      total += diff * diff;
    }
    return std::sqrt(total / static_cast<double>(a.size()));
  }
  // Integrate the squared quantile difference over the merged breakpoints
  // i / |a| and j / |b|.
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double prev = 0.0, total = 0.0;
  while (i < a.size() && j < b.size()) {
    const double next_a = (i + 1) / na, next_b = (j + 1) / nb;
    const double next = std::min(next_a, next_b);
    const double diff = a[i] - b[j];
    total += (next - prev) * diff * diff;
    prev = next;
    if (next_a <= next) ++i;
    if (next_b <= next) ++j;
  }
  return std::sqrt(total);
}

double sliced_w2(const PointCloud& X, const PointCloud& Y, int n_projections,
                 RngStream& rng) {
  require(X.d() == Y.d(), "sliced_w2: clouds must have equal dimension");
  require(n_projections >= 1, "n_projections: must be >= 1");
  const Eigen::Index d = X.d();
  Vector direction(d);
  std::vector<double> px(static_cast<std::size_t>(X.n())), py(static_cast<std::size_t>(Y.n()));
  double total = 0.0;
  for (int p = 0; p < n_projections; ++p) {
    double norm = 0.0;
    do {
      rng.normal(direction);
      norm = direction.norm();
    } while (norm == 0.0);
    direction /= norm;
    Eigen::Map<Vector>(px.data(), X.n()).noalias() = X.points() * direction;
    Eigen::Map<Vector>(py.data(), Y.n()).noalias() = Y.points() * direction;
    const double w = w2_1d(px, py);
    total += w * w;
  }
  return std::sqrt(total / n_projections);
}

double gaussian_w2(const Vector& m1, double v1, const Vector& m2, double v2) {
  require(m1.size() == m2.size(), "gaussian_w2: mean dimension mismatch");
  require(v1 > 0.0 && v2 > 0.0, "gaussian_w2: variances must be > 0");
  const double root_gap = std::sqrt(v1) - std::sqrt(v2);
  return std::sqrt((m1 - m2).squaredNorm() +
                   static_cast<double>(m1.size()) * root_gap * root_gap);
}

namespace {

double mean_kernel(const Matrix& A, const Matrix& B, double inv_two_h2) {
  // Row-major traversal with a fixed order keeps the sum reproducible.
  double total = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
      row += std::exp(-(A.row(i) - B.row(j)).squaredNorm() * inv_two_h2);
    }
    total += row;
  }
  return total / (static_cast<double>(A.rows()) * static_cast<double>(B.rows()));
}

}  // namespace

double rbf_mmd(const PointCloud& X, const PointCloud& Y, double bandwidth) {
  require(X.d() == Y.d(), "rbf_mmd: clouds must have equal dimension");
  require(bandwidth > 0.0, "bandwidth: must be > 0");
  const double c = 1.0 / (2.0 * bandwidth * bandwidth);
  const double kxx = mean_kernel(X.points(), X.points(), c);
  const double kyy = mean_kernel(Y.points(), Y.points(), c);
  const double kxy = mean_kernel(X.points(), Y.points(), c);
  return std::sqrt(std::max(0.0, kxx + kyy - 2.0 * kxy));
}

double median_heuristic_bandwidth(const PointCloud& X, const PointCloud& Y,
                                  Eigen::Index max_points) {
  require(X.d() == Y.d(), "bandwidth: clouds must have equal dimension");
  const Eigen::Index nx = std::min(X.n(), max_points), ny = std::min(Y.n(), max_points);
  Matrix pooled(nx + ny, X.d());
  pooled << X.points().topRows(nx), Y.points().topRows(ny);
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(pooled.rows() * (pooled.rows() - 1) / 2));
  for (Eigen::Index i = 0; i < pooled.rows(); ++i)
    for (Eigen::Index j = i + 1; j < pooled.rows(); ++j)
      dist.push_back((pooled.row(i) - pooled.row(j)).norm());
  if (dist.empty()) return 1.0;
  auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  return *mid > 0.0 ? *mid : 1.0;
}

Moments moments(const PointCloud& X) {
  require(X.n() >= 2, "moments: need at least two points");
  Moments out;
  out.mean = X.points().colwise().mean().transpose();
  const Matrix centered = X.points().rowwise() - out.mean.transpose();
  out.covariance = centered.transpose() * centered / static_cast<double>(X.n() - 1);
  return out;
}

}  // namespace amsample
