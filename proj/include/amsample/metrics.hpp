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

#ifndef AMSAMPLE_METRICS_HPP
#define AMSAMPLE_METRICS_HPP

#include <span>
#include <vector>

#include "amsample/core.hpp"
#include "amsample/rng.hpp"

namespace amsample {

/// N x d batch of finite points, one per row.
class PointCloud {
 public:
  explicit PointCloud(Matrix points);

  const Matrix& points() const { return points_; }
  Eigen::Index n() const { return points_.rows(); }
  Eigen::Index d() const { return points_.cols(); }
  /// First `count` rows as a new cloud.
  PointCloud head(Eigen::Index count) const;

 private:
  Matrix points_;
};

/// Minimum-cost perfect matching for a square cost matrix (shortest
/// augmenting paths with potentials, O(n^3)). Returns the column assigned to
/// each row.
std::vector<int> solve_assignment(const Matrix& cost);

/// Empirical W2 between equal-size clouds through the optimal assignment.
/// Limited to n <= 2048.
double exact_w2(const PointCloud& X, const PointCloud& Y);

/// W2 between two 1-D empirical measures with uniform weights; sizes may
/// differ.
double w2_1d(std::vector<double> a, std::vector<double> b);

/// Root-mean over random unit directions of the squared 1-D W2 of the
/// projections.
double sliced_w2(const PointCloud& X, const PointCloud& Y, int n_projections,
                 RngStream& rng);

/// Closed-form W2 between N(m1, v1 I) and N(m2, v2 I).
double gaussian_w2(const Vector& m1, double v1, const Vector& m2, double v2);

/// Biased (V-statistic) MMD with k(x, y) = exp(-|x - y|^2 / (2 h^2)).
double rbf_mmd(const PointCloud& X, const PointCloud& Y, double bandwidth);

/// Median pairwise distance of the pooled clouds, using at most
/// `max_points` rows of each.
double median_heuristic_bandwidth(const PointCloud& X, const PointCloud& Y,
                                  Eigen::Index max_points = 512);

struct Moments {
  Vector mean;
  Matrix covariance;  ///< unbiased
};

Moments moments(const PointCloud& X);

}  // namespace amsample

#endif  // AMSAMPLE_METRICS_HPP
