#pragma once

// Dimensionality-reduction stage applied before base density clustering.
// The reference implementation is a principal-axis projection computed by a
// seeded iterated power method; the interface admits other reducers.

#include <cstdint>
#include <vector>

#include "driftline/types.hpp"

namespace driftline {

// Row-major matrix of points; all rows share one dimension.
struct Matrix {
  std::vector<double> data;
  int rows = 0;
  int cols = 0;

  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
};

Matrix to_matrix(const std::vector<Vec>& points);

struct Reducer {
  int input_dim = 0;
  int output_dim = 0;
  Matrix basis;  // output_dim x input_dim, orthonormal rows
  Vec mean;
};

// Centers the points and extracts the top output_dim principal directions.
// Deterministic under the seed; each basis row's first nonzero coordinate is
// made positive. Throws TooFewPointsError when rows < output_dim + 1 and
// DegenerateVarianceError when every point is identical.
Reducer fit_reducer(const Matrix& points, int output_dim, std::uint64_t seed);

// basis * (point - mean). Throws DimensionMismatchError.
Vec transform(const Reducer& reducer, const Vec& point);

Matrix transform_all(const Reducer& reducer, const Matrix& points);

}  // namespace driftline
