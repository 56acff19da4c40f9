#include "driftline/reduce.hpp"

#include <cmath>
#include <cstring>

#include "driftline/errors.hpp"
#include "driftline/rng.hpp"

namespace driftline {
namespace {

constexpr int kMaxPowerIters = 300;
constexpr double kEigTol = 1e-12;

double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double vec_norm(const double* a, int n) { return std::sqrt(dot(a, a, n)); }

// Makes the first coordinate with magnitude above tolerance positive.
void fix_sign(double* v, int n) {
  for (int i = 0; i < n; ++i) {
    if (std::fabs(v[i]) > 1e-9) {
      if (v[i] < 0.0)
        for (int j = 0; j < n; ++j) v[j] = -v[j];
      return;
    }
  }
}

void orthogonalize_against(double* v, const Matrix& basis, int rows, int n) {
  for (int r = 0; r < rows; ++r) {
    const double* b = basis.row(r);
    const double proj = dot(v, b, n);
    for (int i = 0; i < n; ++i) v[i] -= proj * b[i];
  }
}

}  // namespace

Matrix to_matrix(const std::vector<Vec>& points) {
  Matrix m;
  m.rows = static_cast<int>(points.size());
  m.cols = points.empty() ? 0 : static_cast<int>(points.front().size());
  m.data.resize(static_cast<std::size_t>(m.rows) * m.cols);
  for (int r = 0; r < m.rows; ++r) {
    if (static_cast<int>(points[r].size()) != m.cols) throw DimensionMismatchError();
    std::memcpy(m.row(r), points[r].data(), sizeof(double) * static_cast<std::size_t>(m.cols));
  }
  return m;
}

Reducer fit_reducer(const Matrix& points, int output_dim, std::uint64_t seed) {
  const int n = points.rows;
  const int d = points.cols;
  if (n < output_dim + 1) throw TooFewPointsError();

  Reducer reducer;
  reducer.input_dim = d;
  reducer.output_dim = output_dim;
  reducer.mean.assign(static_cast<std::size_t>(d), 0.0);
  for (int r = 0; r < n; ++r) {
    const double* p = points.row(r);
    for (int i = 0; i < d; ++i) reducer.mean[i] += p[i];
  }
  for (int i = 0; i < d; ++i) reducer.mean[i] /= n;

  // Centered working copy, deflated after each extracted component.
  Matrix work = points;
  double total_var = 0.0;
  for (int r = 0; r < n; ++r) {
    double* p = work.row(r);
    for (int i = 0; i < d; ++i) {
      p[i] -= reducer.mean[i];
      total_var += p[i] * p[i];
    }
  }
  if (total_var < 1e-18) throw DegenerateVarianceError();

  reducer.basis.rows = output_dim;
  reducer.basis.cols = d;
  reducer.basis.data.assign(static_cast<std::size_t>(output_dim) * d, 0.0);

  Rng rng(mix_seed(seed, 0x9e3779b9ull));
  Vec v(static_cast<std::size_t>(d));
  Vec xv(static_cast<std::size_t>(n));

  for (int comp = 0; comp < output_dim; ++comp) {
    for (int i = 0; i < d; ++i) v[i] = rng.next_double() - 0.5;
    orthogonalize_against(v.data(), reducer.basis, comp, d);
    double vn = vec_norm(v.data(), d);
    if (vn < 1e-12) {
      v.assign(static_cast<std::size_t>(d), 0.0);
      v[comp % d] = 1.0;
      orthogonalize_against(v.data(), reducer.basis, comp, d);
      vn = vec_norm(v.data(), d);
    }
    for (int i = 0; i < d; ++i) v[i] /= vn;

    double prev_eig = 0.0;
    for (int iter = 0; iter < kMaxPowerIters; ++iter) {
      // Covariance action via the data matrix: w = X^T (X v).
      for (int r = 0; r < n; ++r) xv[r] = dot(work.row(r), v.data(), d);
      Vec w(static_cast<std::size_t>(d), 0.0);
      for (int r = 0; r < n; ++r) {
        const double* p = work.row(r);
        const double s = xv[r];
        for (int i = 0; i < d; ++i) w[i] += s * p[i];
      }
      orthogonalize_against(w.data(), reducer.basis, comp, d);
      const double eig = vec_norm(w.data(), d);
      if (eig < 1e-15) break;  // residual variance exhausted
      for (int i = 0; i < d; ++i) v[i] = w[i] / eig;
      if (std::fabs(eig - prev_eig) <= kEigTol * eig) break;
      prev_eig = eig;
    }

    fix_sign(v.data(), d);
    std::memcpy(reducer.basis.row(comp), v.data(), sizeof(double) * static_cast<std::size_t>(d));

    // Deflate: remove the captured direction from the data.
    for (int r = 0; r < n; ++r) {
      double* p = work.row(r);
      const double proj = dot(p, v.data(), d);
      for (int i = 0; i < d; ++i) p[i] -= proj * v[i];
    }
  }
  return reducer;
}

Vec transform(const Reducer& reducer, const Vec& point) {
  if (static_cast<int>(point.size()) != reducer.input_dim) throw DimensionMismatchError();
  Vec out(static_cast<std::size_t>(reducer.output_dim), 0.0);
  Vec centered(point);
  for (int i = 0; i < reducer.input_dim; ++i) centered[i] -= reducer.mean[i];
  for (int r = 0; r < reducer.output_dim; ++r)
    out[r] = dot(reducer.basis.row(r), centered.data(), reducer.input_dim);
  return out;
}

Matrix transform_all(const Reducer& reducer, const Matrix& points) {
  Matrix out;
  out.rows = points.rows;
  out.cols = reducer.output_dim;
  out.data.resize(static_cast<std::size_t>(out.rows) * out.cols);
  Vec p(static_cast<std::size_t>(points.cols));
  for (int r = 0; r < points.rows; ++r) {
    std::memcpy(p.data(), points.row(r), sizeof(double) * static_cast<std::size_t>(points.cols));
    const Vec t = transform(reducer, p);
    std::memcpy(out.row(r), t.data(), sizeof(double) * static_cast<std::size_t>(out.cols));
  }
  return out;
}

}  // namespace driftline
