#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace probelab {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Smallest standard deviation used as a divisor by the normalizers.
inline constexpr double kSigmaFloor = 1e-8;

// Eight interleaved partial sums, combined in a fixed order. Independent of
// pointer alignment, so the same pair always gives bit-identical results.
inline double euclidean(const double* a, const double* b, std::size_t d) {
  double part[8] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  std::size_t k = 0;
  for (; k + 8 <= d; k += 8) {
    for (std::size_t j = 0; j < 8; ++j) {
      const double t = a[k + j] - b[k + j];
      part[j] += t * t;
    }
  }
  for (std::size_t j = 0; k < d; ++k, ++j) {
    const double t = a[k] - b[k];
    part[j] += t * t;
  }
  const double s = ((part[0] + part[1]) + (part[2] + part[3])) + ((part[4] + part[5]) + (part[6] + part[7]));
  return std::sqrt(s);
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline RowVector column_means(const Matrix& x) {
  return x.colwise().mean();
}

// Population (divide-by-n) standard deviation per column, no floor.
inline RowVector column_stddev(const Matrix& x, const RowVector& mean) {
  const double n = static_cast<double>(x.rows());
  return ((x.rowwise() - mean).array().square().colwise().sum() / n).sqrt().matrix();
}

inline Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

}  // namespace probelab
