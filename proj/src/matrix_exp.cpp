#include <unsupported/Eigen/MatrixFunctions>

#include "peec/error.hpp"
#include "peec/lqg_core.hpp"

namespace peec {

Matrix matrix_exp(const Matrix& M, double t) {
  if (M.rows() != M.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix_exp needs a square matrix");
  }
  if (!M.allFinite() || !std::isfinite(t)) {
    throw Error(ErrorCode::NonFiniteEntry, "matrix_exp input is not finite");
  }
  if (M.size() == 0) return M;
  const Matrix scaled = M * t;
  return scaled.exp();
}

}  // namespace peec
