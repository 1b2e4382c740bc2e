#include "gnep/parametric.hpp"

#include "gnep/error.hpp"

namespace gnep {

HalfspaceSystem AffineRows::at(const Vector &x) const {
  Matrix A = A0;
  for (const auto &[k, Ak] : A_terms) A += x[k] * Ak;
  Vector b = b0;
  if (D.size() > 0) b += D * x;
  HalfspaceSystem s = HalfspaceSystem::in_dim(local_dim());
  for (int j = 0; j < rows(); ++j) s.add_row(A.row(j), b[j], j < static_cast<int>(strict.size()) && strict[j]);
  return s;
}

void AffineRows::validate(int joint_dim) const {
  const int m = rows();
  if (b0.size() != m) throw Error(ErrorCode::DimensionMismatch, "affine rows: b0 length differs from row count");
  if (!strict.empty() && static_cast<int>(strict.size()) != m)
    throw Error(ErrorCode::DimensionMismatch, "affine rows: strict mask length differs from row count");
  if (D.size() > 0 && (D.rows() != m || D.cols() != joint_dim))
    throw Error(ErrorCode::DimensionMismatch, "affine rows: D must be rows x joint dimension");
  for (const auto &[k, Ak] : A_terms) {
    if (k < 0 || k >= joint_dim) throw Error(ErrorCode::DimensionMismatch, "affine rows: coefficient index out of range");
    if (Ak.rows() != m || Ak.cols() != local_dim())
      throw Error(ErrorCode::DimensionMismatch, "affine rows: coefficient matrix shape");
  }
}

} // namespace gnep
