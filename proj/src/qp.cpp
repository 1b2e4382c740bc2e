#include "gnep/qp.hpp"

#include "gnep/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gnep::qp {

namespace {

Matrix regularized(const Matrix &H) {
  Eigen::LLT<Matrix> llt(H);
  if (llt.info() == Eigen::Success) {
    // LLT succeeds on barely-PD matrices too; guard the conditioning.
    const double dmin = llt.matrixL().toDenseMatrix().diagonal().cwiseAbs().minCoeff();
    if (dmin > 1e-7) return H;
  }
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  return H + 1e-10 * scale * Matrix::Identity(H.rows(), H.cols());
}

} // namespace

Result solve(const QuadraticProgram &program, const std::optional<Vector> &start) {
  const int n = static_cast<int>(program.g.size());
  const int m = static_cast<int>(program.A_ub.rows());
  const int me = static_cast<int>(program.A_eq.rows());
  const Matrix H = regularized(program.H);

  Result result;
  Vector z;
  if (start) {
    z = *start;
  } else {
    auto feasible = lp::find_feasible(program.A_ub, program.b_ub, program.A_eq, program.b_eq);
    if (!feasible.optimal()) {
      result.status = lp::Status::Infeasible;
      return result;
    }
    z = feasible.x;
  }
  if (z.size() != n) z = Vector::Zero(n);

  std::vector<int> working;
  std::vector<bool> in_working(m, false);
  const int max_iter = 200 * (n + m + 10);
  for (int iter = 0; iter < max_iter; ++iter) {
    const int k = me + static_cast<int>(working.size());
    Matrix kkt = Matrix::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = H;
    Matrix C(k, n);
    if (me > 0) C.topRows(me) = program.A_eq;
    for (std::size_t w = 0; w < working.size(); ++w) C.row(me + w) = program.A_ub.row(working[w]);
    kkt.topRightCorner(n, k) = C.transpose();
    kkt.bottomLeftCorner(k, n) = C;
    Vector rhs = Vector::Zero(n + k);
    const Vector grad = H * z + program.g;
    rhs.head(n) = -grad;
    const Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    const Vector p = sol.head(n);
    const double scale = 1.0 + z.cwiseAbs().maxCoeff();

    if (p.cwiseAbs().maxCoeff() <= 1e-12 * scale) {
      int drop = -1;
      double most_negative = -1e-10;
      for (std::size_t w = 0; w < working.size(); ++w) {
        const double mu = sol[n + me + static_cast<int>(w)];
        if (mu < most_negative) {
          most_negative = mu;
          drop = static_cast<int>(w);
        }
      }
      if (drop < 0) {
        result.status = lp::Status::Optimal;
        result.z = z;
        result.value = 0.5 * z.dot(program.H * z) + program.g.dot(z);
        result.iterations = iter;
        return result;
      }
      in_working[working[drop]] = false;
      working.erase(working.begin() + drop);
      continue;
    }

    double alpha = 1.0;
    int block = -1;
    for (int j = 0; j < m; ++j) {
      if (in_working[j]) continue;
      const double ap = program.A_ub.row(j).dot(p);
      if (ap <= 1e-14 * (1.0 + program.A_ub.row(j).norm() * p.norm())) continue;
      const double slack = std::max(0.0, program.b_ub[j] - program.A_ub.row(j).dot(z));
      const double step = slack / ap;
      if (step < alpha) {
        alpha = step;
        block = j;
      }
    }
    z += alpha * p;
    if (block >= 0) {
      working.push_back(block);
      in_working[block] = true;
    }
  }
  throw Error(ErrorCode::Numerical, "active-set QP iteration limit reached");
}

} // namespace gnep::qp
