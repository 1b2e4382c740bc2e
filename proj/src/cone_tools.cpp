#include "gnep/cone_tools.hpp"

#include "gnep/error.hpp"
#include "gnep/lp.hpp"
#include "gnep/qp.hpp"

#include <algorithm>
#include <cmath>

namespace gnep::cone {

namespace {

// Calls visit(indices) for every k-subset of {0..m-1} in lexicographic order.
template <class Visit> void for_each_subset(int m, int k, Visit &&visit) {
  if (k < 0 || k > m) return;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    visit(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

int matrix_rank(const Matrix &M) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::FullPivLU<Matrix> lu(M);
  lu.setThreshold(1e-10);
  return static_cast<int>(lu.rank());
}

Matrix null_space(const Matrix &M, int dim) {
  if (M.rows() == 0) return Matrix::Identity(dim, dim);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
  const auto &s = svd.singularValues();
  const double cutoff = 1e-10 * std::max(1.0, s.size() > 0 ? s[0] : 0.0);
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > cutoff) ++rank;
  return svd.matrixV().rightCols(dim - rank);
}

void push_unique(std::vector<Vector> &out, const Vector &v, double tol) {
  for (const auto &w : out)
    if ((w - v).cwiseAbs().maxCoeff() <= tol) return;
  out.push_back(v);
}

} // namespace

std::vector<Vector> enumerate_vertices(const HalfspaceSystem &closed, double tol) {
  const int n = closed.dim();
  const int r = matrix_rank(closed.A_eq);
  std::vector<Vector> vertices;
  const int k = n - r;
  const double scale = std::max(1.0, closed.b.size() > 0 ? closed.b.cwiseAbs().maxCoeff() : 1.0);
  auto try_subset = [&](const std::vector<int> &idx) {
    Matrix M(closed.eq_rows() + static_cast<int>(idx.size()), n);
    Vector rhs(M.rows());
    for (int i = 0; i < closed.eq_rows(); ++i) {
      M.row(i) = closed.A_eq.row(i);
      rhs[i] = closed.b_eq[i];
    }
    for (std::size_t j = 0; j < idx.size(); ++j) {
      M.row(closed.eq_rows() + j) = closed.A.row(idx[j]);
      rhs[closed.eq_rows() + j] = closed.b[idx[j]];
    }
    if (matrix_rank(M) < n) return;
    const Vector v = M.colPivHouseholderQr().solve(rhs);
    if (closed.max_violation(v) > tol * scale) return;
    push_unique(vertices, v, 1e-9 * scale);
  };
  if (k == 0) try_subset({});
  else for_each_subset(closed.rows(), k, try_subset);
  std::sort(vertices.begin(), vertices.end(), [](const Vector &a, const Vector &b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
  return vertices;
}

std::vector<Vector> cone_generators(const Matrix &W, int dim) {
  std::vector<Vector> gens;
  const Matrix L = null_space(W, dim);
  for (int j = 0; j < L.cols(); ++j) {
    gens.push_back(L.col(j));
    gens.push_back(-L.col(j));
  }
  const int k = dim - static_cast<int>(L.cols());
  if (k == 0) return gens;
  // Complement of the lineality space, parametrized as d = B y.
  const Matrix B = L.cols() > 0 ? null_space(L.transpose(), dim) : Matrix::Identity(dim, dim);
  const Matrix WB = W * B;
  auto feasible = [&](const Vector &d) { return W.rows() == 0 || (W * d).maxCoeff() <= 1e-9; };
  for_each_subset(static_cast<int>(WB.rows()), k - 1, [&](const std::vector<int> &idx) {
    Matrix M(static_cast<int>(idx.size()), k);
    for (std::size_t j = 0; j < idx.size(); ++j) M.row(j) = WB.row(idx[j]);
    const Matrix N = null_space(M, k);
    if (N.cols() != 1) return;
    for (double sign : {1.0, -1.0}) {
      Vector d = sign * (B * N.col(0));
      d.normalize();
      if (feasible(d)) push_unique(gens, d, 1e-9);
    }
  });
  return gens;
}

std::vector<Vector> prune_redundant(const std::vector<Vector> &generators) {
  std::vector<Vector> kept = generators;
  for (std::size_t i = 0; i < kept.size();) {
    const int n = static_cast<int>(kept[i].size());
    const int others = static_cast<int>(kept.size()) - 1;
    if (others == 0) break;
    lp::LinearProgram program(others);
    for (int j = 0; j < others; ++j) program.set_nonnegative(j);
    Matrix G(n, others);
    int col = 0;
    for (std::size_t j = 0; j < kept.size(); ++j)
      if (j != i) G.col(col++) = kept[j];
    program.A_eq = G;
    program.b_eq = kept[i];
    const auto res = lp::solve(program);
    if (res.optimal()) kept.erase(kept.begin() + static_cast<long>(i));
    else ++i;
  }
  return kept;
}

Vector min_norm_weights(const std::vector<Vector> &points) {
  const int k = static_cast<int>(points.size());
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "min-norm point of an empty hull");
  if (k == 1) return Vector::Ones(1);
  const int n = static_cast<int>(points.front().size());
  Matrix P(n, k);
  for (int j = 0; j < k; ++j) P.col(j) = points[j];
  qp::QuadraticProgram program;
  program.H = P.transpose() * P;
  program.g = Vector::Zero(k);
  program.A_ub = -Matrix::Identity(k, k);
  program.b_ub = Vector::Zero(k);
  program.A_eq = Matrix::Ones(1, k);
  program.b_eq = Vector::Ones(1);
  const auto res = qp::solve(program, Vector::Constant(k, 1.0 / k));
  Vector w = res.z.cwiseMax(0.0);
  return w / w.sum();
}

Matrix tangent_projector(const Matrix &E, int dim) {
  if (E.rows() == 0) return Matrix::Identity(dim, dim);
  const Matrix N = null_space(E, dim);
  return N * N.transpose();
}

} // namespace gnep::cone
