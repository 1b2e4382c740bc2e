#include "gnep/lp.hpp"

#include "gnep/error.hpp"

#include <cmath>
#include <vector>

namespace gnep::lp {

LinearProgram::LinearProgram(int num_vars)
    : objective(Vector::Zero(num_vars)), A_ub(0, num_vars), b_ub(0), A_eq(0, num_vars), b_eq(0),
      lower(Vector::Constant(num_vars, -std::numeric_limits<double>::infinity())) {}

void LinearProgram::add_le(const Eigen::Ref<const Eigen::RowVectorXd> &row, double rhs) {
  const auto m = A_ub.rows();
  A_ub.conservativeResize(m + 1, num_vars());
  A_ub.row(m) = row;
  b_ub.conservativeResize(m + 1);
  b_ub[m] = rhs;
}

void LinearProgram::add_eq(const Eigen::Ref<const Eigen::RowVectorXd> &row, double rhs) {
  const auto m = A_eq.rows();
  A_eq.conservativeResize(m + 1, num_vars());
  A_eq.row(m) = row;
  b_eq.conservativeResize(m + 1);
  b_eq[m] = rhs;
}

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kCostTol = 1e-11;
constexpr int kMaxPivots = 200000;

class Tableau {
public:
  Tableau(int rows, int cols) : rows_(rows), cols_(cols), data_(Matrix::Zero(rows + 1, cols + 1)) {}

  double &at(int r, int c) { return data_(r, c); }
  double &rhs(int r) { return data_(r, cols_); }
  double &cost(int c) { return data_(rows_, c); }
  double &value() { return data_(rows_, cols_); }

  void pivot(int r, int c) {
    data_.row(r) /= data_(r, c);
    for (int i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = data_(i, c);
      if (f != 0.0) data_.row(i) -= f * data_.row(r);
    }
    basis[r] = c;
  }

  // Bland's rule on columns [0, allowed_cols).
  Status run(int allowed_cols) {
    for (int iter = 0; iter < kMaxPivots; ++iter) {
      int enter = -1;
      for (int c = 0; c < allowed_cols; ++c) {
        if (cost(c) < -kCostTol) {
          enter = c;
          break;
        }
      }
      if (enter < 0) return Status::Optimal;
      int leave = -1;
      double best = 0.0;
      for (int r = 0; r < rows_; ++r) {
        const double a = at(r, enter);
        if (a <= kPivotTol) continue;
        const double ratio = rhs(r) / a;
        if (leave < 0 || ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 && basis[r] < basis[leave])) {
          leave = r;
          best = ratio;
        }
      }
      if (leave < 0) return Status::Unbounded;
      pivot(leave, enter);
    }
    throw Error(ErrorCode::Numerical, "simplex pivot limit reached");
  }

  int rows_;
  int cols_;
  Matrix data_;
  std::vector<int> basis;
};

} // namespace

Result solve(const LinearProgram &program) {
  const int n = program.num_vars();
  const int m_ub = static_cast<int>(program.A_ub.rows());
  const int m_eq = static_cast<int>(program.A_eq.rows());
  const int m = m_ub + m_eq;

  // Column map: x = shift + Y y with y >= 0.
  Vector shift = Vector::Zero(n);
  std::vector<int> pos_col(n), neg_col(n, -1);
  int ncols = 0;
  for (int j = 0; j < n; ++j) {
    pos_col[j] = ncols++;
    if (std::isfinite(program.lower[j])) shift[j] = program.lower[j];
    else neg_col[j] = ncols++;
  }
  const int ny = ncols;
  const int nslack = m_ub;
  const int nstruct = ny + nslack;
  Tableau tab(m, nstruct + m);
  tab.basis.assign(m, -1);

  auto fill_row = [&](int r, const Eigen::RowVectorXd &a, double b, int slack) {
    double rhs = b - a.dot(shift);
    double sign = rhs < 0.0 ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) {
      tab.at(r, pos_col[j]) = sign * a[j];
      if (neg_col[j] >= 0) tab.at(r, neg_col[j]) = -sign * a[j];
    }
    if (slack >= 0) tab.at(r, ny + slack) = sign;
    tab.rhs(r) = sign * rhs;
    tab.at(r, nstruct + r) = 1.0;
    tab.basis[r] = nstruct + r;
  };
  for (int i = 0; i < m_ub; ++i) fill_row(i, program.A_ub.row(i), program.b_ub[i], i);
  for (int i = 0; i < m_eq; ++i) fill_row(m_ub + i, program.A_eq.row(i), program.b_eq[i], -1);

  // Phase 1: maximize -sum(artificials).
  for (int r = 0; r < m; ++r) tab.cost(nstruct + r) = 1.0;
  for (int r = 0; r < m; ++r) tab.data_.row(m) -= tab.data_.row(r);
  tab.run(nstruct + m);

  double scale = 1.0;
  for (int r = 0; r < m; ++r) scale = std::max(scale, std::abs(tab.rhs(r)));
  Result result;
  if (tab.value() < -1e-9 * scale) {
    result.status = Status::Infeasible;
    return result;
  }

  // Drive artificials out of the basis; rows that cannot be pivoted are redundant.
  std::vector<bool> redundant(m, false);
  for (int r = 0; r < m; ++r) {
    if (tab.basis[r] < nstruct) continue;
    int col = -1;
    double best = 1e-9;
    for (int c = 0; c < nstruct; ++c) {
      if (std::abs(tab.at(r, c)) > best) {
        best = std::abs(tab.at(r, c));
        col = c;
      }
    }
    if (col >= 0) tab.pivot(r, col);
    else redundant[r] = true;
  }
  for (int r = 0; r < m; ++r) {
    if (!redundant[r]) continue;
    tab.data_.row(r).setZero();
  }

  // Phase 2.
  tab.data_.row(m).setZero();
  for (int j = 0; j < n; ++j) {
    tab.cost(pos_col[j]) = -program.objective[j];
    if (neg_col[j] >= 0) tab.cost(neg_col[j]) = program.objective[j];
  }
  for (int r = 0; r < m; ++r) {
    if (redundant[r]) continue;
    const int b = tab.basis[r];
    const double f = tab.cost(b);
    if (f != 0.0) tab.data_.row(m) -= f * tab.data_.row(r);
  }
  // Artificial columns are barred from re-entering.
  const Status st = tab.run(nstruct);

  Vector y = Vector::Zero(nstruct + m);
  for (int r = 0; r < m; ++r) {
    if (redundant[r]) continue;
    y[tab.basis[r]] = std::max(0.0, tab.rhs(r));
  }
  result.x = shift;
  for (int j = 0; j < n; ++j) {
    result.x[j] += y[pos_col[j]];
    if (neg_col[j] >= 0) result.x[j] -= y[neg_col[j]];
  }
  result.status = st;
  result.value = st == Status::Unbounded ? std::numeric_limits<double>::infinity()
                                         : program.objective.dot(result.x);
  return result;
}

Result find_feasible(const Matrix &A_ub, const Vector &b_ub, const Matrix &A_eq,
                     const Vector &b_eq) {
  const int n = static_cast<int>(std::max(A_ub.cols(), A_eq.cols()));
  LinearProgram program(n);
  if (A_ub.rows() > 0) {
    program.A_ub = A_ub;
    program.b_ub = b_ub;
  }
  if (A_eq.rows() > 0) {
    program.A_eq = A_eq;
    program.b_eq = b_eq;
  }
  return solve(program);
}

} // namespace gnep::lp
