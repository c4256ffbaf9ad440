#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mail/core/types.hpp"

namespace mail {

struct MatrixGameSolution {
   Vector row_strategy;  // maximizer
   Vector col_strategy;  // minimizer
   double value = 0.0;
};

namespace detail {

// Dense tableau simplex for  max 1'w  s.t.  B w <= 1, w >= 0  with B > 0,
// pivoting by Bland's rule. Returns the primal w and the dual u (the row
// player's scaled strategy) read off the slack reduced costs.
inline void solve_positive_game_lp(const Matrix& B, Vector& w, Vector& u)
{
   constexpr double kEps = 1e-12;
   const int m = static_cast<int>(B.rows());
   const int n = static_cast<int>(B.cols());
   const int cols = n + m + 1;
   Matrix t = Matrix::Zero(m + 1, cols);
   t.topLeftCorner(m, n) = B;
   t.block(0, n, m, m).setIdentity();
   t.col(cols - 1).head(m).setOnes();
   t.row(m).head(n).setConstant(-1.0);
   std::vector<int> basis(static_cast<std::size_t>(m));
   std::iota(basis.begin(), basis.end(), n);

   const int max_pivots = 50 * (m + n) + 1000;
   for (int it = 0;; ++it) {
      if (it > max_pivots) throw NumericalError("matrix_maximin: simplex did not terminate");
      int enter = -1;
      for (int j = 0; j < n + m; ++j)
         if (t(m, j) < -kEps) {
            enter = j;
            break;
         }
      if (enter < 0) break;
      int leave = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < m; ++i) {
         if (t(i, enter) <= kEps) continue;
         const double ratio = t(i, cols - 1) / t(i, enter);
         if (leave < 0 || ratio < best_ratio - kEps ||
             (std::abs(ratio - best_ratio) <= kEps && basis[i] < basis[leave])) {
            leave = i;
            best_ratio = ratio;
         }
      }
      if (leave < 0) throw NumericalError("matrix_maximin: LP unbounded (internal error)");
      t.row(leave) /= t(leave, enter);
      for (int i = 0; i <= m; ++i)
         if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
      basis[leave] = enter;
   }
   w = Vector::Zero(n);
   for (int i = 0; i < m; ++i)
      if (basis[i] < n) w(basis[i]) = t(i, cols - 1);
   u = t.row(m).segment(n, m).transpose();
}

inline Vector clean_distribution(Vector p)
{
   p = p.cwiseMax(0.0);
   const double s = p.sum();
   if (!(s > 0.0)) throw NumericalError("matrix_maximin: degenerate strategy");
   return p / s;
}

}  // namespace detail

/// Solves max_x min_y x'Ay exactly by linear programming. The column player's
/// LP is pivoted; the row player's strategy comes from its dual.
inline MatrixGameSolution matrix_maximin(const Matrix& payoff)
{
   if (payoff.rows() == 0 || payoff.cols() == 0) throw DimensionError("matrix_maximin: empty payoff");
   if (!payoff.allFinite()) throw ArgumentError("matrix_maximin: non-finite payoff");
   const double shift = 1.0 - payoff.minCoeff();
   const Matrix B = payoff.array() + shift;
   Vector w, u;
   detail::solve_positive_game_lp(B, w, u);
   const double total = w.sum();
   if (!(total > 0.0)) throw NumericalError("matrix_maximin: zero LP optimum (internal error)");
   MatrixGameSolution sol;
   sol.col_strategy = detail::clean_distribution(w);
   sol.row_strategy = detail::clean_distribution(u);
   sol.value = 1.0 / total - shift;
   return sol;
}

/// Same solve with actions presented to the LP in a different order; the
/// returned strategies are mapped back to the original indices. Different
/// orders can land on different optimal vertices.
inline MatrixGameSolution matrix_maximin(const Matrix& payoff, const std::vector<int>& row_order,
                                         const std::vector<int>& col_order)
{
   const auto m = payoff.rows(), n = payoff.cols();
   if (static_cast<Eigen::Index>(row_order.size()) != m || static_cast<Eigen::Index>(col_order.size()) != n)
      throw DimensionError("matrix_maximin: permutation size");
   Matrix permuted(m, n);
   for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) permuted(i, j) = payoff(row_order[i], col_order[j]);
   const auto s = matrix_maximin(permuted);
   MatrixGameSolution out;
   out.value = s.value;
   out.row_strategy = Vector::Zero(m);
   out.col_strategy = Vector::Zero(n);
   for (Eigen::Index i = 0; i < m; ++i) out.row_strategy(row_order[i]) = s.row_strategy(i);
   for (Eigen::Index j = 0; j < n; ++j) out.col_strategy(col_order[j]) = s.col_strategy(j);
   return out;
}

// max(value - min_j (x'A)_j, max_i (Ay)_i - value); <= 0 up to rounding at a saddle.
inline double saddle_residual(const Matrix& payoff, const MatrixGameSolution& s)
{
   const double row_guarantee = (s.row_strategy.transpose() * payoff).minCoeff();
   const double col_guarantee = (payoff * s.col_strategy).maxCoeff();
   return std::max(s.value - row_guarantee, col_guarantee - s.value);
}

}  // namespace mail
