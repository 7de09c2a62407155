#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>

#include <Eigen/Core>

#include "pfsvm/types.hpp"

namespace pfsvm {

/// Soft-margin linear SVM with an individual slack cost per sample.
///
/// The trained hyperplane is f(x) = x·normal + offset. `duals` are the
/// Lagrange multipliers of the margin constraints and satisfy
/// 0 <= duals[i] <= per_sample_cost[i] and sum(duals .* y) = 0.
template <typename Scalar>
struct SvmModel {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector normal;
  Scalar offset = 0;
  Vector duals;
  Vector per_sample_cost;
  Scalar margin_width = 0;

  bool converged = false;
  std::int64_t iterations = 0;
  /// Largest violating-pair gap at exit; below the tolerance when converged.
  Scalar kkt_gap = 0;
  Scalar dual_objective = 0;

  Eigen::Index dimension() const { return normal.size(); }
};

using SvmModeld = SvmModel<double>;

struct TrainOptions {
  double tolerance = 1e-3;
  /// One pass is N pair updates, N being the number of training samples.
  std::int64_t max_passes = 100000;
  /// Invoked with the dual objective after every pair update when set. Costs
  /// O(N) per update.
  std::function<void(double)> on_update;
};

namespace detail {

template <typename Scalar, typename DerivedX>
void check_dimension(const SvmModel<Scalar>& model, const Eigen::MatrixBase<DerivedX>& x) {
  if (x.size() != model.normal.size())
    throw ArgumentError("svm: point has dimension " + std::to_string(x.size()) +
                        ", model expects " + std::to_string(model.normal.size()));
}

// Offset from the unbounded support vectors, or the midpoint of the interval
// allowed by the bounded ones when there are none.
template <typename Scalar, typename DerivedX>
Scalar compute_offset(const Eigen::MatrixBase<DerivedX>& x,
                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y,
                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& alpha,
                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& cost,
                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& normal) {
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> residual = y - x * normal;
  Scalar free_sum = 0;
  Eigen::Index free_count = 0;
  Scalar lower = -std::numeric_limits<Scalar>::infinity();
  Scalar upper = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (alpha[i] > 0 && alpha[i] < cost[i]) {
      free_sum += residual[i];
      ++free_count;
      continue;
    }
    // alpha = 0 requires y f >= 1, alpha = c requires y f <= 1.
    const bool at_zero = alpha[i] <= 0;
    const bool pushes_up = (y[i] > 0) == at_zero;
    if (pushes_up) {
      lower = std::max(lower, residual[i]);
    } else {
      upper = std::min(upper, residual[i]);
    }
  }
  if (free_count > 0) return free_sum / static_cast<Scalar>(free_count);
  if (std::isinf(lower) && std::isinf(upper)) return 0;
  if (std::isinf(lower)) return upper;
  if (std::isinf(upper)) return lower;
  return (lower + upper) / 2;
}

}  // namespace detail

/// Trains the linear SVM by sequential minimal optimization on the dual
///
///   max  sum(a) - 1/2 sum_ij a_i a_j y_i y_j <x_i, x_j>
///   s.t. 0 <= a_i <= cost_i,  sum(a_i y_i) = 0
///
/// Each step updates the maximal violating pair chosen with second-order
/// information. Stops when the violating-pair gap drops below
/// `options.tolerance`; if `max_passes` runs out first the model comes back
/// with `converged == false`.
///
/// `y` holds ±1 labels. Throws TrainingError when only one class is present
/// and ArgumentError on shape mismatch or non-positive costs.
template <typename DerivedX, typename DerivedY, typename DerivedC>
SvmModel<typename DerivedX::Scalar> train(const Eigen::MatrixBase<DerivedX>& x,
                                          const Eigen::MatrixBase<DerivedY>& y_in,
                                          const Eigen::MatrixBase<DerivedC>& cost_in,
                                          const TrainOptions& options = {}) {
  using Scalar = typename DerivedX::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  const Eigen::Index n = x.rows();
  if (y_in.size() != n || cost_in.size() != n)
    throw ArgumentError("svm: labels and costs must have one entry per sample");
  if (x.cols() < 1) throw ArgumentError("svm: at least one feature is required");
  const Vector y = y_in.template cast<Scalar>();
  const Vector cost = cost_in.template cast<Scalar>();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[i] != 1 && y[i] != -1) throw ArgumentError("svm: labels must be +1 or -1");
    if (!(cost[i] > 0) || !std::isfinite(static_cast<double>(cost[i])))
      throw ArgumentError("svm: per-sample cost " + std::to_string(i) + " must be positive");
  }
  if ((y.array() > 0).all() || (y.array() < 0).all())
    throw TrainingError("svm: training data contains a single class");
  if (!(options.tolerance > 0)) throw ArgumentError("svm: tolerance must be positive");

  const Matrix gram = x * x.transpose();
  const Scalar tau = Scalar(1e-12);

  Vector alpha = Vector::Zero(n);
  // Gradient of 1/2 a'Qa - sum(a), Q_ij = y_i y_j <x_i, x_j>.
  Vector grad = Vector::Constant(n, Scalar(-1));
  const Vector diag = gram.diagonal();

  Scalar* a = alpha.data();
  Scalar* g = grad.data();
  const Scalar* yv = y.data();
  const Scalar* cv = cost.data();
  const Scalar* dv = diag.data();

  auto in_up = [&](Eigen::Index t) { return yv[t] > 0 ? a[t] < cv[t] : a[t] > 0; };
  auto in_low = [&](Eigen::Index t) { return yv[t] > 0 ? a[t] > 0 : a[t] < cv[t]; };
  auto dual_objective = [&] { return -(alpha.dot(grad - Vector::Ones(n))) / 2; };

  const std::int64_t max_iterations =
      options.max_passes > std::numeric_limits<std::int64_t>::max() / std::max<Eigen::Index>(n, 1)
          ? std::numeric_limits<std::int64_t>::max()
          : options.max_passes * n;
  const auto eps = static_cast<Scalar>(options.tolerance);
  constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

  // Membership of I_up / I_low as additive penalties: 0 inside, -inf outside.
  Vector up_pen(n), low_pen(n);
  Scalar* up = up_pen.data();
  Scalar* low = low_pen.data();
  auto refresh = [&](Eigen::Index t) {
    up[t] = in_up(t) ? Scalar(0) : -kInf;
    low[t] = in_low(t) ? Scalar(0) : -kInf;
  };
  for (Eigen::Index t = 0; t < n; ++t) refresh(t);

  // i maximizes -y_t G_t over I_up.
  Scalar g_max = -kInf;
  Eigen::Index i = -1;
  for (Eigen::Index t = 0; t < n; ++t) {
    const Scalar v = up[t] - yv[t] * g[t];
    if (v >= g_max) {
      g_max = v;
      i = t;
    }
  }
  if (g_max == -kInf) i = -1;

  SvmModel<Scalar> model;
  Scalar gap = kInf;
  std::int64_t iteration = 0;
  for (;; ++iteration) {
    // j gives the largest second-order decrease among I_low.
    Scalar g_max2 = -kInf;
    Eigen::Index j = -1;
    if (i >= 0) {
      const Scalar* ki = gram.col(i).data();
      const Scalar dii = dv[i];
      // Largest b^2 / q among I_low with b > 0, compared as b^2 Q >= B^2 q.
      // Four independent accumulators; ties go to the larger index.
      Scalar lane_gmax[4] = {-kInf, -kInf, -kInf, -kInf};
      Scalar lane_b2[4] = {0, 0, 0, 0};
      Scalar lane_q[4] = {1, 1, 1, 1};
      Eigen::Index lane_j[4] = {-1, -1, -1, -1};
      auto visit = [&](int lane, Eigen::Index t) {
        const Scalar yg = low[t] + yv[t] * g[t];
        lane_gmax[lane] = yg > lane_gmax[lane] ? yg : lane_gmax[lane];
        const Scalar b = g_max + yg;
        Scalar q = dii + dv[t] - 2 * ki[t];
        q = q <= 0 ? tau : q;
        const Scalar b2 = b * b;
        const bool take = b > 0 && b2 * lane_q[lane] >= lane_b2[lane] * q;
        lane_b2[lane] = take ? b2 : lane_b2[lane];
        lane_q[lane] = take ? q : lane_q[lane];
        lane_j[lane] = take ? t : lane_j[lane];
      };
      Eigen::Index t = 0;
      for (; t + 4 <= n; t += 4) {
        visit(0, t);
        visit(1, t + 1);
        visit(2, t + 2);
        visit(3, t + 3);
      }
      for (int lane = 0; t < n; ++t, ++lane) visit(lane, t);
      Scalar best_b2 = 0;
      Scalar best_q = 1;
      for (int lane = 0; lane < 4; ++lane) {
        g_max2 = std::max(g_max2, lane_gmax[lane]);
        if (lane_j[lane] < 0) continue;
        const Scalar lhs = lane_b2[lane] * best_q;
        const Scalar rhs = best_b2 * lane_q[lane];
        if (j < 0 || lhs > rhs || (lhs == rhs && lane_j[lane] > j)) {
          best_b2 = lane_b2[lane];
          best_q = lane_q[lane];
          j = lane_j[lane];
        }
      }
    }
    gap = g_max + g_max2;
    if (i < 0 || j < 0 || gap < eps) {
      model.converged = true;
      break;
    }
    if (iteration >= max_iterations) break;

    const Scalar old_i = a[i];
    const Scalar old_j = a[j];
    Scalar quad = dv[i] + dv[j] - 2 * gram(i, j);
    if (quad <= 0) quad = tau;
    const Scalar ci = cv[i];
    const Scalar cj = cv[j];
    if (yv[i] != yv[j]) {
      const Scalar delta = (-g[i] - g[j]) / quad;
      const Scalar diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) {
          a[j] = 0;
          a[i] = diff;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = -diff;
      }
      if (diff > ci - cj) {
        if (a[i] > ci) {
          a[i] = ci;
          a[j] = ci - diff;
        }
      } else if (a[j] > cj) {
        a[j] = cj;
        a[i] = cj + diff;
      }
    } else {
      const Scalar delta = (g[i] - g[j]) / quad;
      const Scalar sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > ci) {
        if (a[i] > ci) {
          a[i] = ci;
          a[j] = sum - ci;
        }
      } else if (a[j] < 0) {
        a[j] = 0;
        a[i] = sum;
      }
      if (sum > cj) {
        if (a[j] > cj) {
          a[j] = cj;
          a[i] = sum - cj;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = sum;
      }
    }

    // Gradient update fused with the next choice of i.
    const Scalar si = yv[i] * (a[i] - old_i);
    const Scalar sj = yv[j] * (a[j] - old_j);
    const Scalar* ki = gram.col(i).data();
    const Scalar* kj = gram.col(j).data();
    refresh(i);
    refresh(j);
    Scalar lane_max[4] = {-kInf, -kInf, -kInf, -kInf};
    Eigen::Index lane_i[4] = {-1, -1, -1, -1};
    auto visit = [&](int lane, Eigen::Index t) {
      const Scalar gt = g[t] + yv[t] * (ki[t] * si + kj[t] * sj);
      g[t] = gt;
      const Scalar v = up[t] - yv[t] * gt;
      const bool take = v >= lane_max[lane];
      lane_max[lane] = take ? v : lane_max[lane];
      lane_i[lane] = take ? t : lane_i[lane];
    };
    Eigen::Index t = 0;
    for (; t + 4 <= n; t += 4) {
      visit(0, t);
      visit(1, t + 1);
      visit(2, t + 2);
      visit(3, t + 3);
    }
    for (int lane = 0; t < n; ++t, ++lane) visit(lane, t);
    g_max = -kInf;
    i = -1;
    for (int lane = 0; lane < 4; ++lane) {
      if (lane_max[lane] > g_max || (lane_max[lane] == g_max && lane_i[lane] > i)) {
        g_max = lane_max[lane];
        i = lane_i[lane];
      }
    }
    if (g_max == -kInf) i = -1;
    if (options.on_update) options.on_update(static_cast<double>(dual_objective()));
  }

  model.iterations = iteration;
  model.kkt_gap = gap;
  model.duals = alpha;
  model.per_sample_cost = cost;
  model.normal = x.transpose() * alpha.cwiseProduct(y);
  model.offset = detail::compute_offset<Scalar>(x, y, alpha, cost, model.normal);
  const Scalar norm = model.normal.norm();
  model.margin_width = norm > 0 ? Scalar(2) / norm : std::numeric_limits<Scalar>::infinity();
  model.dual_objective = alpha.sum() - model.normal.squaredNorm() / 2;
  return model;
}

/// f(x) = x·normal + offset.
template <typename Scalar, typename Derived>
Scalar decision_value(const SvmModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  detail::check_dimension(model, x);
  return x.derived().template cast<Scalar>().dot(model.normal) + model.offset;
}

/// Decision values for every row of `x`.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> decision_values(const SvmModel<Scalar>& model,
                                                         const Eigen::MatrixBase<Derived>& x) {
  if (x.cols() != model.normal.size())
    throw ArgumentError("svm: data has dimension " + std::to_string(x.cols()) +
                        ", model expects " + std::to_string(model.normal.size()));
  return (x.template cast<Scalar>() * model.normal).array() + model.offset;
}

/// sign(f(x)); a zero decision value maps to Malignant.
template <typename Scalar, typename Derived>
Label predict_sign(const SvmModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  return label_from_sign(static_cast<double>(decision_value(model, x)));
}

/// Strictly between the two margin hyperplanes: |f(x)| < 1.
template <typename Scalar, typename Derived>
bool in_margin(const SvmModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  using std::abs;
  return abs(decision_value(model, x)) < 1;
}

/// zeta_i = max(0, 1 - y_i f(x_i)).
template <typename Scalar, typename DerivedX, typename DerivedY>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> slack_of(const SvmModel<Scalar>& model,
                                                  const Eigen::MatrixBase<DerivedX>& x,
                                                  const Eigen::MatrixBase<DerivedY>& y) {
  if (y.size() != x.rows()) throw ArgumentError("svm: one label per row required");
  const auto f = decision_values(model, x);
  return (Scalar(1) - y.template cast<Scalar>().array() * f.array()).max(Scalar(0)).matrix();
}

/// 1/2 |normal|^2 + sum(cost_i zeta_i) over the training data.
template <typename Scalar, typename DerivedX, typename DerivedY>
Scalar primal_objective(const SvmModel<Scalar>& model, const Eigen::MatrixBase<DerivedX>& x,
                        const Eigen::MatrixBase<DerivedY>& y) {
  return model.normal.squaredNorm() / 2 + model.per_sample_cost.dot(slack_of(model, x, y));
}

/// Largest violation of the KKT complementarity conditions:
/// a_i = 0 needs y f >= 1, 0 < a_i < c_i needs y f = 1, a_i = c_i needs y f <= 1.
template <typename Scalar, typename DerivedX, typename DerivedY>
Scalar kkt_violation(const SvmModel<Scalar>& model, const Eigen::MatrixBase<DerivedX>& x,
                     const Eigen::MatrixBase<DerivedY>& y) {
  using std::abs;
  const auto f = decision_values(model, x);
  Scalar worst = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const Scalar margin = static_cast<Scalar>(y[i]) * f[i];
    const Scalar a = model.duals[i];
    Scalar v;
    if (a <= 0) {
      v = std::max(Scalar(0), 1 - margin);
    } else if (a >= model.per_sample_cost[i]) {
      v = std::max(Scalar(0), margin - 1);
    } else {
      v = abs(margin - 1);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace pfsvm
