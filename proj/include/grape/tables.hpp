#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace grape {

using Index = Eigen::Index;

/// Row-major dense table. Row x, column a; the flat index of (x, a) is x * n_actions + a.
using Table = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class VTable;

/**
 * Dense state-action table. Holds Q, Psi, Phi, advantages and error tables.
 *
 * Arithmetic is elementwise. A VTable may be added or subtracted, in which case
 * it is broadcast over actions: (Q - V)(x, a) = Q(x, a) - V(x).
 */
class QTable {
 public:
  QTable() = default;
  QTable(Index n_states, Index n_actions, double fill = 0.0);
  explicit QTable(Table values);

  /// Rebuilds a table from its flat (x * n_actions + a) representation.
  static QTable from_flat(const Eigen::VectorXd& flat, Index n_actions);

  Index n_states() const { return values_.rows(); }
  Index n_actions() const { return values_.cols(); }
  Index size() const { return values_.size(); }

  double operator()(Index x, Index a) const { return values_(x, a); }
  double& operator()(Index x, Index a) { return values_(x, a); }

  const Table& table() const { return values_; }
  Table& table() { return values_; }

  Eigen::Map<const Eigen::VectorXd> flat() const {
    return {values_.data(), values_.size()};
  }

  double sup_norm() const;
  bool all_finite() const;
  bool same_shape(const QTable& other) const;

  QTable& operator+=(const QTable& rhs);
  QTable& operator-=(const QTable& rhs);
  QTable& operator+=(const VTable& rhs);
  QTable& operator-=(const VTable& rhs);
  QTable& operator*=(double s);

 private:
  Table values_;
};

QTable operator+(QTable lhs, const QTable& rhs);
QTable operator-(QTable lhs, const QTable& rhs);
QTable operator+(QTable lhs, const VTable& rhs);
QTable operator-(QTable lhs, const VTable& rhs);
QTable operator*(double s, QTable q);
QTable operator*(QTable q, double s);
QTable operator/(QTable q, double s);

/// Sup-norm distance between two equally shaped tables.
double sup_distance(const QTable& a, const QTable& b);

/// Dense state table. Holds V and pi Psi.
class VTable {
 public:
  VTable() = default;
  explicit VTable(Index n_states, double fill = 0.0);
  explicit VTable(Eigen::VectorXd values);

  Index n_states() const { return values_.size(); }
  double operator()(Index x) const { return values_(x); }
  double& operator()(Index x) { return values_(x); }

  const Eigen::VectorXd& vector() const { return values_; }
  Eigen::VectorXd& vector() { return values_; }

  double sup_norm() const;

  VTable& operator+=(const VTable& rhs);
  VTable& operator-=(const VTable& rhs);
  VTable& operator*=(double s);

 private:
  Eigen::VectorXd values_;
};

VTable operator+(VTable lhs, const VTable& rhs);
VTable operator-(VTable lhs, const VTable& rhs);
VTable operator*(double s, VTable v);

double sup_distance(const VTable& a, const VTable& b);

/**
 * Stochastic action-distribution table pi(a|x). Every row is nonnegative and
 * sums to one within 1e-12; construction rejects anything else.
 */
class Policy {
 public:
  Policy() = default;
  explicit Policy(Table probs);

  static Policy uniform(Index n_states, Index n_actions);

  Index n_states() const { return probs_.rows(); }
  Index n_actions() const { return probs_.cols(); }

  double operator()(Index x, Index a) const { return probs_(x, a); }
  const Table& table() const { return probs_; }

  /// (pi Q)(x) = sum_a pi(a|x) Q(x, a).
  VTable expect(const QTable& q) const;

  /// Q - pi Q, the pi-centered table.
  QTable center(const QTable& q) const;

 private:
  Table probs_;
};

inline constexpr double kRowSumTolerance = 1e-12;

}  // namespace grape
