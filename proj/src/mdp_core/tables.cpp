#include "grape/tables.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace grape {

namespace {

void require_same_shape(const QTable& a, const QTable& b) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument("QTable shape mismatch");
  }
}

void require_broadcastable(const QTable& q, const VTable& v) {
  if (q.n_states() != v.n_states()) {
    throw std::invalid_argument("VTable length does not match QTable state count");
  }
}

}  // namespace

QTable::QTable(Index n_states, Index n_actions, double fill)
    : values_(Table::Constant(n_states, n_actions, fill)) {}

QTable::QTable(Table values) : values_(std::move(values)) {}

QTable QTable::from_flat(const Eigen::VectorXd& flat, Index n_actions) {
  if (n_actions <= 0 || flat.size() % n_actions != 0) {
    throw std::invalid_argument("flat vector length is not a multiple of n_actions");
  }
  Table t(flat.size() / n_actions, n_actions);
  Eigen::Map<Eigen::VectorXd>(t.data(), t.size()) = flat;
  return QTable(std::move(t));
}

double QTable::sup_norm() const {
  return values_.size() == 0 ? 0.0 : values_.cwiseAbs().maxCoeff();
}

bool QTable::all_finite() const { return values_.allFinite(); }

bool QTable::same_shape(const QTable& other) const {
  return n_states() == other.n_states() && n_actions() == other.n_actions();
}

QTable& QTable::operator+=(const QTable& rhs) {
  require_same_shape(*this, rhs);
  values_ += rhs.values_;
  return *this;
}

QTable& QTable::operator-=(const QTable& rhs) {
  require_same_shape(*this, rhs);
  values_ -= rhs.values_;
  return *this;
}

QTable& QTable::operator+=(const VTable& rhs) {
  require_broadcastable(*this, rhs);
  values_.colwise() += rhs.vector();
  return *this;
}

QTable& QTable::operator-=(const VTable& rhs) {
  require_broadcastable(*this, rhs);
  values_.colwise() -= rhs.vector();
  return *this;
}

QTable& QTable::operator*=(double s) {
  values_ *= s;
  return *this;
}

QTable operator+(QTable lhs, const QTable& rhs) { return lhs += rhs; }
QTable operator-(QTable lhs, const QTable& rhs) { return lhs -= rhs; }
QTable operator+(QTable lhs, const VTable& rhs) { return lhs += rhs; }
QTable operator-(QTable lhs, const VTable& rhs) { return lhs -= rhs; }
QTable operator*(double s, QTable q) { return q *= s; }
QTable operator*(QTable q, double s) { return q *= s; }
QTable operator/(QTable q, double s) { return q *= 1.0 / s; }

double sup_distance(const QTable& a, const QTable& b) {
  require_same_shape(a, b);
  return (a.table() - b.table()).cwiseAbs().maxCoeff();
}

VTable::VTable(Index n_states, double fill)
    : values_(Eigen::VectorXd::Constant(n_states, fill)) {}

VTable::VTable(Eigen::VectorXd values) : values_(std::move(values)) {}

double VTable::sup_norm() const {
  return values_.size() == 0 ? 0.0 : values_.cwiseAbs().maxCoeff();
}

VTable& VTable::operator+=(const VTable& rhs) {
  if (rhs.n_states() != n_states()) throw std::invalid_argument("VTable length mismatch");
  values_ += rhs.values_;
  return *this;
}

VTable& VTable::operator-=(const VTable& rhs) {
  if (rhs.n_states() != n_states()) throw std::invalid_argument("VTable length mismatch");
  values_ -= rhs.values_;
  return *this;
}

VTable& VTable::operator*=(double s) {
  values_ *= s;
  return *this;
}

VTable operator+(VTable lhs, const VTable& rhs) { return lhs += rhs; }
VTable operator-(VTable lhs, const VTable& rhs) { return lhs -= rhs; }
VTable operator*(double s, VTable v) { return v *= s; }

double sup_distance(const VTable& a, const VTable& b) { return (a - b).sup_norm(); }

Policy::Policy(Table probs) : probs_(std::move(probs)) {
  if (probs_.rows() == 0 || probs_.cols() == 0) {
    throw std::invalid_argument("policy table must be non-empty");
  }
  for (Index x = 0; x < probs_.rows(); ++x) {
    double sum = 0.0;
    for (Index a = 0; a < probs_.cols(); ++a) {
      const double p = probs_(x, a);
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw std::invalid_argument("policy row " + std::to_string(x) +
                                    " has a negative or non-finite entry");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw std::invalid_argument("policy row " + std::to_string(x) + " does not sum to 1");
    }
  }
}

Policy Policy::uniform(Index n_states, Index n_actions) {
  return Policy(Table::Constant(n_states, n_actions, 1.0 / static_cast<double>(n_actions)));
}

VTable Policy::expect(const QTable& q) const {
  if (q.n_states() != n_states() || q.n_actions() != n_actions()) {
    throw std::invalid_argument("policy and QTable shapes differ");
  }
  return VTable(Eigen::VectorXd(probs_.cwiseProduct(q.table()).rowwise().sum()));
}

QTable Policy::center(const QTable& q) const { return q - expect(q); }

}  // namespace grape
