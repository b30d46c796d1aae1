#pragma once

#include <vector>

#include "dualpath/scfun.hpp"

namespace dualpath {

/// -sum ln x_i on the positive orthant, nu = n.
class OrthantBarrier final : public Barrier {
 public:
  explicit OrthantBarrier(Index n);

  Index dim() const override { return n_; }
  double nu() const override { return static_cast<double>(n_); }
  bool contains(const Vec& x) const override;
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  std::string kind() const override { return "orthant"; }
  std::optional<Polytope> polytope() const override;
  std::optional<Vec> interior_point() const override;

 private:
  Index n_;
};

/// -sum [ln(x_i - l_i) + ln(u_i - x_i)] on an open box, nu = 2n.
class IntervalBarrier final : public Barrier {
 public:
  IntervalBarrier(Vec lower, Vec upper);

  Index dim() const override { return lower_.size(); }
  double nu() const override { return 2.0 * static_cast<double>(lower_.size()); }
  bool contains(const Vec& x) const override;
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  std::string kind() const override { return "interval"; }
  std::optional<Polytope> polytope() const override;
  std::optional<Vec> interior_point() const override;

  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }

 private:
  Vec lower_;
  Vec upper_;
};

/// -ln(d - a'x), nu = 1. Its Hessian has rank one, so it is meant to be
/// combined with other terms through SumBarrier.
class HalfspaceBarrier final : public Barrier {
 public:
  HalfspaceBarrier(Vec a, double d);

  Index dim() const override { return a_.size(); }
  double nu() const override { return 1.0; }
  bool contains(const Vec& x) const override;
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  std::string kind() const override { return "halfspace"; }
  std::optional<Polytope> polytope() const override;

  const Vec& a() const { return a_; }
  double d() const { return d_; }

 private:
  Vec a_;
  double d_;
};

/// F(v, s) = -ln v - ln(ln v + s), the barrier of {(v, s) : s >= -ln v},
/// nu = 2.
class LogEpigraphBarrier final : public Barrier {
 public:
  Index dim() const override { return 2; }
  double nu() const override { return 2.0; }
  bool contains(const Vec& x) const override;
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  std::string kind() const override { return "log_epigraph"; }
  std::optional<Vec> interior_point() const override;
};

/// F(v, s) = -ln v - ln(s - v ln v), the barrier of {(v, s) : s >= v ln v},
/// nu = 2.
class EntropyEpigraphBarrier final : public Barrier {
 public:
  Index dim() const override { return 2; }
  double nu() const override { return 2.0; }
  bool contains(const Vec& x) const override;
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  std::string kind() const override { return "entropy_epigraph"; }
  std::optional<Vec> interior_point() const override;
};

/// F(x, s) = -ln(phi(x) - s) with phi(x) = -x'Qx/2 + q'x + r concave
/// (Q positive semidefinite), nu = 1. Variables are ordered (x, s).
class QuadEpigraphBarrier final : public Barrier {
 public:
  QuadEpigraphBarrier(Mat Q, Vec q, double r);

  Index dim() const override { return q_.size() + 1; }
  double nu() const override { return 1.0; }
  bool contains(const Vec& x) const override;
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  std::string kind() const override { return "quad_epigraph"; }

  double phi(const Vec& x) const;
  const Mat& Q() const { return Q_; }
  const Vec& q() const { return q_; }
  double r() const { return r_; }

 private:
  Mat Q_;
  Vec q_;
  double r_;
};

/// Block-diagonal product F(x) = sum_i F_i(x[range_i]) over consecutive,
/// disjoint coordinate ranges. nu is the sum of the factor parameters.
class ProductBarrier final : public Barrier {
 public:
  explicit ProductBarrier(std::vector<BarrierPtr> factors);

  Index dim() const override { return dim_; }
  double nu() const override { return nu_; }
  bool contains(const Vec& x) const override;
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  std::string kind() const override { return "product"; }
  std::optional<Polytope> polytope() const override;
  std::optional<Vec> interior_point() const override;

  const std::vector<BarrierPtr>& factors() const { return factors_; }

 private:
  std::vector<BarrierPtr> factors_;
  std::vector<Index> offsets_;
  Index dim_ = 0;
  double nu_ = 0.0;
};

/// Sum of barriers, each reading an arbitrary (possibly overlapping)
/// selection of coordinates. Its domain is the intersection of the term
/// domains and nu is the sum of the term parameters.
class SumBarrier final : public Barrier {
 public:
  struct Term {
    BarrierPtr barrier;
    std::vector<Index> indices;
  };

  SumBarrier(Index dim, std::vector<Term> terms);

  Index dim() const override { return dim_; }
  double nu() const override { return nu_; }
  bool contains(const Vec& x) const override;
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  std::string kind() const override { return "sum"; }
  std::optional<Polytope> polytope() const override;

  const std::vector<Term>& terms() const { return terms_; }

 private:
  Vec gather(const Vec& x, const Term& term) const;

  Index dim_;
  std::vector<Term> terms_;
  double nu_ = 0.0;
};

/// Restriction z -> F(Z z + x0) of a barrier to an affine subspace. The
/// parameter nu is inherited from F.
class AffineRestriction final : public Barrier {
 public:
  AffineRestriction(BarrierPtr base, Mat Z, Vec x0);

  Index dim() const override { return Z_.cols(); }
  double nu() const override { return base_->nu(); }
  bool contains(const Vec& z) const override;
  double value(const Vec& z) const override;
  Vec gradient(const Vec& z) const override;
  Mat hessian(const Vec& z) const override;
  std::string kind() const override { return "affine"; }
  std::optional<Polytope> polytope() const override;

  Vec lift(const Vec& z) const { return Z_ * z + x0_; }

 private:
  BarrierPtr base_;
  Mat Z_;
  Vec x0_;
};

}  // namespace dualpath
