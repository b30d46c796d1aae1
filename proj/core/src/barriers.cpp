#include "dualpath/barriers.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace dualpath {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dim(const Vec& x, Index n, const char* who) {
  if (x.size() != n) {
    throw Error(ErrorKind::kInvalidInstance, std::string(who) + ": dimension mismatch");
  }
}

void require_inside(const Barrier& F, const Vec& x, const char* who) {
  if (!F.contains(x)) {
    throw Error(ErrorKind::kDomain, std::string(who) + ": point outside the domain");
  }
}

}  // namespace

// ---------------------------------------------------------------- orthant

OrthantBarrier::OrthantBarrier(Index n) : n_(n) {
  if (n <= 0) {
    throw Error(ErrorKind::kInvalidInstance, "orthant barrier: dimension must be positive");
  }
}

bool OrthantBarrier::contains(const Vec& x) const {
  return x.size() == n_ && (x.array() > 0.0).all() && x.allFinite();
}

double OrthantBarrier::value(const Vec& x) const {
  require_inside(*this, x, "orthant barrier");
  return -x.array().log().sum();
}

Vec OrthantBarrier::gradient(const Vec& x) const {
  require_inside(*this, x, "orthant barrier");
  return -x.array().inverse().matrix();
}

Mat OrthantBarrier::hessian(const Vec& x) const {
  require_inside(*this, x, "orthant barrier");
  return x.array().square().inverse().matrix().asDiagonal();
}

std::optional<Polytope> OrthantBarrier::polytope() const {
  return Polytope{-Mat::Identity(n_, n_), Vec::Zero(n_)};
}

std::optional<Vec> OrthantBarrier::interior_point() const { return Vec::Ones(n_); }

// ---------------------------------------------------------------- interval

IntervalBarrier::IntervalBarrier(Vec lower, Vec upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() == 0 || lower_.size() != upper_.size()) {
    throw Error(ErrorKind::kInvalidInstance, "interval barrier: bad bound vectors");
  }
  if (!((upper_ - lower_).array() > 0.0).all()) {
    throw Error(ErrorKind::kInvalidInstance, "interval barrier: empty interval");
  }
}

bool IntervalBarrier::contains(const Vec& x) const {
  return x.size() == lower_.size() && (x.array() > lower_.array()).all() &&
         (x.array() < upper_.array()).all();
}

double IntervalBarrier::value(const Vec& x) const {
  require_inside(*this, x, "interval barrier");
  return -((x - lower_).array().log() + (upper_ - x).array().log()).sum();
}

Vec IntervalBarrier::gradient(const Vec& x) const {
  require_inside(*this, x, "interval barrier");
  return ((upper_ - x).array().inverse() - (x - lower_).array().inverse()).matrix();
}

Mat IntervalBarrier::hessian(const Vec& x) const {
  require_inside(*this, x, "interval barrier");
  Vec d = (x - lower_).array().square().inverse() + (upper_ - x).array().square().inverse();
  return d.asDiagonal();
}

std::optional<Polytope> IntervalBarrier::polytope() const {
  const Index n = lower_.size();
  Polytope p{Mat::Zero(2 * n, n), Vec::Zero(2 * n)};
  p.G.topRows(n) = -Mat::Identity(n, n);
  p.G.bottomRows(n) = Mat::Identity(n, n);
  p.h.head(n) = -lower_;
  p.h.tail(n) = upper_;
  return p;
}

std::optional<Vec> IntervalBarrier::interior_point() const {
  return Vec(0.5 * (lower_ + upper_));
}

// ---------------------------------------------------------------- halfspace

HalfspaceBarrier::HalfspaceBarrier(Vec a, double d) : a_(std::move(a)), d_(d) {
  if (a_.size() == 0 || a_.norm() == 0.0) {
    throw Error(ErrorKind::kInvalidInstance, "halfspace barrier: normal must be nonzero");
  }
}

bool HalfspaceBarrier::contains(const Vec& x) const {
  return x.size() == a_.size() && d_ - a_.dot(x) > 0.0;
}

double HalfspaceBarrier::value(const Vec& x) const {
  require_inside(*this, x, "halfspace barrier");
  return -std::log(d_ - a_.dot(x));
}

Vec HalfspaceBarrier::gradient(const Vec& x) const {
  require_inside(*this, x, "halfspace barrier");
  return a_ / (d_ - a_.dot(x));
}

Mat HalfspaceBarrier::hessian(const Vec& x) const {
  require_inside(*this, x, "halfspace barrier");
  const double r = d_ - a_.dot(x);
  return (a_ * a_.transpose()) / (r * r);
}

std::optional<Polytope> HalfspaceBarrier::polytope() const {
  return Polytope{a_.transpose(), Vec::Constant(1, d_)};
}

// ---------------------------------------------------------------- log epigraph

bool LogEpigraphBarrier::contains(const Vec& x) const {
  return x.size() == 2 && x(0) > 0.0 && std::isfinite(x(1)) &&
         std::log(x(0)) + x(1) > 0.0;
}

double LogEpigraphBarrier::value(const Vec& x) const {
  require_inside(*this, x, "log epigraph barrier");
  return -std::log(x(0)) - std::log(std::log(x(0)) + x(1));
}

Vec LogEpigraphBarrier::gradient(const Vec& x) const {
  require_inside(*this, x, "log epigraph barrier");
  const double v = x(0);
  const double w = std::log(v) + x(1);
  Vec g(2);
  g << -1.0 / v - 1.0 / (v * w), -1.0 / w;
  return g;
}

Mat LogEpigraphBarrier::hessian(const Vec& x) const {
  require_inside(*this, x, "log epigraph barrier");
  const double v = x(0);
  const double w = std::log(v) + x(1);
  Mat H(2, 2);
  H(0, 0) = 1.0 / (v * v) + (w + 1.0) / (v * v * w * w);
  H(0, 1) = H(1, 0) = 1.0 / (v * w * w);
  H(1, 1) = 1.0 / (w * w);
  return H;
}

std::optional<Vec> LogEpigraphBarrier::interior_point() const {
  return Vec::Ones(2);
}

// ---------------------------------------------------------------- entropy epigraph

bool EntropyEpigraphBarrier::contains(const Vec& x) const {
  return x.size() == 2 && x(0) > 0.0 && std::isfinite(x(0)) &&
         x(1) - x(0) * std::log(x(0)) > 0.0;
}

double EntropyEpigraphBarrier::value(const Vec& x) const {
  require_inside(*this, x, "entropy epigraph barrier");
  const double v = x(0);
  return -std::log(v) - std::log(x(1) - v * std::log(v));
}

Vec EntropyEpigraphBarrier::gradient(const Vec& x) const {
  require_inside(*this, x, "entropy epigraph barrier");
  const double v = x(0);
  const double lv = std::log(v);
  const double w = x(1) - v * lv;
  Vec g(2);
  g << -1.0 / v + (lv + 1.0) / w, -1.0 / w;
  return g;
}

Mat EntropyEpigraphBarrier::hessian(const Vec& x) const {
  require_inside(*this, x, "entropy epigraph barrier");
  const double v = x(0);
  const double lv = std::log(v);
  const double w = x(1) - v * lv;
  Mat H(2, 2);
  H(0, 0) = 1.0 / (v * v) + 1.0 / (v * w) + (lv + 1.0) * (lv + 1.0) / (w * w);
  H(0, 1) = H(1, 0) = -(lv + 1.0) / (w * w);
  H(1, 1) = 1.0 / (w * w);
  return H;
}

std::optional<Vec> EntropyEpigraphBarrier::interior_point() const {
  return Vec::Ones(2);
}

// ---------------------------------------------------------------- quadratic epigraph

QuadEpigraphBarrier::QuadEpigraphBarrier(Mat Q, Vec q, double r)
    : Q_(std::move(Q)), q_(std::move(q)), r_(r) {
  if (q_.size() == 0 || Q_.rows() != q_.size() || Q_.cols() != q_.size()) {
    throw Error(ErrorKind::kInvalidInstance, "quadratic epigraph: bad dimensions");
  }
  if ((Q_ - Q_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + Q_.cwiseAbs().maxCoeff())) {
    throw Error(ErrorKind::kInvalidInstance, "quadratic epigraph: Q must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(Q_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12 * (1.0 + Q_.cwiseAbs().maxCoeff())) {
    throw Error(ErrorKind::kInvalidInstance,
                "quadratic epigraph: Q must be positive semidefinite");
  }
}

double QuadEpigraphBarrier::phi(const Vec& x) const {
  return -0.5 * x.dot(Q_ * x) + q_.dot(x) + r_;
}

bool QuadEpigraphBarrier::contains(const Vec& xs) const {
  if (xs.size() != dim() || !xs.allFinite()) return false;
  const Index n = q_.size();
  return phi(xs.head(n)) - xs(n) > 0.0;
}

double QuadEpigraphBarrier::value(const Vec& xs) const {
  require_inside(*this, xs, "quadratic epigraph barrier");
  const Index n = q_.size();
  return -std::log(phi(xs.head(n)) - xs(n));
}

Vec QuadEpigraphBarrier::gradient(const Vec& xs) const {
  require_inside(*this, xs, "quadratic epigraph barrier");
  const Index n = q_.size();
  const Vec x = xs.head(n);
  const double w = phi(x) - xs(n);
  Vec g(n + 1);
  g.head(n) = -(q_ - Q_ * x) / w;
  g(n) = 1.0 / w;
  return g;
}

Mat QuadEpigraphBarrier::hessian(const Vec& xs) const {
  require_inside(*this, xs, "quadratic epigraph barrier");
  const Index n = q_.size();
  const Vec x = xs.head(n);
  const double w = phi(x) - xs(n);
  Vec dw(n + 1);
  dw.head(n) = q_ - Q_ * x;
  dw(n) = -1.0;
  Mat H = dw * dw.transpose() / (w * w);
  H.topLeftCorner(n, n) += Q_ / w;
  return H;
}

// ---------------------------------------------------------------- product

ProductBarrier::ProductBarrier(std::vector<BarrierPtr> factors)
    : factors_(std::move(factors)) {
  if (factors_.empty()) {
    throw Error(ErrorKind::kInvalidInstance, "product barrier: no factors");
  }
  for (const auto& f : factors_) {
    if (!f) {
      throw Error(ErrorKind::kInvalidInstance, "product barrier: null factor");
    }
    offsets_.push_back(dim_);
    dim_ += f->dim();
    nu_ += f->nu();
  }
}

bool ProductBarrier::contains(const Vec& x) const {
  if (x.size() != dim_) return false;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (!factors_[i]->contains(x.segment(offsets_[i], factors_[i]->dim()))) return false;
  }
  return true;
}

double ProductBarrier::value(const Vec& x) const {
  require_dim(x, dim_, "product barrier");
  double v = 0.0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    v += factors_[i]->value(x.segment(offsets_[i], factors_[i]->dim()));
  }
  return v;
}

Vec ProductBarrier::gradient(const Vec& x) const {
  require_dim(x, dim_, "product barrier");
  Vec g(dim_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const Index k = factors_[i]->dim();
    g.segment(offsets_[i], k) = factors_[i]->gradient(x.segment(offsets_[i], k));
  }
  return g;
}

Mat ProductBarrier::hessian(const Vec& x) const {
  require_dim(x, dim_, "product barrier");
  Mat H = Mat::Zero(dim_, dim_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const Index k = factors_[i]->dim();
    H.block(offsets_[i], offsets_[i], k, k) =
        factors_[i]->hessian(x.segment(offsets_[i], k));
  }
  return H;
}

std::optional<Polytope> ProductBarrier::polytope() const {
  std::vector<Polytope> parts;
  Index rows = 0;
  for (const auto& f : factors_) {
    auto p = f->polytope();
    if (!p) return std::nullopt;
    rows += p->G.rows();
    parts.push_back(std::move(*p));
  }
  Polytope out{Mat::Zero(rows, dim_), Vec::Zero(rows)};
  Index r = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Index k = parts[i].G.rows();
    out.G.block(r, offsets_[i], k, factors_[i]->dim()) = parts[i].G;
    out.h.segment(r, k) = parts[i].h;
    r += k;
  }
  return out;
}

std::optional<Vec> ProductBarrier::interior_point() const {
  Vec x(dim_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    auto p = factors_[i]->interior_point();
    if (!p) return std::nullopt;
    x.segment(offsets_[i], factors_[i]->dim()) = *p;
  }
  return x;
}

// ---------------------------------------------------------------- sum

SumBarrier::SumBarrier(Index dim, std::vector<Term> terms)
    : dim_(dim), terms_(std::move(terms)) {
  if (dim_ <= 0 || terms_.empty()) {
    throw Error(ErrorKind::kInvalidInstance, "sum barrier: empty");
  }
  for (const auto& t : terms_) {
    if (!t.barrier || static_cast<Index>(t.indices.size()) != t.barrier->dim()) {
      throw Error(ErrorKind::kInvalidInstance, "sum barrier: term size mismatch");
    }
    for (Index j : t.indices) {
      if (j < 0 || j >= dim_) {
        throw Error(ErrorKind::kInvalidInstance, "sum barrier: index out of range");
      }
    }
    nu_ += t.barrier->nu();
  }
}

Vec SumBarrier::gather(const Vec& x, const Term& term) const {
  Vec out(static_cast<Index>(term.indices.size()));
  for (std::size_t k = 0; k < term.indices.size(); ++k) {
    out(static_cast<Index>(k)) = x(term.indices[k]);
  }
  return out;
}

bool SumBarrier::contains(const Vec& x) const {
  if (x.size() != dim_) return false;
  for (const auto& t : terms_) {
    if (!t.barrier->contains(gather(x, t))) return false;
  }
  return true;
}

double SumBarrier::value(const Vec& x) const {
  require_dim(x, dim_, "sum barrier");
  double v = 0.0;
  for (const auto& t : terms_) v += t.barrier->value(gather(x, t));
  return v;
}

Vec SumBarrier::gradient(const Vec& x) const {
  require_dim(x, dim_, "sum barrier");
  Vec g = Vec::Zero(dim_);
  for (const auto& t : terms_) {
    const Vec gt = t.barrier->gradient(gather(x, t));
    for (std::size_t k = 0; k < t.indices.size(); ++k) {
      g(t.indices[k]) += gt(static_cast<Index>(k));
    }
  }
  return g;
}

Mat SumBarrier::hessian(const Vec& x) const {
  require_dim(x, dim_, "sum barrier");
  Mat H = Mat::Zero(dim_, dim_);
  for (const auto& t : terms_) {
    const Mat Ht = t.barrier->hessian(gather(x, t));
    for (std::size_t a = 0; a < t.indices.size(); ++a) {
      for (std::size_t b = 0; b < t.indices.size(); ++b) {
        H(t.indices[a], t.indices[b]) += Ht(static_cast<Index>(a), static_cast<Index>(b));
      }
    }
  }
  return H;
}

std::optional<Polytope> SumBarrier::polytope() const {
  std::vector<Polytope> parts;
  Index rows = 0;
  for (const auto& t : terms_) {
    auto p = t.barrier->polytope();
    if (!p) return std::nullopt;
    rows += p->G.rows();
    parts.push_back(std::move(*p));
  }
  Polytope out{Mat::Zero(rows, dim_), Vec::Zero(rows)};
  Index r = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& idx = terms_[i].indices;
    for (Index row = 0; row < parts[i].G.rows(); ++row) {
      for (std::size_t k = 0; k < idx.size(); ++k) {
        out.G(r + row, idx[k]) += parts[i].G(row, static_cast<Index>(k));
      }
      out.h(r + row) = parts[i].h(row);
    }
    r += parts[i].G.rows();
  }
  return out;
}

// ---------------------------------------------------------------- affine restriction

AffineRestriction::AffineRestriction(BarrierPtr base, Mat Z, Vec x0)
    : base_(std::move(base)), Z_(std::move(Z)), x0_(std::move(x0)) {
  if (!base_ || Z_.rows() != base_->dim() || x0_.size() != base_->dim()) {
    throw Error(ErrorKind::kInvalidInstance, "affine restriction: dimension mismatch");
  }
}

bool AffineRestriction::contains(const Vec& z) const {
  return z.size() == Z_.cols() && base_->contains(lift(z));
}

double AffineRestriction::value(const Vec& z) const { return base_->value(lift(z)); }

Vec AffineRestriction::gradient(const Vec& z) const {
  return Z_.transpose() * base_->gradient(lift(z));
}

Mat AffineRestriction::hessian(const Vec& z) const {
  return Z_.transpose() * base_->hessian(lift(z)) * Z_;
}

std::optional<Polytope> AffineRestriction::polytope() const {
  auto p = base_->polytope();
  if (!p) return std::nullopt;
  return Polytope{p->G * Z_, p->h - p->G * x0_};
}

}  // namespace dualpath
