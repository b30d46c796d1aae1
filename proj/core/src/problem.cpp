#include "dualpath/problem.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/QR>

#include "dualpath/barriers.hpp"

namespace dualpath {

namespace {

constexpr double kRankTol = 1e-10;
constexpr double kEqualityTol = 1e-10;

Index numeric_rank(const Mat& M) {
  if (M.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Mat> qr(M);
  qr.setThreshold(kRankTol);
  return qr.rank();
}

ValidationReport fail(ValidationCode code, std::optional<std::size_t> block,
                      std::string message) {
  return ValidationReport{code, block, std::move(message)};
}

}  // namespace

Index SeparableProblem::n() const {
  Index n = 0;
  for (const auto& blk : blocks) n += blk.dim();
  return n;
}

double SeparableProblem::nu() const {
  double nu = 0.0;
  for (const auto& blk : blocks) nu += blk.barrier->nu();
  return nu;
}

std::string to_string(ValidationCode code) {
  switch (code) {
    case ValidationCode::kOk: return "ok";
    case ValidationCode::kNoBlocks: return "no_blocks";
    case ValidationCode::kMissingBarrier: return "missing_barrier";
    case ValidationCode::kDimensionMismatch: return "dimension_mismatch";
    case ValidationCode::kCouplingRowMismatch: return "coupling_row_mismatch";
    case ValidationCode::kEqualityShape: return "equality_shape";
    case ValidationCode::kEqualityRankDeficient: return "equality_rank_deficient";
    case ValidationCode::kStartNotInterior: return "start_not_interior";
    case ValidationCode::kStartViolatesEquality: return "start_violates_equality";
    case ValidationCode::kCouplingRankDeficient: return "coupling_rank_deficient";
    case ValidationCode::kReducedCouplingRankDeficient:
      return "reduced_coupling_rank_deficient";
    case ValidationCode::kNonFinite: return "non_finite";
  }
  return "unknown";
}

ValidationReport validate(const SeparableProblem& problem) {
  if (problem.blocks.empty()) {
    return fail(ValidationCode::kNoBlocks, std::nullopt, "problem has no blocks");
  }
  const Index m = problem.m();
  if (m == 0 || !problem.b.allFinite()) {
    return fail(ValidationCode::kNonFinite, std::nullopt,
                "coupling right-hand side is empty or not finite");
  }

  for (std::size_t i = 0; i < problem.blocks.size(); ++i) {
    const Block& blk = problem.blocks[i];
    const std::string tag = "block " + std::to_string(i) + ": ";
    if (!blk.barrier) {
      return fail(ValidationCode::kMissingBarrier, i, tag + "missing barrier");
    }
    const Index n = blk.dim();
    if (n == 0 || blk.barrier->dim() != n || blk.A.cols() != n || blk.x_start.size() != n) {
      return fail(ValidationCode::kDimensionMismatch, i,
                  tag + "c, A, barrier and x_start dimensions disagree");
    }
    if (blk.A.rows() != m) {
      return fail(ValidationCode::kCouplingRowMismatch, i,
                  tag + "A has " + std::to_string(blk.A.rows()) + " rows, expected " +
                      std::to_string(m));
    }
    if (!blk.c.allFinite() || !blk.A.allFinite() || !blk.x_start.allFinite()) {
      return fail(ValidationCode::kNonFinite, i, tag + "non-finite data");
    }
    if (blk.equality) {
      const auto& eq = *blk.equality;
      if (eq.E.cols() != n || eq.f.size() != eq.E.rows() || eq.E.rows() == 0 ||
          eq.E.rows() >= n) {
        return fail(ValidationCode::kEqualityShape, i, tag + "E/f shapes are inconsistent");
      }
      if (!eq.E.allFinite() || !eq.f.allFinite()) {
        return fail(ValidationCode::kNonFinite, i, tag + "non-finite equality data");
      }
      if (numeric_rank(eq.E) != eq.E.rows()) {
        return fail(ValidationCode::kEqualityRankDeficient, i,
                    tag + "E does not have full row rank");
      }
    }
    if (!blk.barrier->contains(blk.x_start)) {
      return fail(ValidationCode::kStartNotInterior, i,
                  tag + "x_start is not interior to the barrier domain");
    }
    if (blk.equality) {
      const auto& eq = *blk.equality;
      const double res = (eq.E * blk.x_start - eq.f).cwiseAbs().maxCoeff();
      if (res > kEqualityTol * (1.0 + eq.f.cwiseAbs().maxCoeff())) {
        return fail(ValidationCode::kStartViolatesEquality, i,
                    tag + "x_start violates E x = f");
      }
    }
  }

  const Index n = problem.n();
  Mat A(m, n);
  Index reduced_cols = 0;
  std::vector<Mat> reduced;
  Index off = 0;
  for (const auto& blk : problem.blocks) {
    A.middleCols(off, blk.dim()) = blk.A;
    off += blk.dim();
    auto [red, rblk] = reduce_block(blk);
    reduced_cols += rblk.dim();
    reduced.push_back(std::move(rblk.A));
  }
  if (numeric_rank(A) != m) {
    return fail(ValidationCode::kCouplingRankDeficient, std::nullopt,
                "stacked coupling matrix A is not full row rank");
  }
  Mat Ar(m, reduced_cols);
  off = 0;
  for (const auto& r : reduced) {
    Ar.middleCols(off, r.cols()) = r;
    off += r.cols();
  }
  if (numeric_rank(Ar) != m) {
    return fail(ValidationCode::kReducedCouplingRankDeficient, std::nullopt,
                "coupling matrix restricted to the local null spaces is not full row rank");
  }
  return {};
}

void require_valid(const SeparableProblem& problem) {
  auto report = validate(problem);
  if (!report.ok()) {
    throw Error(ErrorKind::kInvalidInstance,
                "invalid problem (" + to_string(report.code) + "): " + report.message);
  }
}

std::pair<NullSpaceReduction, Block> reduce_block(const Block& block) {
  const Index n = block.dim();
  NullSpaceReduction red;
  if (!block.equality) {
    red.Z = Mat::Identity(n, n);
    red.x_part = Vec::Zero(n);
    return {red, block};
  }
  const Mat& E = block.equality->E;
  const Vec& f = block.equality->f;
  const Index p = E.rows();
  if (E.cols() != n || f.size() != p || p >= n) {
    throw Error(ErrorKind::kInvalidInstance, "reduce_block: bad equality shape");
  }
  if (numeric_rank(E) != p) {
    throw Error(ErrorKind::kInvalidInstance, "reduce_block: E is rank deficient");
  }

  Eigen::HouseholderQR<Mat> qr(E.transpose());
  const Mat Q = qr.householderQ() * Mat::Identity(n, n);
  const Mat R = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  red.Z = Q.rightCols(n - p);
  // E x_part = R' Y' Y R'^{-1} f = f.
  const Vec w = R.transpose().triangularView<Eigen::Lower>().solve(f);
  red.x_part = Q.leftCols(p) * w;

  Block out;
  out.c = red.Z.transpose() * block.c;
  out.A = block.A * red.Z;
  out.barrier = std::make_shared<AffineRestriction>(block.barrier, red.Z, red.x_part);
  out.x_start = red.project(block.x_start);
  return {red, out};
}

Block epigraph_transform(const NonlinearBlock& nb) {
  if (!nb.epigraph_barrier) {
    throw Error(ErrorKind::kInvalidInstance, "epigraph_transform: missing epigraph barrier");
  }
  if (!nb.phi) {
    throw Error(ErrorKind::kInvalidInstance, "epigraph_transform: missing objective");
  }
  const Index n = nb.x_start.size();
  if (nb.epigraph_barrier->dim() != n + 1 || nb.A.cols() != n ||
      (nb.domain_barrier && nb.domain_barrier->dim() != n)) {
    throw Error(ErrorKind::kInvalidInstance, "epigraph_transform: dimension mismatch");
  }

  const double phi0 = nb.phi(nb.x_start);
  const double scale = 1.0 + std::abs(phi0);
  const double s_lower = nb.s_lower.value_or(phi0 - 10.0 * scale);
  if (!(s_lower < phi0)) {
    throw Error(ErrorKind::kInvalidInstance,
                "epigraph_transform: slack lower bound is not below phi(x_start)");
  }

  std::vector<Index> x_idx(static_cast<std::size_t>(n));
  std::iota(x_idx.begin(), x_idx.end(), Index{0});
  std::vector<Index> xs_idx = x_idx;
  xs_idx.push_back(n);

  std::vector<SumBarrier::Term> terms;
  if (nb.domain_barrier) terms.push_back({nb.domain_barrier, x_idx});
  terms.push_back({nb.epigraph_barrier, xs_idx});
  terms.push_back({std::make_shared<HalfspaceBarrier>(Vec::Constant(1, -1.0), -s_lower),
                   std::vector<Index>{n}});

  Block out;
  out.c = Vec::Zero(n + 1);
  out.c(n) = 1.0;
  out.A = Mat::Zero(nb.A.rows(), n + 1);
  out.A.leftCols(n) = nb.A;
  out.barrier = std::make_shared<SumBarrier>(n + 1, std::move(terms));
  if (nb.equality) {
    LocalEquality eq{Mat::Zero(nb.equality->E.rows(), n + 1), nb.equality->f};
    eq.E.leftCols(n) = nb.equality->E;
    out.equality = std::move(eq);
  }
  // Start the slack strictly between s_lower and phi(x_start).
  out.x_start = Vec(n + 1);
  out.x_start.head(n) = nb.x_start;
  out.x_start(n) = 0.5 * (phi0 + std::max(s_lower, phi0 - scale));
  if (!out.barrier->contains(out.x_start)) {
    throw Error(ErrorKind::kInvalidInstance,
                "epigraph_transform: x_start is not interior to the transformed domain");
  }
  return out;
}

}  // namespace dualpath
