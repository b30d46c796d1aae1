#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dualpath/scfun.hpp"

namespace dualpath {

/// Local linear equality E x = f of a block.
struct LocalEquality {
  Mat E;
  Vec f;
};

/// One block of the separable problem: maximize c'x over the barrier domain,
/// with coupling contribution A x and optional local equality.
struct Block {
  Vec c;
  Mat A;
  BarrierPtr barrier;
  std::optional<LocalEquality> equality;
  Vec x_start;

  Index dim() const { return c.size(); }
};

/// maximize sum_i c_i'x_i  s.t.  sum_i A_i x_i = b,  x_i in X_i.
struct SeparableProblem {
  std::vector<Block> blocks;
  Vec b;

  Index m() const { return b.size(); }
  Index n() const;
  double nu() const;
};

/// Named validation failures, in the order they are checked.
enum class ValidationCode {
  kOk,
  kNoBlocks,
  kMissingBarrier,
  kDimensionMismatch,
  kCouplingRowMismatch,
  kEqualityShape,
  kEqualityRankDeficient,
  kStartNotInterior,
  kStartViolatesEquality,
  kCouplingRankDeficient,
  kReducedCouplingRankDeficient,
  kNonFinite,
};

std::string to_string(ValidationCode code);

struct ValidationReport {
  ValidationCode code = ValidationCode::kOk;
  /// Block index of the first violation when it is block-local.
  std::optional<std::size_t> block;
  std::string message;

  bool ok() const { return code == ValidationCode::kOk; }
};

/// Checks dimensions, interiority of the start points, rank of every E_i,
/// rank of the stacked coupling matrix and rank of the coupling matrix
/// restricted to the local null spaces. Stops at the first violation.
ValidationReport validate(const SeparableProblem& problem);

/// Throws Error(kInvalidInstance) carrying the report message when invalid.
void require_valid(const SeparableProblem& problem);

/// Null-space parameterization x = Z z + x_part of {x : E x = f}, from the
/// thin QR factorization E' = [Y Z] [R; 0].
struct NullSpaceReduction {
  Mat Z;
  Vec x_part;

  Vec lift(const Vec& z) const { return Z * z + x_part; }
  Vec project(const Vec& x) const { return Z.transpose() * (x - x_part); }
};

/// Computes the reduction for one block and returns the equality-free block
/// over z: c~ = Z'c, A~ = A Z, F~(z) = F(Z z + x_part). Objective and
/// coupling offsets c'x_part and A x_part are not part of the returned block.
///
/// When the block has no local equality, Z is the identity and x_part = 0.
std::pair<NullSpaceReduction, Block> reduce_block(const Block& block);

/// A block with a concave nonlinear objective phi over X.
struct NonlinearBlock {
  std::function<double(const Vec&)> phi;
  Mat A;
  /// Barrier for X over x alone (may be null if the epigraph barrier already
  /// bounds x).
  BarrierPtr domain_barrier;
  /// Barrier for {(x, s) : phi(x) >= s} over (x, s).
  BarrierPtr epigraph_barrier;
  std::optional<LocalEquality> equality;
  Vec x_start;
  /// Lower bound for the slack. Defaults to phi(x0) - 10 (1 + |phi(x0)|).
  std::optional<double> s_lower;
};

/// Moves phi into the constraints: variables (x, s), objective s, coupling
/// [A 0], barrier domain + epigraph - ln(s - s_lower).
Block epigraph_transform(const NonlinearBlock& block);

}  // namespace dualpath
