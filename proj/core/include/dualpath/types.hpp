#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace dualpath {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Failure categories surfaced by the library. The command line tool maps
/// these onto process exit codes.
enum class ErrorKind {
  kInvalidInstance,
  kNumerical,
  kIterationCap,
  kDomain,
};

/// Exception type thrown by every library routine.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dualpath
