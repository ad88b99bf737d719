#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnet {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input rejected before any computation (bad graph, bad spec, bad argument).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A point or displacement left the region where the chart is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to reach its target.
class SolverError : public Error {
 public:
  enum class Kind {
    MaxIterations,
    SingularSystem,
    ContinuationStall,
    NoProgress,
    NoNormalPoint,
    ClearanceFailure,
    NotStationary,
  };
  SolverError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Non-fatal diagnostics go through a replaceable sink (stderr by default).
using WarningHandler = std::function<void(const std::string&)>;

inline WarningHandler& warning_handler() {
  static WarningHandler handler = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
  return handler;
}

inline void set_warning_handler(WarningHandler h) { warning_handler() = std::move(h); }

inline void warn(const std::string& msg) {
  if (warning_handler()) warning_handler()(msg);
}

inline Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace gnet
