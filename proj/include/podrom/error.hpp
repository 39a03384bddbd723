#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace podrom {

// Bad input data or mismatched shapes/grids.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Requested basis size exceeds the numerical rank of the snapshot data.
class RankDeficient : public std::runtime_error {
 public:
  RankDeficient(std::size_t requested, std::size_t rank)
      : std::runtime_error("requested " + std::to_string(requested) +
                           " POD modes but numerical rank is " +
                           std::to_string(rank)),
        requested_(requested),
        rank_(rank) {}

  std::size_t requested() const { return requested_; }
  std::size_t rank() const { return rank_; }

 private:
  std::size_t requested_;
  std::size_t rank_;
};

// Newton iteration did not reach the tolerance.
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, double residual)
      : std::runtime_error(what + " (last residual " +
                           std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const { return residual_; }

 private:
  double residual_;
};

// Reduced operator is numerically singular.
class IllPosedRom : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace podrom
