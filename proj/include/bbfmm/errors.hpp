#pragma once

#include <stdexcept>
#include <string>

namespace bbfmm {

/// Invalid plan, tree or run parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A kernel produced a non-finite value, or was used outside its contract.
class KernelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input point outside the simulation box, or coordinate outside [-1, 1].
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Two internal tables disagree (e.g. interaction list vs. M2L offsets).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace bbfmm
