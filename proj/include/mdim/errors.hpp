#pragma once

#include <stdexcept>
#include <string>

namespace mdim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A coordinate outside a truncated window was needed.
class WindowError : public Error {
 public:
  WindowError(const std::string& what, int required) : Error(what), required_(required) {}
  int required() const { return required_; }

 private:
  int required_;
};

/// An enumeration or exact search would exceed its configured budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Requested mass cannot be reached with the available candidate family.
class UnreachableError : public Error {
 public:
  UnreachableError(const std::string& what, double achieved) : Error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

}  // namespace mdim
