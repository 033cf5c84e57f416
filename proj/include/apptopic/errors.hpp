#pragma once

#include <stdexcept>
#include <string>

namespace apptopic {

// Exit-code classes used by the command-line tool:
// UsageError -> 1, DataError -> 2, NumericError -> 3.

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace apptopic
