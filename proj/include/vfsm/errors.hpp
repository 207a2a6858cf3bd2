#ifndef VFSM_ERRORS_HPP
#define VFSM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vfsm {

// Every error raised by the library derives from Error so callers (the CLI in
// particular) can separate library failures from unrelated exceptions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class DegenerateDiagonal : public Error {
 public:
  using Error::Error;
};

class AllStartsFailed : public Error {
 public:
  using Error::Error;
};

class SubsampleTooLarge : public Error {
 public:
  using Error::Error;
};

class DegenerateTestSample : public Error {
 public:
  using Error::Error;
};

class OracleFailure : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, long line, long column)
      : Error(message), line_(line), column_(column) {}

  long line() const { return line_; }
  long column() const { return column_; }

 private:
  long line_;
  long column_;
};

}  // namespace vfsm

#endif  // VFSM_ERRORS_HPP
