#pragma once

#include <stdexcept>
#include <string>

namespace shadowbench {

// Base type for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyGroundTruth : public Error {
 public:
  using Error::Error;
};

class DegenerateClass : public Error {
 public:
  using Error::Error;
};

class DegenerateRegion : public Error {
 public:
  using Error::Error;
};

class EmptyStream : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class MissingPrediction : public Error {
 public:
  using Error::Error;
};

}  // namespace shadowbench
