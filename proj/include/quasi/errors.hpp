#pragma once

#include <stdexcept>
#include <string>

namespace quasi {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotHermitian : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class NotUnitary : public Error {
 public:
  using Error::Error;
};

class NotFaithful : public Error {
 public:
  using Error::Error;
};

class InvalidGroup : public Error {
 public:
  using Error::Error;
};

/// The conjugation maps fail g∘h = gh for some pair.
class HomomorphismViolation : public Error {
 public:
  HomomorphismViolation(std::size_t g, std::size_t h, double deviation)
      : Error("homomorphism law violated for pair (" + std::to_string(g) + ", " +
              std::to_string(h) + "), deviation " + std::to_string(deviation)),
        g_(g),
        h_(h),
        deviation_(deviation) {}

  std::size_t first() const { return g_; }
  std::size_t second() const { return h_; }
  double deviation() const { return deviation_; }

 private:
  std::size_t g_;
  std::size_t h_;
  double deviation_;
};

class NotStronglyQuasiInvariant : public Error {
 public:
  using Error::Error;
};

class ChainNotNested : public Error {
 public:
  using Error::Error;
};

/// F(G) meets the center in more than the scalars.
class ErgodicityHypothesisFailed : public Error {
 public:
  using Error::Error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

/// A decomposition produced non-finite output.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace quasi
