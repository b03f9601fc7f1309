#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rramcim {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad or missing input data (files, recordings, catalogs). CLI exit code 2.
class DataError : public Error {
public:
  using Error::Error;
};

/// A caller violated an operation's precondition.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Dense row-major matrix of doubles.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool operator==(const Matrix&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using Rng = std::mt19937_64;

/// Derives an independent generator for a named consumer of a master seed.
Rng substream(std::uint64_t seed, std::string_view name);

/// 64-bit FNV-1a, used for config hashes in output headers.
std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t value);

/// Shortest text that parses back to the same double.
std::string format_double(double value);

std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char delimiter);
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

}  // namespace rramcim
