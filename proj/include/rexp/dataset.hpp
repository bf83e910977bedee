#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rexp {

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  const double* data() const { return data_.data(); }
  double* data() { return data_.data(); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct GroundTruth {
  std::vector<double> beta_star;          // length p
  std::vector<std::size_t> active_set;    // 0-based indices of nonzeros
  double alpha = 0.5;
};

struct Dataset {
  Matrix X;
  std::vector<double> y;
  std::optional<GroundTruth> truth;

  std::size_t n() const { return X.rows(); }
  std::size_t p() const { return X.cols(); }

  void validate() const {
    if (n() == 0 || p() == 0) throw std::domain_error("empty dataset");
    if (y.size() != n()) throw std::domain_error("y length mismatch");
  }
};

// CSV with header x1..xp,y; '.' decimal separator, one row per observation.
void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

}  // namespace rexp
