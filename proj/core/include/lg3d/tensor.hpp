#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "lg3d/error.hpp"
#include "lg3d/rng.hpp"

namespace lg3d {

// Dense row-major matrix of doubles. Vectors are 1xN or Nx1; scalars 1x1.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    static Tensor zeros(std::size_t rows, std::size_t cols) { return Tensor(rows, cols); }
    static Tensor ones(std::size_t rows, std::size_t cols) { return full(rows, cols, 1.0); }
    static Tensor full(std::size_t rows, std::size_t cols, double v);
    static Tensor identity(std::size_t n);
    static Tensor scalar(double v);
    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor row(const std::vector<double>& values);
    static Tensor column(const std::vector<double>& values);
    // entries uniform in [-bound, bound]
    static Tensor random_uniform(std::size_t rows, std::size_t cols, double bound, Rng& rng);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t numel() const { return data_.size(); }
    std::array<std::size_t, 2> shape() const { return {rows_, cols_}; }
    bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    std::string shape_str() const;

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool is_scalar() const { return rows_ == 1 && cols_ == 1; }
    double scalar_value() const;

    bool all_finite() const;
    double max_abs() const;

    bool operator==(const Tensor& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

    Tensor& operator+=(const Tensor& o);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// C = A * B, straight dense product
Tensor matmul_value(const Tensor& a, const Tensor& b);
// C += A * B^T and C += A^T * B, used by the backward pass
void add_matmul_nt(Tensor& out, const Tensor& a, const Tensor& b);
void add_matmul_tn(Tensor& out, const Tensor& a, const Tensor& b);

}  // namespace lg3d
