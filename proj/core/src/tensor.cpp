#include "lg3d/tensor.hpp"

#include <cmath>
#include <sstream>

namespace lg3d {

Tensor Tensor::full(std::size_t rows, std::size_t cols, double v) {
    Tensor t(rows, cols);
    for (auto& x : t.data_) x = v;
    return t;
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t(n, n);
    for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

Tensor Tensor::scalar(double v) {
    Tensor t(1, 1);
    t.data_[0] = v;
    return t;
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Tensor t(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw_error(ErrorKind::shape, "from_rows: ragged row lengths");
        std::size_t j = 0;
        for (double v : row) t.at(i, j++) = v;
        ++i;
    }
    return t;
}

Tensor Tensor::row(const std::vector<double>& values) {
    Tensor t(1, values.size());
    for (std::size_t j = 0; j < values.size(); ++j) t.at(0, j) = values[j];
    return t;
}

Tensor Tensor::column(const std::vector<double>& values) {
    Tensor t(values.size(), 1);
    for (std::size_t i = 0; i < values.size(); ++i) t.at(i, 0) = values[i];
    return t;
}

Tensor Tensor::random_uniform(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
    Tensor t(rows, cols);
    for (auto& x : t.data_) x = rng.uniform(-bound, bound);
    return t;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << rows_ << "x" << cols_;
    return os.str();
}

double Tensor::scalar_value() const {
    if (!is_scalar())
        throw_error(ErrorKind::contract, "expected a 1x1 tensor, got " + shape_str());
    return data_[0];
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

double Tensor::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

Tensor& Tensor::operator+=(const Tensor& o) {
    if (!same_shape(o))
        throw_error(ErrorKind::shape, "+= shape mismatch: " + shape_str() + " vs " + o.shape_str());
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

Tensor matmul_value(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows())
        throw_error(ErrorKind::shape,
                    "matmul: inner dimensions disagree, " + a.shape_str() + " x " + b.shape_str());
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor c(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c.data() + i * n;
        const double* arow = a.data() + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

void add_matmul_nt(Tensor& out, const Tensor& a, const Tensor& b) {
    // out[m x n] += a[m x k] * b[n x k]^T
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a.data() + i * k;
        double* orow = out.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b.data() + j * k;
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
            orow[j] += s;
        }
    }
}

void add_matmul_tn(Tensor& out, const Tensor& a, const Tensor& b) {
    // out[k x n] += a[m x k]^T * b[m x n]
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a.data() + i * k;
        const double* brow = b.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            double* orow = out.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

}  // namespace lg3d
