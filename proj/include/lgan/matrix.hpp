#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgan {

/// Dense row-major matrix of doubles. The single numeric carrier shared by
/// graph features, autodiff tensors and checkpoints.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {
        if (r < 0 || c < 0) throw std::invalid_argument("Matrix: negative shape");
    }
    Matrix(int r, int c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
        if (data.size() != static_cast<size_t>(r) * c)
            throw std::invalid_argument("Matrix: data length does not match shape");
    }

    static Matrix zeros(int r, int c) { return Matrix(r, c); }
    static Matrix ones(int r, int c) {
        Matrix m(r, c);
        for (auto& x : m.data) x = 1.0;
        return m;
    }
    static Matrix row(std::initializer_list<double> values) {
        Matrix m(1, static_cast<int>(values.size()));
        int j = 0;
        for (double v : values) m.data[j++] = v;
        return m;
    }

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    size_t size() const { return data.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    std::string shape_str() const {
        return "(" + std::to_string(rows) + "," + std::to_string(cols) + ")";
    }

    bool operator==(const Matrix& o) const {
        return rows == o.rows && cols == o.cols && data == o.data;
    }
};

}  // namespace lgan
