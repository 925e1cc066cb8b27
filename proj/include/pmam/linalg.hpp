#pragma once

// Dense real linear algebra shared by every solver: value-semantic matrix and
// vector types, LU with partial pivoting, inverses and the group inverse of
// I - P.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace pmam {

inline constexpr double kDefaultPivotTolerance = 1e-13;

class DenseVector {
public:
    DenseVector() = default;
    explicit DenseVector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
    DenseVector(std::initializer_list<double> values);
    explicit DenseVector(std::vector<double> values);

    static DenseVector ones(std::size_t n) { return DenseVector(n, 1.0); }

    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i) { return data_[i]; }
    double operator()(std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    const std::vector<double>& std_vector() const noexcept { return data_; }

    double sum() const noexcept;
    bool all_finite() const noexcept;

    DenseVector& operator+=(const DenseVector& rhs);
    DenseVector& operator-=(const DenseVector& rhs);
    DenseVector& operator*=(double s) noexcept;

    friend bool operator==(const DenseVector&, const DenseVector&) = default;

private:
    std::vector<double> data_;
};

DenseVector operator+(DenseVector lhs, const DenseVector& rhs);
DenseVector operator-(DenseVector lhs, const DenseVector& rhs);
DenseVector operator*(double s, DenseVector v);

double dot(const DenseVector& a, const DenseVector& b);
double max_abs(const DenseVector& v) noexcept;

/// Row-major dense matrix. Zero-sized matrices are allowed so that the empty
/// complement of a partition can be represented without special cases.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
    static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    DenseVector row_vector(std::size_t i) const;
    DenseVector col_vector(std::size_t j) const;
    DenseVector row_sums() const;

    DenseMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
    void set_block(std::size_t r0, std::size_t c0, const DenseMatrix& b);
    void add_block(std::size_t r0, std::size_t c0, const DenseMatrix& b);
    DenseMatrix gather(std::span<const std::size_t> row_idx, std::span<const std::size_t> col_idx) const;
    DenseMatrix transpose() const;

    bool all_finite() const noexcept;

    DenseMatrix& operator+=(const DenseMatrix& rhs);
    DenseMatrix& operator-=(const DenseMatrix& rhs);
    DenseMatrix& operator*=(double s) noexcept;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix lhs, const DenseMatrix& rhs);
DenseMatrix operator-(DenseMatrix lhs, const DenseMatrix& rhs);
DenseMatrix operator*(double s, DenseMatrix m);
DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseVector operator*(const DenseMatrix& a, const DenseVector& x);

/// Row vector times matrix, xᵀM.
DenseVector left_multiply(const DenseVector& x, const DenseMatrix& m);
/// u vᵀ.
DenseMatrix outer(const DenseVector& u, const DenseVector& v);
/// Horizontal concatenation [left, right].
DenseMatrix hcat(const DenseMatrix& left, const DenseMatrix& right);
DenseMatrix power(const DenseMatrix& m, unsigned exponent);

/// Maximum absolute row sum; 0 exactly when m is the zero matrix.
double infinity_norm(const DenseMatrix& m) noexcept;
double max_abs(const DenseMatrix& m) noexcept;
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

/// LU factorization with partial pivoting. A pivot is rejected when its
/// magnitude is at most `pivot_tolerance` times the largest entry of the
/// original row it came from.
class LuDecomposition {
public:
    explicit LuDecomposition(DenseMatrix m, double pivot_tolerance = kDefaultPivotTolerance);

    std::size_t order() const noexcept { return lu_.rows(); }
    DenseMatrix solve(DenseMatrix rhs) const;
    DenseVector solve(const DenseVector& rhs) const;

private:
    DenseMatrix lu_;
    std::vector<std::size_t> perm_;
};

DenseMatrix solve_linear(const DenseMatrix& m, const DenseMatrix& rhs,
                         double pivot_tolerance = kDefaultPivotTolerance);
DenseMatrix inverse(const DenseMatrix& m, double pivot_tolerance = kDefaultPivotTolerance);

/// Group inverse W# of a singular operator W with right null vector e and left
/// null vector pi (W = I - P, or W = -Q for a generator):
/// W# = (W + e piᵀ)⁻¹ - e piᵀ.
DenseMatrix group_inverse_of_operator(const DenseMatrix& w, const DenseVector& pi,
                                      double pivot_tolerance = kDefaultPivotTolerance);

/// (I - P)# for a stochastic P with stationary vector pi.
DenseMatrix group_inverse(const DenseMatrix& p, const DenseVector& pi,
                          double pivot_tolerance = kDefaultPivotTolerance);

/// Stationary vector of P: solves xᵀ(I - P) = 0 with the last balance
/// equation replaced by the normalization xᵀe = 1.
DenseVector stationary_vector(const DenseMatrix& p, double pivot_tolerance = kDefaultPivotTolerance);

/// Same for a generator: xᵀQ = 0, xᵀe = 1.
DenseVector stationary_vector_generator(const DenseMatrix& q,
                                        double pivot_tolerance = kDefaultPivotTolerance);

}  // namespace pmam
