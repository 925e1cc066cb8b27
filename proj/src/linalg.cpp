#include "pmam/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pmam/error.hpp"
#include "pmam/kernels.hpp"

namespace pmam {

namespace {

void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) throw Error(code, what);
}

std::string shape(const DenseMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseVector

DenseVector::DenseVector(std::initializer_list<double> values) : data_(values) {
    require(all_finite(), ErrorCode::NonFinite, "vector entries must be finite");
}

DenseVector::DenseVector(std::vector<double> values) : data_(std::move(values)) {
    require(all_finite(), ErrorCode::NonFinite, "vector entries must be finite");
}

double DenseVector::sum() const noexcept { return std::accumulate(data_.begin(), data_.end(), 0.0); }

bool DenseVector::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

DenseVector& DenseVector::operator+=(const DenseVector& rhs) {
    require(size() == rhs.size(), ErrorCode::DimensionMismatch, "vector sizes differ");
    for (std::size_t i = 0; i < size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

DenseVector& DenseVector::operator-=(const DenseVector& rhs) {
    require(size() == rhs.size(), ErrorCode::DimensionMismatch, "vector sizes differ");
    for (std::size_t i = 0; i < size(); ++i) data_[i] -= rhs.data_[i];
    return *this;
}

DenseVector& DenseVector::operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
}

DenseVector operator+(DenseVector lhs, const DenseVector& rhs) { return lhs += rhs; }
DenseVector operator-(DenseVector lhs, const DenseVector& rhs) { return lhs -= rhs; }
DenseVector operator*(double s, DenseVector v) { return v *= s; }

double dot(const DenseVector& a, const DenseVector& b) {
    require(a.size() == b.size(), ErrorCode::DimensionMismatch, "dot: vector sizes differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double max_abs(const DenseVector& v) noexcept {
    double m = 0.0;
    for (double x : v.values()) m = std::max(m, std::abs(x));
    return m;
}

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        require(r.size() == cols_, ErrorCode::DimensionMismatch, "ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
    require(all_finite(), ErrorCode::NonFinite, "matrix entries must be finite");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
    require(data_.size() == rows * cols, ErrorCode::DimensionMismatch,
            "row-major data does not match the stated shape");
    require(all_finite(), ErrorCode::NonFinite, "matrix entries must be finite");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.front().size() : 0;
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        require(row.size() == c, ErrorCode::DimensionMismatch, "ragged matrix rows");
        data.insert(data.end(), row.begin(), row.end());
    }
    return DenseMatrix(r, c, std::move(data));
}

DenseVector DenseMatrix::row_vector(std::size_t i) const {
    return DenseVector(std::vector<double>(row(i).begin(), row(i).end()));
}

DenseVector DenseMatrix::col_vector(std::size_t j) const {
    DenseVector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
}

DenseVector DenseMatrix::row_sums() const {
    DenseVector s(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        double acc = 0.0;
        for (double v : row(i)) acc += v;
        s[i] = acc;
    }
    return s;
}

DenseMatrix DenseMatrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    require(r0 + nr <= rows_ && c0 + nc <= cols_, ErrorCode::DimensionMismatch,
            "block out of range of " + shape(*this));
    DenseMatrix b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>((r0 + i) * cols_ + c0), nc,
                    b.data_.begin() + static_cast<std::ptrdiff_t>(i * nc));
    return b;
}

void DenseMatrix::set_block(std::size_t r0, std::size_t c0, const DenseMatrix& b) {
    require(r0 + b.rows_ <= rows_ && c0 + b.cols_ <= cols_, ErrorCode::DimensionMismatch,
            "set_block out of range of " + shape(*this));
    for (std::size_t i = 0; i < b.rows_; ++i)
        std::copy_n(b.data_.begin() + static_cast<std::ptrdiff_t>(i * b.cols_), b.cols_,
                    data_.begin() + static_cast<std::ptrdiff_t>((r0 + i) * cols_ + c0));
}

void DenseMatrix::add_block(std::size_t r0, std::size_t c0, const DenseMatrix& b) {
    require(r0 + b.rows_ <= rows_ && c0 + b.cols_ <= cols_, ErrorCode::DimensionMismatch,
            "add_block out of range of " + shape(*this));
    for (std::size_t i = 0; i < b.rows_; ++i)
        for (std::size_t j = 0; j < b.cols_; ++j) (*this)(r0 + i, c0 + j) += b(i, j);
}

DenseMatrix DenseMatrix::gather(std::span<const std::size_t> row_idx,
                                std::span<const std::size_t> col_idx) const {
    DenseMatrix g(row_idx.size(), col_idx.size());
    for (std::size_t i = 0; i < row_idx.size(); ++i)
        for (std::size_t j = 0; j < col_idx.size(); ++j) g(i, j) = (*this)(row_idx[i], col_idx[j]);
    return g;
}

DenseMatrix DenseMatrix::transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

bool DenseMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& rhs) {
    require(rows_ == rhs.rows_ && cols_ == rhs.cols_, ErrorCode::DimensionMismatch,
            "cannot add " + shape(rhs) + " to " + shape(*this));
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& rhs) {
    require(rows_ == rhs.rows_ && cols_ == rhs.cols_, ErrorCode::DimensionMismatch,
            "cannot subtract " + shape(rhs) + " from " + shape(*this));
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
    return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
}

DenseMatrix operator+(DenseMatrix lhs, const DenseMatrix& rhs) { return lhs += rhs; }
DenseMatrix operator-(DenseMatrix lhs, const DenseMatrix& rhs) { return lhs -= rhs; }
DenseMatrix operator*(double s, DenseMatrix m) { return m *= s; }

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.cols() == b.rows(), ErrorCode::DimensionMismatch,
            "cannot multiply " + shape(a) + " by " + shape(b));
    DenseMatrix c;
    kernels::multiply(a, b, c);
    return c;
}

DenseVector operator*(const DenseMatrix& a, const DenseVector& x) {
    require(a.cols() == x.size(), ErrorCode::DimensionMismatch, "matrix-vector shape mismatch");
    DenseVector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        const auto r = a.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * x[j];
        y[i] = s;
    }
    return y;
}

DenseVector left_multiply(const DenseVector& x, const DenseMatrix& m) {
    require(x.size() == m.rows(), ErrorCode::DimensionMismatch, "vector-matrix shape mismatch");
    DenseVector y(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const auto r = m.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) y[j] += xi * r[j];
    }
    return y;
}

DenseMatrix outer(const DenseVector& u, const DenseVector& v) {
    DenseMatrix m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
    return m;
}

DenseMatrix hcat(const DenseMatrix& left, const DenseMatrix& right) {
    require(left.rows() == right.rows(), ErrorCode::DimensionMismatch, "hcat: row counts differ");
    DenseMatrix m(left.rows(), left.cols() + right.cols());
    m.set_block(0, 0, left);
    m.set_block(0, left.cols(), right);
    return m;
}

DenseMatrix power(const DenseMatrix& m, unsigned exponent) {
    require(m.square(), ErrorCode::DimensionMismatch, "power of a non-square matrix");
    DenseMatrix result = DenseMatrix::identity(m.rows());
    DenseMatrix base = m;
    while (exponent > 0) {
        if (exponent & 1u) result = result * base;
        exponent >>= 1u;
        if (exponent > 0) base = base * base;
    }
    return result;
}

double infinity_norm(const DenseMatrix& m) noexcept {
    double best = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (double v : m.row(i)) s += std::abs(v);
        best = std::max(best, s);
    }
    return best;
}

double max_abs(const DenseMatrix& m) noexcept {
    double best = 0.0;
    for (double v : m.values()) best = std::max(best, std::abs(v));
    return best;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::DimensionMismatch,
            "max_abs_diff: " + shape(a) + " vs " + shape(b));
    double best = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i)
        best = std::max(best, std::abs(a.values()[i] - b.values()[i]));
    return best;
}

// ---------------------------------------------------------------------------
// Solvers

LuDecomposition::LuDecomposition(DenseMatrix m, double pivot_tolerance) : lu_(std::move(m)) {
    require(lu_.square(), ErrorCode::DimensionMismatch, "LU of non-square " + shape(lu_));
    require(lu_.all_finite(), ErrorCode::NonFinite, "LU input has non-finite entries");
    if (!kernels::lu_factor(lu_, perm_, pivot_tolerance))
        throw Error(ErrorCode::SingularMatrix,
                    "no pivot above relative tolerance in " + shape(lu_) + " system");
}

DenseMatrix LuDecomposition::solve(DenseMatrix rhs) const {
    require(rhs.rows() == order(), ErrorCode::DimensionMismatch,
            "right-hand side " + shape(rhs) + " for order " + std::to_string(order()));
    kernels::lu_solve(lu_, perm_, rhs);
    return rhs;
}

DenseVector LuDecomposition::solve(const DenseVector& rhs) const {
    DenseMatrix b(rhs.size(), 1);
    for (std::size_t i = 0; i < rhs.size(); ++i) b(i, 0) = rhs[i];
    return solve(std::move(b)).col_vector(0);
}

DenseMatrix solve_linear(const DenseMatrix& m, const DenseMatrix& rhs, double pivot_tolerance) {
    return LuDecomposition(m, pivot_tolerance).solve(rhs);
}

DenseMatrix inverse(const DenseMatrix& m, double pivot_tolerance) {
    return LuDecomposition(m, pivot_tolerance).solve(DenseMatrix::identity(m.rows()));
}

DenseMatrix group_inverse_of_operator(const DenseMatrix& w, const DenseVector& pi,
                                      double pivot_tolerance) {
    require(w.square() && w.rows() == pi.size(), ErrorCode::DimensionMismatch,
            "group inverse: operator " + shape(w) + " with vector of size " +
                std::to_string(pi.size()));
    const DenseMatrix e_pi = outer(DenseVector::ones(pi.size()), pi);
    return inverse(w + e_pi, pivot_tolerance) - e_pi;
}

DenseMatrix group_inverse(const DenseMatrix& p, const DenseVector& pi, double pivot_tolerance) {
    require(p.square(), ErrorCode::DimensionMismatch, "group inverse of non-square " + shape(p));
    return group_inverse_of_operator(DenseMatrix::identity(p.rows()) - p, pi, pivot_tolerance);
}

namespace {

// Solves xᵀW = 0, xᵀe = 1 by transposing and overwriting the last equation.
DenseVector left_null_vector_normalized(const DenseMatrix& w, double pivot_tolerance) {
    const std::size_t n = w.rows();
    DenseMatrix sys = w.transpose();
    for (std::size_t j = 0; j < n; ++j) sys(n - 1, j) = 1.0;
    DenseVector rhs(n);
    rhs[n - 1] = 1.0;
    return LuDecomposition(std::move(sys), pivot_tolerance).solve(rhs);
}

}  // namespace

DenseVector stationary_vector(const DenseMatrix& p, double pivot_tolerance) {
    require(p.square() && p.rows() > 0, ErrorCode::DimensionMismatch,
            "stationary vector of " + shape(p));
    return left_null_vector_normalized(DenseMatrix::identity(p.rows()) - p, pivot_tolerance);
}

DenseVector stationary_vector_generator(const DenseMatrix& q, double pivot_tolerance) {
    require(q.square() && q.rows() > 0, ErrorCode::DimensionMismatch,
            "stationary vector of " + shape(q));
    return left_null_vector_normalized(-1.0 * q, pivot_tolerance);
}

}  // namespace pmam
