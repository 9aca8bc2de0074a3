#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mmc {

using Vector = std::vector<double>;

/// Largest dimension accepted by the dense kernels.
inline constexpr std::size_t kMaxDim = 64;

/// Dense row-major matrix. Small dimensions only (see kMaxDim).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> d);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> data() const noexcept { return data_; }

    Matrix transposed() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Vector operator*(const Matrix& a, std::span<const double> x);

double max_abs(const Matrix& a) noexcept;
double trace(const Matrix& a);
double dot(std::span<const double> a, std::span<const double> b);

/// Symmetric matrix. Construction checks symmetry to 1e-12 relative and stores the
/// exactly symmetrized average.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(Matrix m);
    SymMatrix(std::initializer_list<std::initializer_list<double>> rows);

    static SymMatrix identity(std::size_t n) { return SymMatrix(Matrix::identity(n)); }
    static SymMatrix diagonal(std::span<const double> d) { return SymMatrix(Matrix::diagonal(d)); }

    std::size_t dim() const noexcept { return m_.rows(); }
    double operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }
    const Matrix& matrix() const noexcept { return m_; }
    operator const Matrix&() const noexcept { return m_; }

private:
    Matrix m_;
};

struct SymEigen {
    Vector values;   // ascending
    Matrix vectors;  // column j is the eigenvector of values[j]
};

/// Cyclic Jacobi eigendecomposition (sweep tolerance 1e-14 on the off-diagonal norm,
/// at most 30 sweeps).
SymEigen eigen_sym(const SymMatrix& a);

/// Lower-triangular L with L Lᵀ = a. Throws NotPositiveDefinite.
Matrix cholesky(const SymMatrix& a);

/// Unique symmetric PSD square root. Eigenvalues in [-1e-12 λmax, 0] are clamped to zero.
SymMatrix sym_sqrt(const SymMatrix& a);

/// Symmetric inverse square root t with t a t = I. Throws SingularMatrix.
SymMatrix sym_inv_sqrt(const SymMatrix& a);

/// Inverse of an SPD matrix via its Cholesky factor. Throws SingularMatrix.
SymMatrix spd_inverse(const SymMatrix& a);

/// Orthogonal conjugation qᵀ a q.
SymMatrix conjugate(const SymMatrix& a, const Matrix& q);

}  // namespace mmc
