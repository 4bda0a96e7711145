#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

namespace dcopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

// Symmetric linear operator on R^dim. apply() must be deterministic: the
// same input always yields the same output bits, so solver traces are
// reproducible.
class SymOperator {
 public:
  virtual ~SymOperator() = default;

  virtual Index dim() const = 0;
  virtual void apply(const Vector& v, Vector& out) const = 0;

  Vector apply(const Vector& v) const {
    Vector out(dim());
    apply(v, out);
    return out;
  }

  // <v, Sv>
  double quad(const Vector& v) const { return v.dot(apply(v)); }

  virtual bool has_diagonal() const { return false; }
  virtual Vector diagonal() const {
    throw std::logic_error("operator does not expose a diagonal");
  }

  // Dense materialization; used by exact solves and tests only.
  virtual Matrix to_dense() const;
};

class DenseOperator final : public SymOperator {
 public:
  using SymOperator::apply;
  explicit DenseOperator(Matrix m);
  Index dim() const override { return m_.rows(); }
  void apply(const Vector& v, Vector& out) const override;
  bool has_diagonal() const override { return true; }
  Vector diagonal() const override { return m_.diagonal(); }
  Matrix to_dense() const override { return m_; }

 private:
  Matrix m_;
};

class SparseOperator final : public SymOperator {
 public:
  using SymOperator::apply;
  explicit SparseOperator(SparseMatrix m);
  Index dim() const override { return m_.rows(); }
  void apply(const Vector& v, Vector& out) const override;
  bool has_diagonal() const override { return true; }
  Vector diagonal() const override { return m_.diagonal(); }
  Matrix to_dense() const override { return Matrix(m_); }
  const SparseMatrix& matrix() const { return m_; }

 private:
  SparseMatrix m_;
};

class DiagonalOperator final : public SymOperator {
 public:
  using SymOperator::apply;
  explicit DiagonalOperator(Vector d) : d_(std::move(d)) {}
  Index dim() const override { return d_.size(); }
  void apply(const Vector& v, Vector& out) const override;
  bool has_diagonal() const override { return true; }
  Vector diagonal() const override { return d_; }
  Matrix to_dense() const override { return d_.asDiagonal(); }

 private:
  Vector d_;
};

class ScaledIdentityOperator final : public SymOperator {
 public:
  using SymOperator::apply;
  ScaledIdentityOperator(double scale, Index dim) : scale_(scale), dim_(dim) {}
  Index dim() const override { return dim_; }
  void apply(const Vector& v, Vector& out) const override { out = scale_ * v; }
  bool has_diagonal() const override { return true; }
  Vector diagonal() const override { return Vector::Constant(dim_, scale_); }
  double scale() const { return scale_; }

 private:
  double scale_;
  Index dim_;
};

// A^T A for a rectangular dense A, applied as A^T (A v); A is never squared.
class GramOperator final : public SymOperator {
 public:
  using SymOperator::apply;
  explicit GramOperator(std::shared_ptr<const Matrix> a);
  Index dim() const override { return a_->cols(); }
  void apply(const Vector& v, Vector& out) const override;
  const Matrix& design() const { return *a_; }

 private:
  std::shared_ptr<const Matrix> a_;
};

// scale * I - S (the spectral-gap preconditioner shape)
class GapOperator final : public SymOperator {
 public:
  using SymOperator::apply;
  GapOperator(double scale, std::shared_ptr<const SymOperator> s)
      : scale_(scale), s_(std::move(s)) {}
  Index dim() const override { return s_->dim(); }
  void apply(const Vector& v, Vector& out) const override {
    s_->apply(v, out);
    out = scale_ * v - out;
  }
  double scale() const { return scale_; }

 private:
  double scale_;
  std::shared_ptr<const SymOperator> s_;
};

// Sum of operators, applied term by term in a fixed order.
class SumOperator final : public SymOperator {
 public:
  using SymOperator::apply;
  explicit SumOperator(std::vector<std::shared_ptr<const SymOperator>> terms);
  Index dim() const override { return terms_.front()->dim(); }
  void apply(const Vector& v, Vector& out) const override;
  bool has_diagonal() const override;
  Vector diagonal() const override;

 private:
  std::vector<std::shared_ptr<const SymOperator>> terms_;
};

// Largest-eigenvalue estimate by power iteration (Rayleigh quotient, so the
// estimate never exceeds the true value). Deterministic given the seed.
double estimate_largest_eigenvalue(const SymOperator& s, int max_iters = 100,
                                   double rel_tol = 1e-10,
                                   std::uint64_t seed = 0x9E3779B97F4A7C15ull);

// Max relative violation of <Su,v> = <u,Sv> over random probe pairs.
double symmetry_defect(const SymOperator& s, int probes, std::uint64_t seed);

// True when every row satisfies |a_ii| > sum_{j != i} |a_ij|.
bool strictly_diagonally_dominant(const SymOperator& s);

}  // namespace dcopt
