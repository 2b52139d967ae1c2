#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace salstm {

using Vec64 = std::vector<double>;

// Dense row-major matrix of 64-bit reals.
struct Mat64 {
  int rows = 0;
  int cols = 0;
  Vec64 a;

  Mat64() = default;
  Mat64(int r, int c, double fill = 0.0)
      : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

  double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
  double* row(int r) { return a.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const { return a.data() + static_cast<size_t>(r) * cols; }
  size_t size() const { return a.size(); }
};

// Per-token tag score matrix, row t = o_t.
using Emissions = Mat64;

[[noreturn]] void fatal(const std::string& msg);

Vec64 matvec(const Mat64& m, const Vec64& v);
// m^T v, used on the reverse pass
Vec64 matvec_t(const Mat64& m, const Vec64& v);
// acc += u v^T
void add_outer(Mat64& acc, const Vec64& u, const Vec64& v);
// y += a x
void axpy(double a, const Vec64& x, Vec64& y);
double dot(const Vec64& x, const Vec64& y);

Vec64 tanh_vec(const Vec64& v);
Vec64 sigmoid_vec(const Vec64& v);

// -inf entries act as masked states and are absorbed; all -inf gives -inf.
double logsumexp(const double* v, int n);
double logsumexp(const Vec64& v);

}  // namespace salstm
