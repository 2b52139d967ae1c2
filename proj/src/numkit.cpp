#include "salstm/numkit.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace salstm {

void fatal(const std::string& msg) { throw std::runtime_error(msg); }

Vec64 matvec(const Mat64& m, const Vec64& v) {
  if (m.cols != static_cast<int>(v.size()))
    fatal("matvec: " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
          " applied to vector of length " + std::to_string(v.size()));
  Vec64 out(m.rows);
  for (int r = 0; r < m.rows; ++r) {
    const double* row = m.row(r);
    double s = 0.0;
    for (int c = 0; c < m.cols; ++c) s += row[c] * v[c];
    out[r] = s;
  }
  return out;
}

Vec64 matvec_t(const Mat64& m, const Vec64& v) {
  if (m.rows != static_cast<int>(v.size()))
    fatal("matvec_t: " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
          " transposed against vector of length " + std::to_string(v.size()));
  Vec64 out(m.cols, 0.0);
  for (int r = 0; r < m.rows; ++r) {
    const double* row = m.row(r);
    const double vr = v[r];
    for (int c = 0; c < m.cols; ++c) out[c] += row[c] * vr;
  }
  return out;
}

void add_outer(Mat64& acc, const Vec64& u, const Vec64& v) {
  if (acc.rows != static_cast<int>(u.size()) || acc.cols != static_cast<int>(v.size()))
    fatal("add_outer: shape mismatch");
  for (int r = 0; r < acc.rows; ++r) {
    double* row = acc.row(r);
    const double ur = u[r];
    for (int c = 0; c < acc.cols; ++c) row[c] += ur * v[c];
  }
}

void axpy(double a, const Vec64& x, Vec64& y) {
  if (x.size() != y.size()) fatal("axpy: length mismatch");
  for (size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

double dot(const Vec64& x, const Vec64& y) {
  if (x.size() != y.size()) fatal("dot: length mismatch");
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

Vec64 tanh_vec(const Vec64& v) {
  Vec64 out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
  return out;
}

Vec64 sigmoid_vec(const Vec64& v) {
  Vec64 out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    const double x = v[i];
    if (x >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-x));
    } else {
      const double e = std::exp(x);
      out[i] = e / (1.0 + e);
    }
  }
  return out;
}

double logsumexp(const double* v, int n) {
  if (n <= 0) fatal("logsumexp: empty input");
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    if (v[i] > m) m = v[i];
  if (m == -std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

double logsumexp(const Vec64& v) { return logsumexp(v.data(), static_cast<int>(v.size())); }

}  // namespace salstm
