#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "tailforce/error.hpp"

namespace tailforce {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Dense row-major array indexed by (time sample, arc sample).
template <class T>
class Field {
 public:
  Field() = default;
  Field(std::size_t n_t, std::size_t n_s, T fill = T{})
      : n_t_(n_t), n_s_(n_s), data_(n_t * n_s, fill) {}

  std::size_t n_t() const { return n_t_; }
  std::size_t n_s() const { return n_s_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * n_s_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const {
    return data_[i * n_s_ + j];
  }

  std::span<T> row(std::size_t i) { return {data_.data() + i * n_s_, n_s_}; }
  std::span<const T> row(std::size_t i) const {
    return {data_.data() + i * n_s_, n_s_};
  }

  std::span<const T> values() const { return data_; }

  bool same_shape(std::size_t n_t, std::size_t n_s) const {
    return n_t_ == n_t && n_s_ == n_s;
  }
  template <class U>
  bool same_shape(const Field<U>& other) const {
    return same_shape(other.n_t(), other.n_s());
  }

 private:
  std::size_t n_t_ = 0;
  std::size_t n_s_ = 0;
  std::vector<T> data_;
};

using ScalarField = Field<double>;
using VectorField = Field<Vec2>;

namespace fd {

// Second-order derivative stencils on a uniform grid with spacing h.
// Centered in the interior, one-sided (-3, 4, -1)/2h at the ends.
// get(k) returns the k-th sample.
template <class Get>
double derivative_at(Get&& get, std::size_t n, std::size_t k, double h) {
  if (n < 3) throw Error("finite difference needs at least 3 samples");
  // (-3, 4, -1) written in differences so constant data gives exactly 0.
  if (k == 0) return (3.0 * (get(1) - get(0)) - (get(2) - get(1))) / (2.0 * h);
  if (k == n - 1)
    return (3.0 * (get(n - 1) - get(n - 2)) - (get(n - 2) - get(n - 3))) / (2.0 * h);
  return (get(k + 1) - get(k - 1)) / (2.0 * h);
}

// Second derivative: centered in the interior, one-sided (2, -5, 4, -1)/h^2
// at the ends. Three samples only admit the first-order 3-point stencil.
template <class Get>
double second_derivative_at(Get&& get, std::size_t n, std::size_t k, double h) {
  if (n < 3) throw Error("finite difference needs at least 3 samples");
  const double h2 = h * h;
  auto d = [&](std::size_t a, std::size_t b) { return get(a) - get(b); };
  if (n == 3) return (d(2, 1) - d(1, 0)) / h2;
  if (k == 0) return (2.0 * d(0, 1) - 3.0 * d(1, 2) + d(2, 3)) / h2;
  if (k == n - 1)
    return (2.0 * d(n - 1, n - 2) - 3.0 * d(n - 2, n - 3) + d(n - 3, n - 4)) / h2;
  return (d(k + 1, k) - d(k, k - 1)) / h2;
}

/// d/ds of a scalar field (along the arc axis).
inline ScalarField along_s(const ScalarField& f, double ds) {
  ScalarField out(f.n_t(), f.n_s());
  for (std::size_t i = 0; i < f.n_t(); ++i)
    for (std::size_t j = 0; j < f.n_s(); ++j)
      out(i, j) = derivative_at([&](std::size_t k) { return f(i, k); }, f.n_s(),
                                j, ds);
  return out;
}

/// d/dt of a scalar field (along the time axis).
inline ScalarField along_t(const ScalarField& f, double dt) {
  ScalarField out(f.n_t(), f.n_s());
  for (std::size_t i = 0; i < f.n_t(); ++i)
    for (std::size_t j = 0; j < f.n_s(); ++j)
      out(i, j) = derivative_at([&](std::size_t k) { return f(k, j); }, f.n_t(),
                                i, dt);
  return out;
}

inline ScalarField second_along_s(const ScalarField& f, double ds) {
  ScalarField out(f.n_t(), f.n_s());
  for (std::size_t i = 0; i < f.n_t(); ++i)
    for (std::size_t j = 0; j < f.n_s(); ++j)
      out(i, j) = second_derivative_at([&](std::size_t k) { return f(i, k); },
                                       f.n_s(), j, ds);
  return out;
}

inline ScalarField second_along_t(const ScalarField& f, double dt) {
  ScalarField out(f.n_t(), f.n_s());
  for (std::size_t i = 0; i < f.n_t(); ++i)
    for (std::size_t j = 0; j < f.n_s(); ++j)
      out(i, j) = second_derivative_at([&](std::size_t k) { return f(k, j); },
                                       f.n_t(), i, dt);
  return out;
}

}  // namespace fd

}  // namespace tailforce
