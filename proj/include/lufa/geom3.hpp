#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace lufa {

struct Vec3 {
  double x{}, y{}, z{};

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
inline Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
inline Vec3 operator*(const Vec3& v, double s) { return s * v; }
inline Vec3 operator/(const Vec3& v, double s) { return {v.x / s, v.y / s, v.z / s}; }
inline Vec3& operator+=(Vec3& a, const Vec3& b) { a = a + b; return a; }
inline Vec3& operator-=(Vec3& a, const Vec3& b) { a = a - b; return a; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

// Unit vector; zero input stays zero.
inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  return n > 0.0 ? v / n : Vec3{};
}

// General 3x3, row-major. Used for Jacobians and transport matrices.
struct Mat3 {
  std::array<double, 9> a{};

  double& operator()(int r, int c) { return a[3 * r + c]; }
  double operator()(int r, int c) const { return a[3 * r + c]; }

  static Mat3 identity() {
    Mat3 m;
    m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
    return m;
  }

  Mat3 transposed() const {
    Mat3 t;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) t(r, c) = (*this)(c, r);
    return t;
  }

  double trace() const { return a[0] + a[4] + a[8]; }

  double frobenius() const {
    double s = 0.0;
    for (double e : a) s += e * e;
    return std::sqrt(s);
  }
};

inline Mat3 operator+(const Mat3& a, const Mat3& b) {
  Mat3 c;
  for (int i = 0; i < 9; ++i) c.a[i] = a.a[i] + b.a[i];
  return c;
}
inline Mat3 operator-(const Mat3& a, const Mat3& b) {
  Mat3 c;
  for (int i = 0; i < 9; ++i) c.a[i] = a.a[i] - b.a[i];
  return c;
}
inline Mat3 operator*(double s, const Mat3& m) {
  Mat3 c;
  for (int i = 0; i < 9; ++i) c.a[i] = s * m.a[i];
  return c;
}
inline Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 c;
  for (int r = 0; r < 3; ++r)
    for (int col = 0; col < 3; ++col) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a(r, k) * b(k, col);
      c(r, col) = s;
    }
  return c;
}
inline Vec3 operator*(const Mat3& m, const Vec3& v) {
  return {m(0, 0) * v.x + m(0, 1) * v.y + m(0, 2) * v.z,
          m(1, 0) * v.x + m(1, 1) * v.y + m(1, 2) * v.z,
          m(2, 0) * v.x + m(2, 1) * v.y + m(2, 2) * v.z};
}

// u v^T
inline Mat3 outer(const Vec3& u, const Vec3& v) {
  Mat3 m;
  m(0, 0) = u.x * v.x; m(0, 1) = u.x * v.y; m(0, 2) = u.x * v.z;
  m(1, 0) = u.y * v.x; m(1, 1) = u.y * v.y; m(1, 2) = u.y * v.z;
  m(2, 0) = u.z * v.x; m(2, 1) = u.z * v.y; m(2, 2) = u.z * v.z;
  return m;
}

// Symmetric 3x3, six stored entries; symmetry holds by construction.
struct SymMat3 {
  double xx{}, xy{}, xz{}, yy{}, yz{}, zz{};

  static SymMat3 identity() { return {1.0, 0.0, 0.0, 1.0, 0.0, 1.0}; }

  static SymMat3 scaled_identity(double s) { return {s, 0.0, 0.0, s, 0.0, s}; }

  // Symmetrizes: (m + m^T)/2.
  static SymMat3 from_mat(const Mat3& m) {
    return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), 0.5 * (m(0, 2) + m(2, 0)),
            m(1, 1), 0.5 * (m(1, 2) + m(2, 1)), m(2, 2)};
  }

  Mat3 to_mat() const {
    Mat3 m;
    m(0, 0) = xx; m(0, 1) = xy; m(0, 2) = xz;
    m(1, 0) = xy; m(1, 1) = yy; m(1, 2) = yz;
    m(2, 0) = xz; m(2, 1) = yz; m(2, 2) = zz;
    return m;
  }

  double operator()(int r, int c) const {
    static constexpr int idx[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    const double* e = &xx;
    return e[idx[r][c]];
  }

  double trace() const { return xx + yy + zz; }

  double frobenius() const {
    return std::sqrt(xx * xx + yy * yy + zz * zz + 2.0 * (xy * xy + xz * xz + yz * yz));
  }

  Vec3 mul(const Vec3& v) const {
    return {xx * v.x + xy * v.y + xz * v.z,
            xy * v.x + yy * v.y + yz * v.z,
            xz * v.x + yz * v.y + zz * v.z};
  }

  // v^T A v
  double quad(const Vec3& v) const { return dot(v, mul(v)); }
};

inline SymMat3 operator+(const SymMat3& a, const SymMat3& b) {
  return {a.xx + b.xx, a.xy + b.xy, a.xz + b.xz, a.yy + b.yy, a.yz + b.yz, a.zz + b.zz};
}
inline SymMat3 operator-(const SymMat3& a, const SymMat3& b) {
  return {a.xx - b.xx, a.xy - b.xy, a.xz - b.xz, a.yy - b.yy, a.yz - b.yz, a.zz - b.zz};
}
inline SymMat3 operator*(double s, const SymMat3& m) {
  return {s * m.xx, s * m.xy, s * m.xz, s * m.yy, s * m.yz, s * m.zz};
}
inline SymMat3& operator+=(SymMat3& a, const SymMat3& b) { a = a + b; return a; }

// u u^T, symmetric PSD rank-1.
inline SymMat3 self_outer(const Vec3& u) {
  return {u.x * u.x, u.x * u.y, u.x * u.z, u.y * u.y, u.y * u.z, u.z * u.z};
}

// Eigenvalues ascending, eigenvectors orthonormal. Fresh decompositions fix
// each vector's sign so its largest-magnitude component is positive.
struct EigenBasis {
  std::array<double, 3> lambda{};
  std::array<Vec3, 3> v{};

  double trace() const { return lambda[0] + lambda[1] + lambda[2]; }
};

// Cyclic-Jacobi eigendecomposition. Deterministic: identical input bits give
// identical output bits.
EigenBasis eig_sym3(const SymMat3& a);

// Flips eigenvector signs so that dot(v_j, reference.v_j) >= 0 for all j.
// Eigenvalues are untouched. Idempotent.
EigenBasis align_sign(const EigenBasis& basis, const EigenBasis& reference);

}  // namespace lufa
