#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <ostream>

namespace cmot {

/// A point in R^d with d in {1,2,3}. Coordinates are compared exactly
/// (bit-for-bit) everywhere: atoms come from scenario files, not from
/// computation, so no epsilon merging is applied.
class Point {
  public:
    Point() : dim_(1) {}
    explicit Point(double x) : dim_(1) { c_[0] = x; }
    Point(double x, double y) : dim_(2) {
        c_[0] = x;
        c_[1] = y;
    }
    Point(double x, double y, double z) : dim_(3) {
        c_[0] = x;
        c_[1] = y;
        c_[2] = z;
    }

    static Point zero(int dim) {
        Point p;
        p.dim_ = dim;
        return p;
    }

    int dim() const { return dim_; }
    double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }

    /// Scalar value of a 1-D point.
    double scalar() const { return c_[0]; }

    double norm() const {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += c_[i] * c_[i];
        return std::sqrt(s);
    }

    friend Point operator-(const Point& a, const Point& b) {
        Point r = a;
        for (int i = 0; i < a.dim_; ++i) r.c_[i] -= b.c_[i];
        return r;
    }
    friend Point operator+(const Point& a, const Point& b) {
        Point r = a;
        for (int i = 0; i < a.dim_; ++i) r.c_[i] += b.c_[i];
        return r;
    }
    friend Point operator*(double s, const Point& a) {
        Point r = a;
        for (int i = 0; i < a.dim_; ++i) r.c_[i] *= s;
        return r;
    }

    friend bool operator==(const Point& a, const Point& b) {
        if (a.dim_ != b.dim_) return false;
        for (int i = 0; i < a.dim_; ++i)
            if (a.c_[i] != b.c_[i]) return false;
        return true;
    }
    friend bool operator!=(const Point& a, const Point& b) { return !(a == b); }

    /// Lexicographic order; used to keep atom lists sorted deterministically.
    friend bool operator<(const Point& a, const Point& b) {
        for (int i = 0; i < a.dim_ && i < b.dim_; ++i) {
            if (a.c_[i] < b.c_[i]) return true;
            if (a.c_[i] > b.c_[i]) return false;
        }
        return a.dim_ < b.dim_;
    }

    friend std::ostream& operator<<(std::ostream& os, const Point& p) {
        if (p.dim_ == 1) return os << p.c_[0];
        os << "(";
        for (int i = 0; i < p.dim_; ++i) os << (i ? "," : "") << p.c_[i];
        return os << ")";
    }

  private:
    std::array<double, 3> c_{0.0, 0.0, 0.0};
    int dim_;
};

inline double distance(const Point& a, const Point& b) { return (a - b).norm(); }

}  // namespace cmot
