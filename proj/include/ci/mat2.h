#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace ci {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 diag(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }
    static Mat2 rotation(double theta)
    {
        double c = std::cos(theta), s = std::sin(theta);
        return {c, -s, s, c};
    }
    // columns
    static Mat2 from_cols(Vec2 c1, Vec2 c2) { return {c1.x, c2.x, c1.y, c2.y}; }

    Vec2 col1() const { return {a11, a21}; }
    Vec2 col2() const { return {a12, a22}; }
    Vec2 row1() const { return {a11, a12}; }
    Vec2 row2() const { return {a21, a22}; }

    double det() const { return a11 * a22 - a12 * a21; }
    double trace() const { return a11 + a22; }
    Mat2 transpose() const { return {a11, a21, a12, a22}; }
    double frob2() const { return a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22; }
    double frob() const { return std::sqrt(frob2()); }
    Mat2 inverse() const
    {
        double d = det();
        if (d == 0.0) throw std::domain_error("singular 2x2 matrix");
        return {a22 / d, -a12 / d, -a21 / d, a11 / d};
    }
};

inline Mat2 operator+(const Mat2& a, const Mat2& b)
{
    return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
}
inline Mat2 operator-(const Mat2& a, const Mat2& b)
{
    return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
}
inline Mat2 operator*(double s, const Mat2& a) { return {s * a.a11, s * a.a12, s * a.a21, s * a.a22}; }
inline Mat2 operator*(const Mat2& a, double s) { return s * a; }
inline Mat2 operator*(const Mat2& a, const Mat2& b)
{
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}
inline Vec2 operator*(const Mat2& a, Vec2 v) { return {a.a11 * v.x + a.a12 * v.y, a.a21 * v.x + a.a22 * v.y}; }

// a (x) b = a b^T
inline Mat2 outer(Vec2 a, Vec2 b) { return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y}; }

inline double dist(const Mat2& a, const Mat2& b) { return (a - b).frob(); }

// Cauchy-Green tensor F^T F
inline Mat2 cauchy_green(const Mat2& F) { return F.transpose() * F; }

// singular values, largest first
struct SingularValues {
    double s1, s2;
};
inline SingularValues singular_values(const Mat2& m)
{
    double f2 = m.frob2();
    double d = std::abs(m.det());
    double disc = std::sqrt(std::max(0.0, f2 * f2 - 4.0 * d * d));
    double s1 = std::sqrt(0.5 * (f2 + disc));
    double s2 = s1 > 0.0 ? d / s1 : 0.0;
    return {s1, s2};
}

inline bool is_rotation(const Mat2& r, double tol = 1e-10)
{
    return (r.transpose() * r - Mat2::identity()).frob() <= tol && std::abs(r.det() - 1.0) <= tol;
}

enum class ErrorCode {
    invalid_parameter,
    not_attainable,
    degenerate_coordinates,
    invalid_target,
    not_splittable,
    not_classifiable,
    invalid_rank,
    invalid_input,
    wrong_entry_point,
    construction_failure,
    wrong_coverer,
    invalid_box,
    invalid_domain,
    hull_violation,
    out_of_range,
    invalid_pair,
    undefined_dimension,
    config_error,
};

const char* error_name(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode c, const std::string& what) : std::runtime_error(what), code_(c) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// One table for all pinned tolerances.
struct Tolerances {
    double algebraic = 1e-12;
    double pipeline = 1e-9;
    double margin = 1e-8;
    double rotation = 1e-9;
    double rank = 1e-9;
};

Tolerances& tolerances();

}  // namespace ci
