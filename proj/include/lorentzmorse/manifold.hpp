#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lmc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ManifoldKind { Circle, FlatTorus2, RoundSphere2 };

inline std::string to_string(ManifoldKind k) {
    switch (k) {
        case ManifoldKind::Circle: return "circle";
        case ManifoldKind::FlatTorus2: return "flat-torus-2";
        case ManifoldKind::RoundSphere2: return "round-sphere-2";
    }
    return "?";
}

inline ManifoldKind manifold_from_string(const std::string& s) {
    if (s == "circle") return ManifoldKind::Circle;
    if (s == "flat-torus-2") return ManifoldKind::FlatTorus2;
    if (s == "round-sphere-2") return ManifoldKind::RoundSphere2;
    throw std::invalid_argument("unknown manifold kind: " + s);
}

// Base manifold model. Circle and torus use universal-cover coordinates
// (period 2*pi per factor, kept unwrapped so winding stays explicit).
// The sphere lives in ambient 3-space as unit vectors.
class Manifold {
public:
    explicit Manifold(ManifoldKind kind) : kind_(kind) {}

    ManifoldKind kind() const { return kind_; }

    // intrinsic dimension
    int dim() const { return kind_ == ManifoldKind::Circle ? 1 : 2; }

    // dimension of the coordinate vector actually stored
    int ambient_dim() const {
        switch (kind_) {
            case ManifoldKind::Circle: return 1;
            case ManifoldKind::FlatTorus2: return 2;
            case ManifoldKind::RoundSphere2: return 3;
        }
        return 0;
    }

    bool is_flat() const { return kind_ != ManifoldKind::RoundSphere2; }

    bool valid_point(const Vec& x, double tol = 1e-9) const {
        if (x.size() != ambient_dim()) return false;
        if (!x.allFinite()) return false;
        if (kind_ == ManifoldKind::RoundSphere2)
            return std::abs(x.norm() - 1.0) <= tol;
        return true;
    }

    Vec project_point(const Vec& x) const {
        if (kind_ == ManifoldKind::RoundSphere2) return x / x.norm();
        return x;
    }

    // projection of an ambient vector onto T_x
    Vec project_tangent(const Vec& x, const Vec& v) const {
        if (kind_ == ManifoldKind::RoundSphere2) return v - (x.dot(v)) * x;
        return v;
    }

    // orthonormal frame of T_x, columns span the tangent space
    Mat tangent_frame(const Vec& x) const {
        if (kind_ != ManifoldKind::RoundSphere2)
            return Mat::Identity(ambient_dim(), dim());
        Vec n = x / x.norm();
        // pick the coordinate axis least aligned with n
        int i = 0;
        n.cwiseAbs().minCoeff(&i);
        Vec e1 = Vec::Zero(3);
        e1(i) = 1.0;
        e1 = (e1 - n.dot(e1) * n).normalized();
        Vec e2(3);
        e2 << n(1) * e1(2) - n(2) * e1(1),
              n(2) * e1(0) - n(0) * e1(2),
              n(0) * e1(1) - n(1) * e1(0);
        Mat F(3, 2);
        F.col(0) = e1;
        F.col(1) = e2;
        return F;
    }

    // parallel transport of v in T_p along the minimizing geodesic to q
    Vec parallel_transport(const Vec& p, const Vec& q, const Vec& v) const {
        if (kind_ != ManifoldKind::RoundSphere2) return v;
        double c = p.dot(q);
        Vec w = q - c * p;
        double s = w.norm();
        if (s < 1e-14) return v - q.dot(v) * q;
        w /= s;
        // rotate in the (p,w) plane by the angle between p and q
        double vp = p.dot(v), vw = w.dot(v);
        Vec out = v - vp * p - vw * w;
        double ang = std::atan2(s, c);
        double ca = std::cos(ang), sa = std::sin(ang);
        out += (vp * ca - vw * sa) * p + (vp * sa + vw * ca) * w;
        return out - q.dot(out) * q;  // clean roundoff
    }

    double dist(const Vec& p, const Vec& q) const {
        if (kind_ != ManifoldKind::RoundSphere2) return (p - q).norm();
        double c = std::clamp(p.dot(q), -1.0, 1.0);
        return std::acos(c);
    }

private:
    ManifoldKind kind_;
};

}  // namespace lmc
