#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "lorentzmorse/jacobi.hpp"
#include "lorentzmorse/path.hpp"

namespace lmc {

// The discrete Hessian is singular at the current mesh: the caller should
// refine and retry.
struct DegenerateHessian : std::runtime_error {
    explicit DegenerateHessian(double eig)
        : std::runtime_error("degenerate discrete Hessian"), eigenvalue(eig) {}
    double eigenvalue;
};

// Relative Morse index at mesh size N: the negative inertia of the discrete
// second variation minus the dimension N of the (negative definite) y-sector.
inline int relative_index_disc(const SplitMetric& m, const GeodesicRecord& rec,
                               int N = 32, double degeneracy_tol = 1e-8) {
    DiscretePath p = path_from_record(m, rec, N);
    p = refine_to_critical(m, p);
    PathChart chart(p);
    Mat H = path_hessian(m, p, chart);
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("relative_index_disc: eigensolve failed");
    const Vec& ev = es.eigenvalues();
    double scale = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    int neg = 0;
    for (int i = 0; i < ev.size(); ++i) {
        if (std::abs(ev(i)) < degeneracy_tol * std::max(scale, 1.0))
            throw DegenerateHessian(ev(i));
        if (ev(i) < 0.0) ++neg;
    }
    return neg - N;
}

// Compute both index routes and cross-check them.  On a degenerate mesh the
// discretization is refined (doubled) up to max_N before giving up.
inline IndexData compute_index(const SplitMetric& m, const GeodesicRecord& rec,
                               int N = 32, int max_N = 256) {
    IndexData out;
    auto rep = conjugate_points(m, rec);
    out.i_con = rep.count;
    out.conjugate_times = rep.times;
    out.nondegenerate = rep.endpoint_nonconjugate;

    bool disc_done = false;
    for (int mesh = N; mesh <= max_N; mesh *= 2) {
        try {
            out.i_disc = relative_index_disc(m, rec, mesh);
            out.mesh_N = mesh;
            disc_done = true;
            break;
        } catch (const DegenerateHessian&) {
            continue;
        }
    }
    out.agreement = disc_done && (out.i_disc == out.i_con);
    out.certified = disc_done && rep.certified && out.nondegenerate &&
                    out.agreement;
    return out;
}

}  // namespace lmc
