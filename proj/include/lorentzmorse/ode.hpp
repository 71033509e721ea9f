#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace lmc {

// Adaptive Dormand-Prince 5(4) with 4th-order dense output.
// Non-stiff systems only; step underflow throws.
class Dopri5 {
public:
    using Rhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

    struct Step {
        double t0, t1;
        Eigen::VectorXd y0;
        Eigen::MatrixXd k;  // 7 stage derivatives as columns
    };

    struct Solution {
        std::vector<Step> steps;
        Eigen::VectorXd y_end;
        double t_end;

        Eigen::VectorXd eval(double t) const {
            if (steps.empty()) throw std::runtime_error("empty solution");
            // binary search for the covering step
            size_t lo = 0, hi = steps.size() - 1;
            while (lo < hi) {
                size_t mid = (lo + hi) / 2;
                if (steps[mid].t1 < t)
                    lo = mid + 1;
                else
                    hi = mid;
            }
            const Step& s = steps[lo];
            double h = s.t1 - s.t0;
            double th = std::clamp((t - s.t0) / h, 0.0, 1.0);
            Eigen::VectorXd out = s.y0;
            for (int i = 0; i < 7; ++i)
                out += h * dense_weight(i, th) * s.k.col(i);
            return out;
        }
    };

    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 1e-3;
    double h_min = 1e-14;
    size_t max_steps = 2000000;

    Solution integrate(const Rhs& f, double t0, double t1,
                       Eigen::VectorXd y0,
                       const std::function<void(Eigen::VectorXd&)>& project =
                           nullptr) const {
        Solution sol;
        double t = t0;
        double h = std::min(h_init, t1 - t0);
        Eigen::VectorXd y = std::move(y0);
        Eigen::VectorXd k1 = f(t, y);
        size_t nsteps = 0;
        while (t < t1) {
            if (++nsteps > max_steps)
                throw std::runtime_error("dopri5: step budget exceeded");
            if (h < h_min)
                throw std::runtime_error("dopri5: step size underflow");
            if (t + h > t1) h = t1 - t;

            Eigen::MatrixXd k(y.size(), 7);
            k.col(0) = k1;
            Eigen::VectorXd yt;
            for (int i = 1; i < 7; ++i) {
                yt = y;
                for (int j = 0; j < i; ++j) yt += h * A[i][j] * k.col(j);
                k.col(i) = f(t + C[i] * h, yt);
            }
            // 5th order solution is the last stage argument (FSAL)
            Eigen::VectorXd y5 = y;
            for (int j = 0; j < 7; ++j) y5 += h * B5[j] * k.col(j);
            Eigen::VectorXd err = Eigen::VectorXd::Zero(y.size());
            for (int j = 0; j < 7; ++j) err += h * (B5[j] - B4[j]) * k.col(j);

            double sc = 0.0;
            for (int i = 0; i < y.size(); ++i) {
                double s = atol + rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
                sc = std::max(sc, std::abs(err(i)) / s);
            }
            if (sc <= 1.0) {
                sol.steps.push_back({t, t + h, y, k});
                t += h;
                y = y5;
                if (project) project(y);
                k1 = f(t, y);  // recompute; projection breaks FSAL anyway
            }
            double fac = 0.9 * std::pow(std::max(sc, 1e-10), -0.2);
            h *= std::clamp(fac, 0.2, 5.0);
        }
        sol.y_end = y;
        sol.t_end = t;
        return sol;
    }

private:
    static constexpr double C[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5,
                                    8.0 / 9, 1.0, 1.0};
    static constexpr double A[7][6] = {
        {0, 0, 0, 0, 0, 0},
        {1.0 / 5, 0, 0, 0, 0, 0},
        {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
        {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
         -5103.0 / 18656, 0},
        {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784,
         11.0 / 84}};
    static constexpr double B5[7] = {35.0 / 384,    0.0,        500.0 / 1113,
                                     125.0 / 192,   -2187.0 / 6784,
                                     11.0 / 84,     0.0};
    static constexpr double B4[7] = {5179.0 / 57600,  0.0,
                                     7571.0 / 16695,  393.0 / 640,
                                     -92097.0 / 339200, 187.0 / 2100,
                                     1.0 / 40};

    // Dense output via cubic Hermite on (y0, k1, y1, k7); 4th order accurate
    // on each accepted step, which is enough at the tolerances used here.
    static double dense_weight(int i, double th) {
        double h00 = 2 * th * th * th - 3 * th * th + 1;
        double h10 = th * th * th - 2 * th * th + th;
        double h01 = -2 * th * th * th + 3 * th * th;
        double h11 = th * th * th - th * th;
        // y(th) = h00*y0 + h10*h*k1 + h01*y1 + h11*h*k7
        //       = y0 + h*sum_i w_i k_i  with  y1 = y0 + h*sum B5_j k_j
        double w = h01 * B5[i];
        if (i == 0) w += h10;
        if (i == 6) w += h11;
        return w;
    }
};

}  // namespace lmc
