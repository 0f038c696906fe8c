#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace spdc {

// Dormand-Prince 5(4) with FSAL and PI-free step control on a complex state
// vector. rhs(x, y) writes dy/dt into y (overwriting).
class Dopri5 {
public:
    using State = std::vector<std::complex<double>>;
    using Rhs = std::function<void(const State&, State&)>;

    Dopri5(std::size_t n, Rhs rhs, double rtol, double atol)
        : rhs_(std::move(rhs)), rtol_(rtol), atol_(atol)
    {
        for (auto& k : k_)
            k.resize(n);
        tmp_.resize(n);
        err_.resize(n);
        first_ = true;
    }

    // Advance y from t to t_end. step_cb, when set, runs after every accepted
    // step with (t_new, y); returning false aborts integration at that point.
    template <class Callback>
    double integrate(State& y, double t, double t_end, Callback&& step_cb)
    {
        if (t_end <= t)
            return t;
        if (first_ || k_[0].size() != y.size()) {
            rhs_(y, k_[0]);
            ++n_rhs_;
        }
        first_ = false;
        if (h_ <= 0.0)
            h_ = initial_step(y, t_end - t);

        int consecutive_rejects = 0;
        while (t < t_end) {
            double h = std::min(h_, t_end - t);
            attempt(y, h);
            double err = error_norm(y);
            if (err <= 1.0) {
                t += h;
                y.swap(tmp_);
                k_[0].swap(k_[6]);  // FSAL
                ++n_steps_;
                consecutive_rejects = 0;
                double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
                h_ = h * std::min(5.0, std::max(0.2, fac));
                if (!step_cb(t, y))
                    return t;
            } else {
                ++n_rejects_;
                if (++consecutive_rejects > 60)
                    throw std::runtime_error("dopri5: step size underflow (tolerance failure)");
                double fac = 0.9 * std::pow(err, -0.2);
                h_ = h * std::min(1.0, std::max(0.1, fac));
                // k_[0] still holds f(y); nothing to restore for the retry
            }
        }
        return t;
    }

    void reset_fsal() { first_ = true; }
    void set_initial_step(double h) { h_ = h; }
    long steps() const { return n_steps_; }
    long rhs_evaluations() const { return n_rhs_; }

private:
    void attempt(const State& y, double h)
    {
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                                a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                                a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                                b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        const std::size_t n = y.size();
        auto stage = [&](std::size_t ks, std::initializer_list<std::pair<double, int>> terms) {
            for (std::size_t i = 0; i < n; ++i) {
                std::complex<double> acc = y[i];
                for (auto [c, j] : terms)
                    acc += h * c * k_[j][i];
                tmp_[i] = acc;
            }
            rhs_(tmp_, k_[ks]);
            ++n_rhs_;
        };

        stage(1, {{a21, 0}});
        stage(2, {{a31, 0}, {a32, 1}});
        stage(3, {{a41, 0}, {a42, 1}, {a43, 2}});
        stage(4, {{a51, 0}, {a52, 1}, {a53, 2}, {a54, 3}});
        stage(5, {{a61, 0}, {a62, 1}, {a63, 2}, {a64, 3}, {a65, 4}});
        // 5th-order solution (also stage 7 position for FSAL)
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = y[i]
                + h * (b1 * k_[0][i] + b3 * k_[2][i] + b4 * k_[3][i] + b5 * k_[4][i]
                       + b6 * k_[5][i]);
        rhs_(tmp_, k_[6]);
        ++n_rhs_;
        for (std::size_t i = 0; i < n; ++i)
            err_[i] = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i]
                           + e6 * k_[5][i] + e7 * k_[6][i]);
    }

    double error_norm(const State& y0) const
    {
        double acc = 0.0;
        const std::size_t n = y0.size();
        for (std::size_t i = 0; i < n; ++i) {
            double sc = atol_ + rtol_ * std::max(std::abs(y0[i]), std::abs(tmp_[i]));
            double e = std::abs(err_[i]) / sc;
            acc += e * e;
        }
        return std::sqrt(acc / double(n));
    }

    double initial_step(const State& y, double span) const
    {
        double dnorm = 0.0, ynorm = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            dnorm = std::max(dnorm, std::abs(k_[0][i]));
            ynorm = std::max(ynorm, std::abs(y[i]));
        }
        double h = dnorm > 0.0 ? 0.01 * std::max(ynorm, 1e-6) / dnorm : span / 100.0;
        return std::min(h, span);
    }

    Rhs rhs_;
    double rtol_, atol_;
    double h_ = 0.0;
    bool first_ = true;
    State k_[7], tmp_, err_;
    long n_steps_ = 0, n_rhs_ = 0, n_rejects_ = 0;
};

}  // namespace spdc
