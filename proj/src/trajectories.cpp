#include "spdc/trajectories.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include "spdc/ode.hpp"
#include "spdc/simd.hpp"

namespace spdc {

const char* channel_name(JumpChannel ch)
{
    switch (ch) {
        case JumpChannel::SignalExternal: return "signal-external";
        case JumpChannel::SignalInternal: return "signal-internal";
        case JumpChannel::IdlerExternal: return "idler-external";
        case JumpChannel::IdlerInternal: return "idler-internal";
    }
    return "?";
}

double escape_efficiency(double kappa_ex, double kappa_in)
{
    if (kappa_ex < 0.0 || kappa_in < 0.0 || kappa_ex + kappa_in <= 0.0)
        throw std::invalid_argument("escape_efficiency: need kappa_ex + kappa_in > 0");
    return kappa_ex / (kappa_ex + kappa_in);
}

namespace {

using State = std::vector<cplx>;

std::uint64_t splitmix64(std::uint64_t& x)
{
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stream seed for trajectory i; a function of (seed, i) only, so the result
// never depends on which thread ran the trajectory.
std::uint64_t stream_seed(std::uint64_t seed, int traj)
{
    std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (std::uint64_t(traj) + 1));
    splitmix64(x);
    return splitmix64(x);
}

double uniform01(std::mt19937_64& eng)
{
    return double(eng() >> 11) * 0x1.0p-53;
}

struct Tables {
    TwoModeSpace space;
    std::vector<double> ns, ni;   // photon numbers per basis index
    std::vector<double> energy;   // diagonal Hamiltonian
    std::vector<double> damp;     // kappa_s n_s + kappa_i n_i
    std::vector<double> pair_down, pair_up;

    Tables(const TwoModeSpace& sp, const SystemParams& p) : space(sp)
    {
        const int d = sp.dim;
        ns.resize(d); ni.resize(d); energy.resize(d); damp.resize(d);
        pair_down.resize(d); pair_up.resize(d);
        for (int r = 0; r < d; ++r) {
            auto [s, i] = sp.levels(r);
            ns[r] = s;
            ni[r] = i;
            energy[r] = (p.delta - p.eta) * s + p.eta * double(s) * s;
            damp[r] = p.kappa_s * s + p.kappa_i * i;
            pair_down[r] = std::sqrt(double(s) * i);
            pair_up[r] = (s < sp.n_max_s && i < sp.n_max_i)
                             ? std::sqrt(double(s + 1) * (i + 1)) : 0.0;
        }
    }

    // dpsi/dt = -i H psi - (kappa_s n_s + kappa_i n_i) psi
    void rhs(double pump, const State& x, State& y) const
    {
        const int d = space.dim;
        const int shift = space.stride + 1;
        y.assign(d, cplx(0.0));
        const auto& K = simd::active_kernels();
        K.caxpy_w(cplx(0.0, -1.0), energy.data(), x.data(), y.data(), d);
        K.caxpy_w(-1.0, damp.data(), x.data(), y.data(), d);
        if (pump != 0.0) {
            const cplx mip(0.0, -pump);
            K.caxpy_w(mip, pair_down.data() + shift, x.data(), y.data() + shift, d - shift);
            K.caxpy_w(mip, pair_up.data(), x.data() + shift, y.data(), d - shift);
        }
    }
};

struct ChannelRates {
    double rate[4];  // indexed by JumpChannel
};

JumpChannel pick_channel(const Tables& tb, const ChannelRates& cr, const State& psi,
                         std::mt19937_64& eng)
{
    const auto& K = simd::active_kernels();
    double nsw = K.wnorm2(tb.ns.data(), psi.data(), psi.size());
    double niw = K.wnorm2(tb.ni.data(), psi.data(), psi.size());
    double w[4] = {2.0 * cr.rate[0] * nsw, 2.0 * cr.rate[1] * nsw,
                   2.0 * cr.rate[2] * niw, 2.0 * cr.rate[3] * niw};
    double tot = w[0] + w[1] + w[2] + w[3];
    if (tot <= 0.0)
        throw std::logic_error("mcsolve: jump fired with zero total jump rate");
    double u = uniform01(eng) * tot;
    int k = 0;
    for (; k < 3; ++k) {
        if (u < w[k])
            break;
        u -= w[k];
    }
    return JumpChannel(k);
}

void apply_jump(const Tables& tb, JumpChannel ch, State& psi)
{
    const TwoModeSpace& sp = tb.space;
    const int d = sp.dim;
    State out(d, cplx(0.0));
    bool signal = ch == JumpChannel::SignalExternal || ch == JumpChannel::SignalInternal;
    for (int r = 0; r < d; ++r) {
        auto [ns, ni] = sp.levels(r);
        if (signal && ns < sp.n_max_s)
            out[r] = std::sqrt(double(ns + 1)) * psi[std::size_t(sp.index(ns + 1, ni))];
        else if (!signal && ni < sp.n_max_i)
            out[r] = std::sqrt(double(ni + 1)) * psi[std::size_t(sp.index(ns, ni + 1))];
    }
    double n2 = simd::active_kernels().norm2(out.data(), out.size());
    if (n2 <= 0.0)
        throw std::logic_error("mcsolve: annihilated state has zero norm");
    simd::active_kernels().cscale(1.0 / std::sqrt(n2), out.data(), out.size());
    psi = std::move(out);
}

using Sampler = std::function<void(std::size_t, double, double)>;

void sample_state(const Tables& tb, const State& psi, std::size_t idx, const Sampler& sampler)
{
    const auto& K = simd::active_kernels();
    double n2 = K.norm2(psi.data(), psi.size());
    double s = K.wnorm2(tb.ns.data(), psi.data(), psi.size());
    double i = K.wnorm2(tb.ni.data(), psi.data(), psi.size());
    sampler(idx, s / n2, i / n2);
}

// Pump stage: integrate numerically over [t, t_stop], firing a jump whenever
// the squared norm crosses the pre-drawn threshold; the crossing time is
// refined by bisection before the jump is applied.
void pump_phase(const Tables& tb, const ChannelRates& cr, double pump, double rtol, double atol,
                State& psi, double& t, double t_stop, double& threshold, double& seg_ref_norm2,
                std::mt19937_64& eng, TrajectoryRecord& rec)
{
    const auto& K = simd::active_kernels();
    auto rhs = [&tb, pump](const State& x, State& y) { tb.rhs(pump, x, y); };

    while (t < t_stop - 1e-15) {
        Dopri5 st(psi.size(), rhs, rtol, atol);
        double prev_t = t;
        State prev_y = psi;
        bool crossed = false;
        double t_hi = t_stop;
        t = st.integrate(psi, t, t_stop, [&](double tn, const State& y) {
            double n2 = K.norm2(y.data(), y.size());
            if (n2 > seg_ref_norm2 * (1.0 + 1e-9))
                throw std::runtime_error("mcsolve: norm increased between jumps");
            if (n2 < threshold) {
                crossed = true;
                t_hi = tn;
                return false;
            }
            prev_t = tn;
            prev_y = y;
            return true;
        });
        if (!crossed) {
            t = t_stop;
            return;
        }
        double lo = prev_t, hi = t_hi;
        State ylo = std::move(prev_y);
        for (int it = 0; it < 80 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
            double tm = 0.5 * (lo + hi);
            State ym = ylo;
            Dopri5 sub(ym.size(), rhs, rtol, atol);
            sub.integrate(ym, lo, tm, [](double, const State&) { return true; });
            double n2 = K.norm2(ym.data(), ym.size());
            bool done = std::abs(n2 - threshold) <= 1e-10 * threshold;
            if (n2 >= threshold) {
                lo = tm;
                ylo = std::move(ym);
            } else {
                hi = tm;
            }
            if (done)
                break;
        }
        psi = std::move(ylo);
        t = lo;
        JumpChannel ch = pick_channel(tb, cr, psi, eng);
        apply_jump(tb, ch, psi);
        rec.jumps.emplace_back(t, ch);
        threshold = uniform01(eng);
        seg_ref_norm2 = 1.0;
    }
}

// Pump off: the non-Hermitian generator is diagonal, so no-jump segments are
// elementwise exponentials and the next crossing solves
// sum_n |psi_n|^2 exp(-2 Gamma_n dt) = threshold exactly.
void advance_diagonal(const Tables& tb, bool keep_kerr, State& psi, double dt)
{
    for (std::size_t r = 0; r < psi.size(); ++r) {
        double ph = keep_kerr ? -tb.energy[r] * dt : 0.0;
        psi[r] *= std::polar(std::exp(-tb.damp[r] * dt), ph);
    }
}

double solve_crossing(const Tables& tb, const State& psi, double threshold)
{
    double stay = 0.0;   // weight in undamped components
    double w_tot = 0.0;
    std::vector<double> w(psi.size());
    for (std::size_t r = 0; r < psi.size(); ++r) {
        w[r] = std::norm(psi[r]);
        w_tot += w[r];
        if (tb.damp[r] == 0.0)
            stay += w[r];
    }
    if (threshold >= w_tot)
        return 0.0;
    if (threshold <= stay)
        return std::numeric_limits<double>::infinity();

    auto f = [&](double dt) {
        double acc = 0.0;
        for (std::size_t r = 0; r < psi.size(); ++r)
            acc += w[r] * std::exp(-2.0 * tb.damp[r] * dt);
        return acc;
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && f(hi) > threshold; ++it)
        hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double v = f(mid);
        if (std::abs(v - threshold) <= 1e-12 * threshold || hi - lo < 1e-14 * std::max(1.0, hi))
            return mid;
        if (v > threshold)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct TrajectoryContext {
    const Tables* tables;
    ChannelRates rates;
    double pump = 0.0;
    double tau_p = 0.0;
    double window = 6.0;
    double rtol = 1e-6, atol = 1e-12;
    bool keep_kerr = true;
    const State* psi0 = nullptr;
    std::vector<double> sample_times;  // sorted
};

TrajectoryRecord run_trajectory(const TrajectoryContext& cx, int traj, std::uint64_t seed,
                                const Sampler& sampler)
{
    const Tables& tb = *cx.tables;
    const auto& K = simd::active_kernels();
    std::mt19937_64 eng(stream_seed(seed, traj));

    State psi = *cx.psi0;
    double n2 = K.norm2(psi.data(), psi.size());
    K.cscale(1.0 / std::sqrt(n2), psi.data(), psi.size());

    TrajectoryRecord rec;
    double t = 0.0;
    double threshold = uniform01(eng);
    double seg_ref = 1.0;
    std::size_t next_sample = 0;

    auto emit_samples_reached = [&](double tcur) {
        while (sampler && next_sample < cx.sample_times.size()
               && cx.sample_times[next_sample] <= tcur + 1e-15) {
            sample_state(tb, psi, next_sample, sampler);
            ++next_sample;
        }
    };

    emit_samples_reached(0.0);

    if (cx.tau_p > 0.0 && cx.pump != 0.0) {
        while (t < cx.tau_p - 1e-15) {
            double stop = cx.tau_p;
            if (sampler && next_sample < cx.sample_times.size())
                stop = std::min(stop, std::max(cx.sample_times[next_sample], t + 1e-15));
            pump_phase(tb, cx.rates, cx.pump, cx.rtol, cx.atol, psi, t, stop, threshold,
                       seg_ref, eng, rec);
            emit_samples_reached(t);
        }
    }
    // With the pump off (or absent) the generator is diagonal from here on.

    while (t < cx.window - 1e-15) {
        double dt_jump = solve_crossing(tb, psi, threshold);
        double t_jump = t + dt_jump;
        double t_seg_end = std::min(t_jump, cx.window);

        while (sampler && next_sample < cx.sample_times.size()
               && cx.sample_times[next_sample] <= t_seg_end + 1e-15) {
            double ts = cx.sample_times[next_sample];
            advance_diagonal(tb, cx.keep_kerr, psi, ts - t);
            t = ts;
            sample_state(tb, psi, next_sample, sampler);
            ++next_sample;
        }
        if (t_jump > cx.window) {
            advance_diagonal(tb, cx.keep_kerr, psi, cx.window - t);
            t = cx.window;
            break;
        }
        advance_diagonal(tb, cx.keep_kerr, psi, t_jump - t);
        t = t_jump;
        JumpChannel ch = pick_channel(tb, cx.rates, psi, eng);
        apply_jump(tb, ch, psi);
        rec.jumps.emplace_back(t, ch);
        threshold = uniform01(eng);
        seg_ref = 1.0;
    }

    emit_samples_reached(cx.window + 1.0);
    rec.final_state_norm = std::sqrt(K.norm2(psi.data(), psi.size()));
    return rec;
}

void validate_losses(const SystemParams& params, const LossSplit& sig, const LossSplit& idl)
{
    auto check = [](double ex, double in, double total, const char* which) {
        if (ex < 0.0 || in < 0.0)
            throw std::invalid_argument(std::string("mcsolve: negative loss rate for ") + which);
        if (std::abs(ex + in - total) > 1e-9 * std::max(1.0, total))
            throw std::invalid_argument(
                std::string("mcsolve: kappa_ex + kappa_in does not match kappa for ") + which);
    };
    check(sig.kappa_ex, sig.kappa_in, params.kappa_s, "signal");
    check(idl.kappa_ex, idl.kappa_in, params.kappa_i, "idler");
}

// Trajectories are processed in fixed-size chunks and reduced in chunk order,
// so results are identical for any thread count.
constexpr int kChunk = 64;

template <class PerTraj>
void run_parallel(int n_traj, int threads, PerTraj&& per_traj)
{
    int n_chunks = (n_traj + kChunk - 1) / kChunk;
    if (threads <= 0)
        threads = int(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n_chunks));

    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        try {
            for (;;) {
                int c = next.fetch_add(1);
                if (c >= n_chunks)
                    return;
                int lo = c * kChunk;
                int hi = std::min(n_traj, lo + kChunk);
                for (int i = lo; i < hi; ++i)
                    per_traj(c, i);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(error_mutex);
            if (!error)
                error = std::current_exception();
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int i = 0; i < threads; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (error)
        std::rethrow_exception(error);
}

}  // namespace

EnsembleStatistics mcsolve(const TwoModeSpace& space, const SystemParams& params,
                           const LossSplit& signal_loss, const LossSplit& idler_loss,
                           const QuantumState& psi0, int n_traj, std::uint64_t seed,
                           const McOptions& options)
{
    if (!psi0.is_ket())
        throw std::invalid_argument("mcsolve: initial state must be a ket");
    if (!(psi0.space == space))
        throw std::invalid_argument("mcsolve: initial state on a different space");
    if (n_traj < 1)
        throw std::invalid_argument("mcsolve: n_traj must be >= 1");
    validate_losses(params, signal_loss, idler_loss);

    Tables tables(space, params);
    TrajectoryContext cx;
    cx.tables = &tables;
    cx.rates = {{signal_loss.kappa_ex, signal_loss.kappa_in,
                 idler_loss.kappa_ex, idler_loss.kappa_in}};
    cx.pump = params.pump;
    cx.tau_p = params.schedule.resolve_tau(params.pump);
    cx.window = params.schedule.total_window;
    cx.rtol = options.rtol;
    cx.atol = options.atol;
    cx.keep_kerr = options.keep_kerr_after_pulse;
    cx.psi0 = &psi0.data;

    if (options.record_out)
        options.record_out->assign(n_traj, {});

    const int cells = space.dim;
    const int n_chunks = (n_traj + kChunk - 1) / kChunk;
    std::vector<std::vector<long>> chunk_counts(n_chunks, std::vector<long>(cells, 0));
    std::vector<std::array<long, 4>> chunk_channels(n_chunks, std::array<long, 4>{});
    std::vector<long> chunk_clamped(n_chunks, 0);

    // Detection starts at pulse switch-off: the source emits its prepared
    // photons after the pump stops, so detected counts mirror the intracavity
    // state at switch-off. Pump-stage jumps still appear in the records and
    // the channel tallies.
    const double detect_from = cx.tau_p - 1e-12;
    run_parallel(n_traj, options.threads, [&](int chunk, int i) {
        TrajectoryRecord rec = run_trajectory(cx, i, seed, nullptr);
        int ns_det = 0, ni_det = 0;
        for (const auto& [tj, ch] : rec.jumps) {
            chunk_channels[chunk][int(ch)] += 1;
            if (tj < detect_from)
                continue;
            if (ch == JumpChannel::SignalExternal)
                ++ns_det;
            else if (ch == JumpChannel::IdlerExternal)
                ++ni_det;
        }
        bool clamped = ns_det > space.n_max_s || ni_det > space.n_max_i;
        ns_det = std::min(ns_det, space.n_max_s);
        ni_det = std::min(ni_det, space.n_max_i);
        chunk_counts[chunk][space.index(ns_det, ni_det)] += 1;
        if (clamped)
            chunk_clamped[chunk] += 1;
        if (options.record_out)
            (*options.record_out)[i] = std::move(rec);
    });

    EnsembleStatistics st;
    st.n_traj = n_traj;
    st.seed = seed;
    st.detected_joint.n_max_s = space.n_max_s;
    st.detected_joint.n_max_i = space.n_max_i;
    st.detected_joint.p.assign(cells, 0.0);
    std::array<long, 4> channels{};
    long clamped = 0;
    for (int c = 0; c < n_chunks; ++c) {
        for (int k = 0; k < cells; ++k)
            st.detected_joint.p[k] += double(chunk_counts[c][k]);
        for (int k = 0; k < 4; ++k)
            channels[k] += chunk_channels[c][k];
        clamped += chunk_clamped[c];
    }
    for (double& v : st.detected_joint.p)
        v /= double(n_traj);
    st.total_jumps = channels[0] + channels[1] + channels[2] + channels[3];
    for (int k = 0; k < 4; ++k)
        st.channel_fractions[JumpChannel(k)] =
            st.total_jumps > 0 ? double(channels[k]) / double(st.total_jumps) : 0.0;
    st.clamped_fraction = double(clamped) / double(n_traj);
    return st;
}

std::vector<MeanPoint> trajectory_mean(const TwoModeSpace& space, const SystemParams& params,
                                       const LossSplit& signal_loss, const LossSplit& idler_loss,
                                       const QuantumState& psi0, int n_traj, std::uint64_t seed,
                                       const std::vector<double>& sample_times,
                                       const McOptions& options)
{
    if (!psi0.is_ket())
        throw std::invalid_argument("trajectory_mean: initial state must be a ket");
    if (!(psi0.space == space))
        throw std::invalid_argument("trajectory_mean: initial state on a different space");
    if (!std::is_sorted(sample_times.begin(), sample_times.end()))
        throw std::invalid_argument("trajectory_mean: sample times must be sorted");
    for (double tload : sample_times)
        if (tload < 0.0 || tload > params.schedule.total_window)
            throw std::invalid_argument("trajectory_mean: sample time outside the window");
    validate_losses(params, signal_loss, idler_loss);

    Tables tables(space, params);
    TrajectoryContext cx;
    cx.tables = &tables;
    cx.rates = {{signal_loss.kappa_ex, signal_loss.kappa_in,
                 idler_loss.kappa_ex, idler_loss.kappa_in}};
    cx.pump = params.pump;
    cx.tau_p = params.schedule.resolve_tau(params.pump);
    cx.window = params.schedule.total_window;
    cx.rtol = options.rtol;
    cx.atol = options.atol;
    cx.keep_kerr = options.keep_kerr_after_pulse;
    cx.psi0 = &psi0.data;
    cx.sample_times = sample_times;

    const std::size_t m = sample_times.size();
    const int n_chunks = (n_traj + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> sums_s(n_chunks, std::vector<double>(m, 0.0));
    std::vector<std::vector<double>> sums_i(n_chunks, std::vector<double>(m, 0.0));

    run_parallel(n_traj, options.threads, [&](int chunk, int i) {
        auto sampler = [&, chunk](std::size_t idx, double ns, double ni) {
            sums_s[chunk][idx] += ns;
            sums_i[chunk][idx] += ni;
        };
        run_trajectory(cx, i, seed, sampler);
    });

    std::vector<MeanPoint> out(m);
    for (std::size_t k = 0; k < m; ++k) {
        out[k].time = sample_times[k];
        for (int c = 0; c < n_chunks; ++c) {
            out[k].n_signal += sums_s[c][k];
            out[k].n_idler += sums_i[c][k];
        }
        out[k].n_signal /= double(n_traj);
        out[k].n_idler /= double(n_traj);
    }
    return out;
}

}  // namespace spdc
