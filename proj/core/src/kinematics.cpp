#include "grapho/kinematics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numeric>
#include <string>

#include "grapho/error.hpp"

namespace grapho {

namespace {

std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

// Zero-phase low-pass of one channel: remove the endpoint chord so the periodic
// extension has no jump, apply |H|^2 of a Butterworth filter in the frequency
// domain, then restore the chord.
void lowpass_channel(std::vector<double>& v, double dt, double cutoff, int order) {
    const std::size_t n = v.size();
    if (n < 3) return;
    const double a = v.front();
    const double slope = (v.back() - v.front()) / static_cast<double>(n - 1);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = v[i] - (a + slope * static_cast<double>(i));

    const std::size_t nc = n / 2 + 1;
    std::vector<std::complex<double>> spec(nc);
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), r.data(), reinterpret_cast<fftw_complex*>(spec.data()),
                                   FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(spec.data()), r.data(),
                                   FFTW_ESTIMATE);
    }
    fftw_execute(fwd);
    const double df = 1.0 / (static_cast<double>(n) * dt);
    for (std::size_t k = 0; k < nc; ++k) {
        const double f = static_cast<double>(k) * df;
        spec[k] *= 1.0 / (1.0 + std::pow(f / cutoff, 2.0 * order));
    }
    fftw_execute(inv);
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
    }
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = r[i] * scale + (a + slope * static_cast<double>(i));
}

double derivative(const std::vector<double>& f, std::size_t i, double dt) {
    const std::size_t n = f.size();
    if (i == 0) return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
    if (i == n - 1) return (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
    return (f[i + 1] - f[i - 1]) / (2.0 * dt);
}

double percentile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - w) + v[hi] * w;
}

std::size_t samples_for(double seconds, double dt) {
    return static_cast<std::size_t>(std::max(0.0, std::ceil(seconds / dt - 1e-9)));
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

UniformTrace resample(const Stroke& stroke, double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw Error("CONFIG", "resample rate must be positive");
    const auto& s = stroke.samples;
    if (s.size() < 2) throw Error("STROKE_TOO_SHORT", "stroke has fewer than 2 samples");
    const double dt = 1.0 / rate;
    const double dur = s.back().t - s.front().t;
    const auto n = static_cast<std::size_t>(std::floor(dur * rate + 1e-9)) + 1;
    if (n < 2) throw Error("RATE", "fewer than 2 grid points fit in the stroke at " + std::to_string(rate) + " Hz");

    UniformTrace out;
    out.t0 = s.front().t;
    out.dt = dt;
    out.x.resize(n);
    out.y.resize(n);
    std::size_t j = 0;
    const double snap = 1e-9 * dt;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = out.t0 + dt * static_cast<double>(i);
        while (j + 1 < s.size() - 1 && s[j + 1].t <= t) ++j;
        if (std::abs(t - s[j].t) <= snap) {
            out.x[i] = s[j].x;
            out.y[i] = s[j].y;
        } else if (std::abs(t - s[j + 1].t) <= snap || t >= s[j + 1].t) {
            out.x[i] = s[j + 1].x;
            out.y[i] = s[j + 1].y;
        } else {
            const double w = (t - s[j].t) / (s[j + 1].t - s[j].t);
            out.x[i] = s[j].x * (1.0 - w) + s[j + 1].x * w;
            out.y[i] = s[j].y * (1.0 - w) + s[j + 1].y * w;
        }
    }
    return out;
}

UniformTrace smooth(const UniformTrace& trace, double cutoff, int order) {
    if (!(trace.dt > 0.0)) throw Error("CONFIG", "trace dt must be positive");
    const double nyquist = 0.5 / trace.dt;
    if (!(cutoff > 0.0)) throw Error("CONFIG", "cutoff must be positive");
    if (cutoff >= nyquist) throw Error("NYQUIST", "cutoff must be below the Nyquist frequency");
    if (order < 1) throw Error("CONFIG", "filter order must be at least 1");
    UniformTrace out = trace;
    lowpass_channel(out.x, trace.dt, cutoff, order);
    lowpass_channel(out.y, trace.dt, cutoff, order);
    return out;
}

VelocityProfile speed_profile(const UniformTrace& trace) {
    const std::size_t n = trace.size();
    if (n < 3 || trace.y.size() != n) throw Error("TOO_SHORT", "speed profile needs at least 3 samples");
    VelocityProfile vp;
    vp.t0 = trace.t0;
    vp.dt = trace.dt;
    vp.speed.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        vp.speed[i] = std::hypot(derivative(trace.x, i, trace.dt), derivative(trace.y, i, trace.dt));
    return vp;
}

std::vector<RawPeak> find_peaks(std::span<const double> s, double min_prominence, std::size_t min_distance) {
    const std::size_t n = s.size();
    std::vector<RawPeak> found;
    std::size_t i = 1;
    while (i + 1 < n) {
        if (!(s[i] > s[i - 1])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && s[j + 1] == s[i]) ++j;
        if (j + 1 < n && s[j + 1] < s[i]) {
            const std::size_t pk = (i + j) / 2;
            const double h = s[pk];
            double left_min = h;
            for (std::size_t l = i; l-- > 0;) {
                if (s[l] > h) break;
                left_min = std::min(left_min, s[l]);
            }
            double right_min = h;
            for (std::size_t r = j + 1; r < n; ++r) {
                if (s[r] > h) break;
                right_min = std::min(right_min, s[r]);
            }
            const double prom = h - std::max(left_min, right_min);
            if (prom >= min_prominence) found.push_back({pk, prom});
        }
        i = j + 1;
    }

    if (min_distance > 1 && found.size() > 1) {
        std::vector<std::size_t> order(found.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return s[found[a].index] > s[found[b].index]; });
        std::vector<bool> keep(found.size(), false);
        std::vector<std::size_t> kept;
        for (auto idx : order) {
            bool ok = true;
            for (auto k : kept) {
                const auto a = found[idx].index, b = found[k].index;
                if ((a > b ? a - b : b - a) < min_distance) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                keep[idx] = true;
                kept.push_back(idx);
            }
        }
        std::vector<RawPeak> thinned;
        for (std::size_t k = 0; k < found.size(); ++k)
            if (keep[k]) thinned.push_back(found[k]);
        found.swap(thinned);
    }
    return found;
}

std::vector<PeakEvent> detect_peaks(const VelocityProfile& vp, double min_prominence_frac, double min_separation) {
    if (!(min_prominence_frac > 0.0 && min_prominence_frac < 1.0))
        throw Error("CONFIG", "peak prominence fraction must lie in (0,1)");
    std::vector<PeakEvent> out;
    if (vp.speed.empty()) return out;
    const double top = *std::max_element(vp.speed.begin(), vp.speed.end());
    if (!(top > 0.0)) return out;
    for (const auto& p : find_peaks(vp.speed, min_prominence_frac * top, samples_for(min_separation, vp.dt)))
        out.push_back({vp.time(p.index), vp.speed[p.index], p.prominence});
    return out;
}

std::vector<PauseEvent> detect_pauses(const VelocityProfile& vp, double floor_frac, double min_duration) {
    if (!(floor_frac > 0.0 && floor_frac < 1.0)) throw Error("CONFIG", "pause floor fraction must lie in (0,1)");
    const std::size_t n = vp.size();
    std::vector<PauseEvent> out;
    if (n == 0) return out;

    std::vector<bool> in_gap(n, false);
    for (const auto& g : vp.pen_up_gaps)
        for (std::size_t i = 0; i < n; ++i)
            if (vp.time(i) > g.start && vp.time(i) < g.end) in_gap[i] = true;

    std::vector<double> pen_down;
    pen_down.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (!in_gap[i]) pen_down.push_back(vp.speed[i]);
    const double floor = floor_frac * percentile(pen_down, 0.95);

    struct Span {
        double start, end;
        bool gap, touches_edge;
    };
    std::vector<Span> spans;
    std::size_t i = 0;
    while (i < n) {
        if (in_gap[i] || !(vp.speed[i] < floor)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && !in_gap[j + 1] && vp.speed[j + 1] < floor) ++j;
        spans.push_back({vp.time(i) - 0.5 * vp.dt, vp.time(j) + 0.5 * vp.dt, false, i == 0 || j == n - 1});
        i = j + 1;
    }
    for (const auto& g : vp.pen_up_gaps) spans.push_back({g.start, g.end, true, false});
    std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.start < b.start; });

    std::vector<Span> merged;
    for (const auto& sp : spans) {
        if (!merged.empty() && sp.start <= merged.back().end + 1e-9) {
            auto& m = merged.back();
            m.end = std::max(m.end, sp.end);
            m.gap = m.gap || sp.gap;
            m.touches_edge = m.touches_edge || sp.touches_edge;
        } else {
            merged.push_back(sp);
        }
    }
    for (const auto& m : merged) {
        if (m.gap || (!m.touches_edge && m.end - m.start >= min_duration - 1e-12)) out.push_back({m.start, m.end});
    }
    return out;
}

std::vector<double> direction_change_minima(const UniformTrace& trace, const VelocityProfile& vp,
                                            const KinematicsConfig& cfg) {
    const std::size_t n = vp.size();
    if (trace.size() != n) throw Error("ALIGN", "trace and profile lengths differ");
    std::vector<double> out;
    if (n < 3) return out;
    const double top = *std::max_element(vp.speed.begin(), vp.speed.end());
    if (!(top > 0.0)) return out;

    std::vector<double> inverted(n);
    for (std::size_t i = 0; i < n; ++i) inverted[i] = top - vp.speed[i];
    const auto candidates =
        find_peaks(inverted, cfg.peak_prominence_frac * top, samples_for(cfg.minimum_min_separation, vp.dt));

    const auto half = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.5 * cfg.turn_window / vp.dt)));
    const double min_disp2 = cfg.turn_min_displacement_mm * cfg.turn_min_displacement_mm;
    auto dist2 = [&](std::size_t a, std::size_t b) {
        const double dx = trace.x[a] - trace.x[b], dy = trace.y[a] - trace.y[b];
        return dx * dx + dy * dy;
    };
    auto heading_change = [&](std::size_t i) -> double {
        std::size_t j = i >= half ? i - half : 0;
        while (j > 0 && dist2(i, j) < min_disp2) --j;
        std::size_t k = std::min(n - 1, i + half);
        while (k + 1 < n && dist2(i, k) < min_disp2) ++k;
        if (dist2(i, j) < min_disp2 || dist2(i, k) < min_disp2) return 0.0;
        const double ax = trace.x[i] - trace.x[j], ay = trace.y[i] - trace.y[j];
        const double bx = trace.x[k] - trace.x[i], by = trace.y[k] - trace.y[i];
        return std::abs(std::atan2(ax * by - ay * bx, ax * bx + ay * by)) * 180.0 / kPi;
    };

    const auto reach = static_cast<std::size_t>(std::llround(cfg.turn_coincidence / vp.dt));
    for (const auto& c : candidates) {
        const std::size_t lo = c.index >= reach ? c.index - reach : 0;
        const std::size_t hi = std::min(n - 1, c.index + reach);
        double best = 0.0;
        for (std::size_t i = lo; i <= hi; ++i) best = std::max(best, heading_change(i));
        if (best >= cfg.turn_min_deg) out.push_back(vp.time(c.index));
    }
    return out;
}

SessionKinematics analyze_kinematics(const Session& session, const KinematicsConfig& cfg) {
    SessionKinematics out;
    const double dt = 1.0 / cfg.resample_hz;
    for (std::size_t k = 0; k < session.strokes.size(); ++k) {
        const auto& stroke = session.strokes[k];
        if (stroke.samples.size() < 2 || std::floor(stroke.duration() * cfg.resample_hz + 1e-9) + 1 < 3) {
            ++out.skipped_strokes;
            continue;
        }
        StrokeKinematics sk;
        sk.stroke_index = k;
        sk.trace = smooth(resample(stroke, cfg.resample_hz), cfg.cutoff_hz, cfg.filter_order);
        sk.profile = speed_profile(sk.trace);
        sk.corner_times = direction_change_minima(sk.trace, sk.profile, cfg);
        out.strokes.push_back(std::move(sk));
    }
    if (out.strokes.empty()) throw Error("DEGENERATE", "no stroke is long enough to analyse");

    auto& vp = out.profile;
    vp.t0 = out.strokes.front().trace.t0;
    vp.dt = dt;
    std::size_t prev_end = 0;
    for (std::size_t s = 0; s < out.strokes.size(); ++s) {
        const auto& sk = out.strokes[s];
        auto offset = static_cast<std::size_t>(std::max(0LL, std::llround((sk.trace.t0 - vp.t0) / dt)));
        if (s > 0) {
            offset = std::max(offset, prev_end + 1);
            vp.pen_up_gaps.push_back({vp.time(prev_end), vp.time(offset)});
        }
        vp.speed.resize(offset, 0.0);
        vp.speed.insert(vp.speed.end(), sk.profile.speed.begin(), sk.profile.speed.end());
        prev_end = vp.speed.size() - 1;
    }
    out.peaks = detect_peaks(vp, cfg.peak_prominence_frac, cfg.peak_min_separation);
    out.pauses = detect_pauses(vp, cfg.pause_floor_frac, cfg.pause_min_duration);
    return out;
}

}  // namespace grapho
