#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "grapho/session.hpp"

namespace grapho {

struct UniformTrace {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> x;
    std::vector<double> y;

    std::size_t size() const { return x.size(); }
    double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
};

struct PauseEvent {
    double start = 0.0;
    double end = 0.0;

    double duration() const { return end - start; }
};

struct VelocityProfile {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> speed;
    // Pen-up intervals inside the profile; their samples are zero-filled.
    std::vector<PauseEvent> pen_up_gaps;

    std::size_t size() const { return speed.size(); }
    double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
    double duration() const { return dt * static_cast<double>(speed.size()); }
};

struct PeakEvent {
    double time = 0.0;
    double height = 0.0;
    double prominence = 0.0;
};

struct KinematicsConfig {
    double resample_hz = 200.0;
    double cutoff_hz = 10.0;
    int filter_order = 2;
    double peak_prominence_frac = 0.10;
    double peak_min_separation = 0.05;
    double pause_floor_frac = 0.10;
    double pause_min_duration = 0.06;
    double turn_window = 0.10;
    double turn_min_deg = 30.0;
    double turn_coincidence = 0.05;
    double turn_min_displacement_mm = 1.0;
    double minimum_min_separation = 0.10;
};

UniformTrace resample(const Stroke& stroke, double rate);

UniformTrace smooth(const UniformTrace& trace, double cutoff, int order = 2);

VelocityProfile speed_profile(const UniformTrace& trace);

std::vector<PeakEvent> detect_peaks(const VelocityProfile& vp, double min_prominence_frac, double min_separation);

std::vector<PauseEvent> detect_pauses(const VelocityProfile& vp, double floor_frac, double min_duration);

std::vector<double> direction_change_minima(const UniformTrace& trace, const VelocityProfile& vp,
                                            const KinematicsConfig& cfg = {});

// Index-level peak finder shared by the event detectors: local maxima (plateaus
// resolved to their midpoint) with topographic prominence >= min_prominence, thinned
// so that no two survivors are closer than min_distance samples.
struct RawPeak {
    std::size_t index = 0;
    double prominence = 0.0;
};
std::vector<RawPeak> find_peaks(std::span<const double> signal, double min_prominence, std::size_t min_distance);

struct StrokeKinematics {
    std::size_t stroke_index = 0;
    UniformTrace trace;
    VelocityProfile profile;
    std::vector<double> corner_times;
};

struct SessionKinematics {
    std::vector<StrokeKinematics> strokes;
    VelocityProfile profile;
    std::vector<PeakEvent> peaks;
    std::vector<PauseEvent> pauses;
    std::size_t skipped_strokes = 0;
};

SessionKinematics analyze_kinematics(const Session& session, const KinematicsConfig& cfg = {});

}  // namespace grapho
