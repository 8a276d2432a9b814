#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grapho/session.hpp"

namespace grapho {

struct PulseParams {
    double t0 = 0.0;
    double mu = 0.0;
    double sigma = 0.3;
    double D = 1.0;
    double theta_start = 0.0;
    double theta_end = 0.0;
};

double lognormal_speed(const PulseParams& p, double t);

// Fraction of the pulse amplitude travelled by time t.
double lognormal_progress(const PulseParams& p, double t);

// A constant-curvature piece of pen path. Headings are in radians; a piece whose
// headings are equal is a straight segment.
struct ArcPiece {
    double heading_start = 0.0;
    double heading_end = 0.0;
    double length = 0.0;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

class ArcPath {
public:
    ArcPath() = default;
    ArcPath(std::vector<ArcPiece> pieces, Point start);

    double length() const { return total_; }
    Point at(double s) const;
    Point end() const { return at(total_); }
    const std::vector<ArcPiece>& pieces() const { return pieces_; }

private:
    std::vector<ArcPiece> pieces_;
    std::vector<double> offsets_;
    std::vector<Point> starts_;
    double total_ = 0.0;
};

Point arc_displacement(const ArcPiece& piece);

struct PatternSpec {
    TaskKind task = TaskKind::Circle;
    int n_units = 12;
    double period = 0.28;
    double time_jitter = 0.0;
    double amp_jitter = 0.0;
    double pause_base = 0.0;
    double pause_jitter = 0.0;
    double scale_mm = 40.0;
    std::uint64_t seed = 0;

    double pulse_sigma = 0.3;
    double pulse_width = 0.35;  // exp(mu) as a fraction of the period
    double rate = 200.0;
    double rotation_deg = 0.0;
    Point origin{80.0, 120.0};
    std::string subject_id = "synth";
    std::optional<std::string> group_label;
};

PatternSpec default_spec(TaskKind task);

void check_spec(const PatternSpec& spec);

// Nominal path of each pulse before amplitude jitter.
std::vector<std::vector<ArcPiece>> pulse_geometry(const PatternSpec& spec);

// Pulse geometry for a chain of cursive looped letters of the given heights.
std::vector<std::vector<ArcPiece>> cursive_pulses(const std::vector<double>& letter_heights);

struct SynthPlan {
    std::vector<PulseParams> pulses;
    ArcPath path;
    double t_end = 0.0;
};

SynthPlan plan_session(const PatternSpec& spec);

Session generate_session(const PatternSpec& spec);

// Cohort spec: key=value lines, optional "<task>." prefix for task-specific keys.
struct CohortSpec {
    int subjects = 12;
    std::string subject_prefix = "S";
    std::optional<std::string> group_label;
    std::uint64_t seed = 0;
    std::vector<TaskKind> tasks{TaskKind::Circle, TaskKind::Square, TaskKind::Elel};
    PatternSpec circle = default_spec(TaskKind::Circle);
    PatternSpec square = default_spec(TaskKind::Square);
    PatternSpec elel = default_spec(TaskKind::Elel);

    const PatternSpec& spec_for(TaskKind task) const;
    PatternSpec& spec_for(TaskKind task);
};

CohortSpec parse_cohort_spec(std::string_view text);

std::vector<Session> generate_cohort(const CohortSpec& spec);

}  // namespace grapho
