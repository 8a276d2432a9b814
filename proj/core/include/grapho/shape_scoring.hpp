#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "grapho/kinematics.hpp"
#include "grapho/session.hpp"
#include "grapho/synth.hpp"

namespace grapho {

struct ShapeConfig {
    double arc_step_mm = 0.25;
    double curvature_stencil_mm = 1.0;
    double degenerate_extent_mm = 1.0;

    double straight_curvature = 0.01;
    double straight_min_mm = 5.0;
    double spike_curvature = 0.5;
    double rounded_turn_deg = 90.0;
    double circular_turn_deg = 270.0;

    double circle_ratio_max = 2.0;
    double circle_min_diameter_mm = 30.0;

    double square_ratio_max = 2.0;
    double square_tight_ratio_max = 1.3;
    double square_side_cap_mm = 70.0;
    double extension_mm = 5.0;
    double angle_min_deg = 60.0;
    double angle_max_deg = 120.0;
    double alignment_max_deg = 30.0;
    int max_interruptions = 3;
    double min_piece_mm = 3.0;
    double min_side_mm = 5.0;
    double side_straightness = 0.12;
    double merge_angle_deg = 20.0;

    double tall_ratio = 1.5;
    double min_loop_mm = 3.0;
    double apex_band = 0.15;
    double horizontal_tol_deg = 15.0;
    int min_letter_pairs = 3;
    double baseline_max_deg = 30.0;
};

struct StraightRun {
    double length = 0.0;
    double angle_deg = 0.0;  // line direction folded into [0, 180)
};

struct Corner {
    double time = 0.0;
    double interior_angle = 0.0;
    Point position;
};

struct Loop {
    double apex_y = 0.0;
    double base_y = 0.0;
    double height = 0.0;
    double time = 0.0;  // apex time
    double t_start = 0.0;
    double t_end = 0.0;
    Point apex;
    Point base;
    std::size_t stroke = 0;
};

struct GeometryReport {
    double feret_max = 0.0;
    double feret_min = 0.0;
    double closure_gap = 0.0;
    double perimeter = 0.0;
    std::vector<StraightRun> straight_runs;
    std::vector<Corner> corners;
    std::vector<Loop> loops;
    double baseline_angle = 0.0;
    double rounded_turn_deg = 0.0;
    double net_turn_deg = 0.0;
};

// A stroke re-sampled at constant arc-length spacing, with the time at which the
// pen passed each point.
struct ArcTrace {
    std::size_t stroke = 0;
    double step = 0.0;
    std::vector<Point> points;
    std::vector<double> times;
    std::vector<double> arclength;
    std::vector<double> curvature;
    std::vector<double> corner_arclength;

    double length() const { return arclength.empty() ? 0.0 : arclength.back(); }
};

struct ShapeAnalysis {
    TaskKind task = TaskKind::Circle;
    SessionKinematics kinematics;
    std::vector<ArcTrace> traces;
    GeometryReport geometry;
};

ShapeAnalysis analyze_shape(const Session& session, SessionKinematics kinematics, const ShapeConfig& cfg = {});
ShapeAnalysis analyze_shape(const Session& session, const ShapeConfig& cfg = {}, const KinematicsConfig& kcfg = {});

GeometryReport analyze_geometry(const Session& session, const ShapeConfig& cfg = {}, const KinematicsConfig& kcfg = {});

struct ShapeScore {
    TaskKind task = TaskKind::Circle;
    std::vector<std::pair<std::string, int>> items;
    int total = 0;

    int item(const std::string& name) const;
};

std::vector<std::string> shape_item_names(TaskKind task);

ShapeScore score_circle(const ShapeAnalysis& analysis, const ShapeConfig& cfg = {});
ShapeScore score_square(const ShapeAnalysis& analysis, const ShapeConfig& cfg = {});
ShapeScore score_elel(const ShapeAnalysis& analysis, const ShapeConfig& cfg = {});

ShapeScore score_circle(const Session& session, const ShapeConfig& cfg = {}, const KinematicsConfig& kcfg = {});
ShapeScore score_square(const Session& session, const ShapeConfig& cfg = {}, const KinematicsConfig& kcfg = {});
ShapeScore score_elel(const Session& session, const ShapeConfig& cfg = {}, const KinematicsConfig& kcfg = {});

ShapeScore score_shape(const ShapeAnalysis& analysis, const ShapeConfig& cfg = {});

// Square side structure recovered from the pen pieces between corners.
struct SquareSide {
    Point centroid;
    Point direction;
    double length = 0.0;
    int interruptions = 0;
};

struct SquareFit {
    std::vector<SquareSide> sides;
    int extra_elements = 0;
    bool quad = false;
    std::vector<Point> corners;
    std::vector<double> side_lengths;
    std::vector<double> interior_angles;
    std::vector<double> gaps;
    std::vector<double> extensions;
    double bottom_angle = 90.0;
};

SquareFit fit_square(const ShapeAnalysis& analysis, const ShapeConfig& cfg = {});

// Loop classes in time order: false = small ('e'), true = tall ('l').
std::vector<bool> classify_loops(const std::vector<Loop>& loops, double tall_ratio);

// Indices (small, tall) of consecutive e-l letter pairs.
std::vector<std::pair<std::size_t, std::size_t>> letter_pairs(const std::vector<Loop>& loops, double tall_ratio);

}  // namespace grapho
