#pragma once

#include <map>
#include <optional>
#include <vector>

#include "grapho/kinematics.hpp"
#include "grapho/session.hpp"
#include "grapho/shape_scoring.hpp"

namespace grapho {

struct VelocityScore {
    int vpr = 0;
    int vc = 0;
    int p = 0;
    int t = 0;

    int total() const { return vpr + vc + p + t; }
    bool operator==(const VelocityScore&) const = default;
};

struct ItemTotals {
    int vpr = 0;
    int vc = 0;
    int p = 0;
    int t = 0;

    bool operator==(const ItemTotals&) const = default;
};

struct SubjectVelocitySheet {
    std::string subject_id;
    std::map<TaskKind, VelocityScore> per_task;
    ItemTotals item_totals;
    int grand_total = 0;
};

struct ScaleConfig {
    double vpr_autocorr_min = 0.5;
    double vc_cv_max = 0.25;
    double p_cv_max = 0.25;
    double t_limit_circle_square = 4.0;
    double t_limit_elel = 8.0;
    double vpr_min_lag = 0.1;
    double vpr_min_duration = 0.3;
};

// Largest value of the normalized autocorrelation of the mean-removed signal over
// lags in [min_lag, duration/2].
double autocorrelation_peak(const VelocityProfile& vp, double min_lag);

// Population standard deviation divided by the mean; 0 for fewer than 2 values.
double coefficient_of_variation(const std::vector<double>& values);

int score_vpr(const VelocityProfile& vp, const ScaleConfig& cfg = {});
int score_vc(const std::vector<PeakEvent>& peaks, const ScaleConfig& cfg = {});
int score_p(const std::vector<PauseEvent>& pauses, const std::vector<PeakEvent>& peaks, TaskKind task,
            const ScaleConfig& cfg = {});
int score_t(double duration, TaskKind task, const ScaleConfig& cfg = {});

// Time from session start to the end of the third e-l letter pair, if present.
std::optional<double> elel_time_window(const Session& session, const GeometryReport& geometry,
                                       const ShapeConfig& shape_cfg = {});

VelocityScore score_task(const Session& session, const ScaleConfig& cfg = {}, const KinematicsConfig& kcfg = {},
                         const ShapeConfig& shape_cfg = {});

// Variant reusing an existing analysis of the same session.
VelocityScore score_task(const Session& session, const ShapeAnalysis& analysis, const ScaleConfig& cfg = {},
                         const ShapeConfig& shape_cfg = {});

SubjectVelocitySheet aggregate_subject(const std::map<TaskKind, VelocityScore>& per_task,
                                       const std::string& subject_id = {});

}  // namespace grapho
