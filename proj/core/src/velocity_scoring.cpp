#include "grapho/velocity_scoring.hpp"

#include <algorithm>
#include <cmath>

#include "grapho/error.hpp"

namespace grapho {

double autocorrelation_peak(const VelocityProfile& vp, double min_lag) {
    const std::size_t n = vp.size();
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (double v : vp.speed) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> a(n);
    double energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = vp.speed[i] - mean;
        energy += a[i] * a[i];
    }
    if (!(energy > 0.0)) return 0.0;
    const auto first = static_cast<std::size_t>(std::ceil(min_lag / vp.dt - 1e-9));
    const auto last = static_cast<std::size_t>(std::floor(0.5 * vp.duration() / vp.dt + 1e-9));
    double best = -1.0;
    for (std::size_t k = std::max<std::size_t>(first, 1); k <= last && k < n; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i + k < n; ++i) acc += a[i] * a[i + k];
        best = std::max(best, acc / energy);
    }
    return best;
}

double coefficient_of_variation(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    if (!(mean > 0.0)) return INFINITY;
    return std::sqrt(var) / mean;
}

int score_vpr(const VelocityProfile& vp, const ScaleConfig& cfg) {
    if (vp.duration() < cfg.vpr_min_duration)
        throw Error("TOO_SHORT", "velocity profile shorter than " + std::to_string(cfg.vpr_min_duration) + " s");
    return autocorrelation_peak(vp, cfg.vpr_min_lag) >= cfg.vpr_autocorr_min ? 1 : 0;
}

int score_vc(const std::vector<PeakEvent>& peaks, const ScaleConfig& cfg) {
    if (peaks.size() < 2) return 1;
    std::vector<double> h;
    for (const auto& p : peaks) h.push_back(p.height);
    return coefficient_of_variation(h) <= cfg.vc_cv_max ? 1 : 0;
}

int score_p(const std::vector<PauseEvent>& pauses, const std::vector<PeakEvent>& peaks, TaskKind task,
            const ScaleConfig& cfg) {
    std::vector<double> v;
    if (task == TaskKind::Circle) {
        for (std::size_t i = 1; i < peaks.size(); ++i) v.push_back(peaks[i].time - peaks[i - 1].time);
    } else {
        for (const auto& p : pauses) v.push_back(p.duration());
    }
    if (v.size() < 2) return 1;
    return coefficient_of_variation(v) <= cfg.p_cv_max ? 1 : 0;
}

int score_t(double duration, TaskKind task, const ScaleConfig& cfg) {
    if (!(duration > 0.0)) throw Error("DURATION", "duration must be positive");
    const double limit = task == TaskKind::Elel ? cfg.t_limit_elel : cfg.t_limit_circle_square;
    return duration <= limit ? 1 : 0;
}

std::optional<double> elel_time_window(const Session& session, const GeometryReport& geometry,
                                       const ShapeConfig& shape_cfg) {
    const auto pairs = letter_pairs(geometry.loops, shape_cfg.tall_ratio);
    if (pairs.size() < 3) return std::nullopt;
    return geometry.loops[pairs[2].second].t_end - session.strokes.front().samples.front().t;
}

VelocityScore score_task(const Session& session, const ShapeAnalysis& analysis, const ScaleConfig& cfg,
                         const ShapeConfig& shape_cfg) {
    const auto& kin = analysis.kinematics;
    VelocityScore s;
    s.vpr = score_vpr(kin.profile, cfg);
    s.vc = score_vc(kin.peaks, cfg);
    s.p = score_p(kin.pauses, kin.peaks, session.task, cfg);
    double duration = session_duration(session);
    if (session.task == TaskKind::Elel) {
        if (auto w = elel_time_window(session, analysis.geometry, shape_cfg)) duration = *w;
    }
    s.t = score_t(duration, session.task, cfg);
    return s;
}

VelocityScore score_task(const Session& session, const ScaleConfig& cfg, const KinematicsConfig& kcfg,
                         const ShapeConfig& shape_cfg) {
    auto kin = analyze_kinematics(session, kcfg);
    if (session.task != TaskKind::Elel) {
        ShapeAnalysis a;
        a.task = session.task;
        a.kinematics = std::move(kin);
        return score_task(session, a, cfg, shape_cfg);
    }
    return score_task(session, analyze_shape(session, std::move(kin), shape_cfg), cfg, shape_cfg);
}

SubjectVelocitySheet aggregate_subject(const std::map<TaskKind, VelocityScore>& per_task, const std::string& subject_id) {
    SubjectVelocitySheet sheet;
    sheet.subject_id = subject_id;
    for (auto task : kAllTasks) {
        auto it = per_task.find(task);
        if (it == per_task.end())
            throw Error("MISSING_TASK", "subject " + subject_id + " lacks the " + std::string(to_string(task)) + " task");
        const auto& v = it->second;
        sheet.per_task[task] = v;
        sheet.item_totals.vpr += v.vpr;
        sheet.item_totals.vc += v.vc;
        sheet.item_totals.p += v.p;
        sheet.item_totals.t += v.t;
        sheet.grand_total += v.total();
    }
    return sheet;
}

}  // namespace grapho
