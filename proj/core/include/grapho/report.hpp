#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grapho/clustering.hpp"
#include "grapho/kinematics.hpp"
#include "grapho/session.hpp"
#include "grapho/shape_scoring.hpp"
#include "grapho/velocity_scoring.hpp"

namespace grapho {

struct ScoringConfig {
    ScaleConfig scale;
    KinematicsConfig kinematics;
    ShapeConfig shape;
};

// key=value overrides for any ScaleConfig, KinematicsConfig or ShapeConfig field.
// Throws Error("CONFIG") for unknown keys or values outside the documented range.
ScoringConfig parse_scoring_config(std::string_view text);

struct SessionMetrics {
    double duration = 0.0;
    std::optional<double> t_window;
    double autocorr_peak = 0.0;
    std::size_t peak_count = 0;
    double peak_height_cv = 0.0;
    double peak_interval_cv = 0.0;
    std::size_t pause_count = 0;
    double pause_cv = 0.0;
};

struct SessionResult {
    std::string source;
    std::string subject_id;
    std::optional<std::string> group_label;
    TaskKind task = TaskKind::Circle;
    ShapeScore shape;
    VelocityScore velocity;
    GeometryReport geometry;
    SessionMetrics metrics;
};

SessionResult score_session(const Session& session, const ScoringConfig& cfg = {});

std::string session_detail_json(const SessionResult& result);

struct CohortRow {
    std::string subject_id;
    std::optional<std::string> group_label;
    std::map<TaskKind, ShapeScore> shape;
    std::map<TaskKind, VelocityScore> velocity;

    bool complete() const { return shape.size() == 3 && velocity.size() == 3; }
    int shape_total() const;
    ItemTotals velocity_items() const;
    int velocity_total() const;
};

struct CohortTable {
    std::vector<CohortRow> rows;  // sorted by subject_id
};

// Groups per-session results by subject. Duplicate (subject, task) pairs are
// reported through `problems` and the later one is dropped.
CohortTable build_cohort(const std::vector<SessionResult>& results, std::vector<std::string>* problems = nullptr);

// Criteria as rows per task, subjects as columns.
std::string nepsy_table_csv(const CohortTable& table);
std::string velocity_table_csv(const CohortTable& table);
// One row per subject.
std::string cohort_csv(const CohortTable& table);

// Reads velocity bits from either the criteria-by-subject layout or the
// one-row-per-subject layout. Totals are always recomputed from the bits.
std::vector<SubjectVelocitySheet> read_velocity_table(std::string_view csv);

std::string cluster_report_json(const ClusterResult& result, const std::vector<Feature>& features, std::uint64_t seed);

std::string trajectory_svg(const Session& session, const ShapeAnalysis& analysis);
std::string velocity_svg(const Session& session, const SessionKinematics& kinematics);

}  // namespace grapho
