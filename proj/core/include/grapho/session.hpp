#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace grapho {

struct PenSample {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    bool pen_down = true;

    bool operator==(const PenSample&) const = default;
};

struct Stroke {
    std::vector<PenSample> samples;

    double start_time() const { return samples.front().t; }
    double end_time() const { return samples.back().t; }
    double duration() const { return end_time() - start_time(); }

    bool operator==(const Stroke&) const = default;
};

enum class TaskKind { Circle, Square, Elel };

inline constexpr TaskKind kAllTasks[] = {TaskKind::Circle, TaskKind::Square, TaskKind::Elel};

std::string_view to_string(TaskKind task);
std::optional<TaskKind> parse_task(std::string_view name);

struct Session {
    std::string subject_id;
    std::optional<std::string> group_label;
    TaskKind task = TaskKind::Circle;
    std::vector<Stroke> strokes;
    std::optional<std::string> device_note;

    bool operator==(const Session&) const = default;
};

struct Violation {
    std::string code;
    std::string message;
    std::optional<std::size_t> sample_index;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
};

// Throws grapho::Error with codes MAGIC, PARSE, SCHEMA, TASK, TIME_ORDER or the
// code of the first validation violation.
Session parse_session(std::string_view text);

std::string serialize_session(const Session& session);

ValidationReport validate_session(const Session& session);

double session_duration(const Session& session);

Session load_session(const std::filesystem::path& path);
void save_session(const Session& session, const std::filesystem::path& path);

}  // namespace grapho
