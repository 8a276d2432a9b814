#include "grapho/session.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "grapho/error.hpp"
#include "text_util.hpp"

namespace grapho {

namespace {

constexpr double kCoordLimit = 1000.0;

struct Units {
    double space_scale = 1.0;  // to millimeters
    double time_scale = 1.0;   // to seconds
};

Units parse_units(std::string_view spec, std::size_t line) {
    auto parts = detail::split(spec, ',');
    if (parts.size() != 2) throw Error("SCHEMA", "units must be '<space>,<time>', got '" + std::string(spec) + "'", line);
    Units u;
    auto space = parts[0];
    if (space == "mm") {
        u.space_scale = 1.0;
    } else if (space == "cm") {
        u.space_scale = 10.0;
    } else if (space.substr(0, 3) == "pt@") {
        auto dpi = detail::to_double(space.substr(3));
        if (!dpi || !(*dpi > 0.0) || !std::isfinite(*dpi))
            throw Error("SCHEMA", "invalid dpi in units '" + std::string(spec) + "'", line);
        u.space_scale = 25.4 / *dpi;
    } else {
        throw Error("SCHEMA", "unknown space unit '" + std::string(space) + "'", line);
    }
    if (parts[1] == "s") {
        u.time_scale = 1.0;
    } else if (parts[1] == "ms") {
        u.time_scale = 1e-3;
    } else {
        throw Error("SCHEMA", "unknown time unit '" + std::string(parts[1]) + "'", line);
    }
    return u;
}

bool is_token(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '=') return false;
    return true;
}

}  // namespace

std::string_view to_string(TaskKind task) {
    switch (task) {
        case TaskKind::Circle: return "circle";
        case TaskKind::Square: return "square";
        case TaskKind::Elel: return "elel";
    }
    return "circle";
}

std::optional<TaskKind> parse_task(std::string_view name) {
    if (name == "circle") return TaskKind::Circle;
    if (name == "square") return TaskKind::Square;
    if (name == "elel") return TaskKind::Elel;
    return std::nullopt;
}

Session parse_session(std::string_view text) {
    if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
        static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF)
        text.remove_prefix(3);

    Session session;
    Units units;
    bool have_header = false;
    bool in_stroke = false;
    double last_t = -INFINITY;
    std::size_t line_no = 0;
    std::size_t pos = 0;

    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++line_no;
        auto line = detail::trim(raw);
        if (line.empty()) continue;

        if (!have_header) {
            if (line.substr(0, 5) != "#gsx1" || (line.size() > 5 && line[5] != ' ' && line[5] != '\t'))
                throw Error("MAGIC", "missing #gsx1 header", line_no);
            std::map<std::string, std::string, std::less<>> fields;
            auto tokens = detail::split_ws(line.substr(5));
            for (auto tok : tokens) {
                auto eq = tok.find('=');
                if (eq == std::string_view::npos || eq == 0)
                    throw Error("PARSE", "malformed header field '" + std::string(tok) + "'", line_no);
                std::string key(tok.substr(0, eq));
                if (fields.count(key)) throw Error("SCHEMA", "duplicate header field '" + key + "'", line_no);
                fields[key] = std::string(tok.substr(eq + 1));
            }
            auto subject = fields.find("subject");
            if (subject == fields.end() || subject->second.empty())
                throw Error("SCHEMA", "missing required field 'subject'", line_no);
            auto task = fields.find("task");
            if (task == fields.end()) throw Error("SCHEMA", "missing required field 'task'", line_no);
            auto kind = parse_task(task->second);
            if (!kind) throw Error("TASK", "unknown task '" + task->second + "'", line_no);
            session.subject_id = subject->second;
            session.task = *kind;
            if (auto u = fields.find("units"); u != fields.end()) units = parse_units(u->second, line_no);
            if (auto g = fields.find("group"); g != fields.end() && !g->second.empty()) session.group_label = g->second;
            if (auto d = fields.find("device"); d != fields.end() && !d->second.empty()) session.device_note = d->second;
            have_header = true;
            continue;
        }

        if (line.substr(0, 2) == "##") continue;
        if (line.front() == '#') throw Error("PARSE", "unexpected directive line", line_no);

        auto cols = detail::split_ws(line);
        if (cols.size() != 4) throw Error("PARSE", "expected 't x y d', got " + std::to_string(cols.size()) + " fields", line_no);
        auto t = detail::to_double(cols[0]);
        auto x = detail::to_double(cols[1]);
        auto y = detail::to_double(cols[2]);
        if (!t || !x || !y) throw Error("PARSE", "non-numeric sample field", line_no);
        if (!std::isfinite(*t) || !std::isfinite(*x) || !std::isfinite(*y))
            throw Error("PARSE", "non-finite sample value", line_no);
        if (cols[3] != "0" && cols[3] != "1") throw Error("PARSE", "pen state must be 0 or 1", line_no);

        PenSample s{*t * units.time_scale, *x * units.space_scale, *y * units.space_scale, cols[3] == "1"};
        if (s.t < last_t) throw Error("TIME_ORDER", "timestamp decreases", line_no);
        last_t = s.t;

        if (s.pen_down) {
            if (!in_stroke) {
                session.strokes.emplace_back();
                in_stroke = true;
            }
            session.strokes.back().samples.push_back(s);
        } else {
            in_stroke = false;
        }
    }

    if (!have_header) throw Error("MAGIC", "missing #gsx1 header", line_no ? line_no : 1);

    auto report = validate_session(session);
    if (!report.ok()) {
        const auto& v = report.violations.front();
        throw Error(v.code, v.message);
    }
    return session;
}

std::string serialize_session(const Session& session) {
    if (!is_token(session.subject_id)) throw Error("SCHEMA", "subject id must be a non-empty token without whitespace or '='");
    if (session.group_label && !is_token(*session.group_label))
        throw Error("SCHEMA", "group label must be a token without whitespace or '='");
    if (session.device_note && !is_token(*session.device_note))
        throw Error("SCHEMA", "device note must be a token without whitespace or '='");

    std::string out;
    out += "#gsx1 subject=" + session.subject_id + " task=" + std::string(to_string(session.task)) + " units=mm,s";
    if (session.group_label) out += " group=" + *session.group_label;
    if (session.device_note) out += " device=" + *session.device_note;
    out += '\n';
    for (const auto& stroke : session.strokes) {
        for (const auto& s : stroke.samples) {
            out += detail::fmt_num(s.t);
            out += ' ';
            out += detail::fmt_num(s.x);
            out += ' ';
            out += detail::fmt_num(s.y);
            out += s.pen_down ? " 1\n" : " 0\n";
        }
        if (!stroke.samples.empty()) {
            const auto& last = stroke.samples.back();
            out += detail::fmt_num(last.t) + ' ' + detail::fmt_num(last.x) + ' ' + detail::fmt_num(last.y) + " 0\n";
        }
    }
    return out;
}

ValidationReport validate_session(const Session& session) {
    ValidationReport report;
    auto add = [&](std::string code, std::string msg, std::optional<std::size_t> idx = std::nullopt) {
        report.violations.push_back({std::move(code), std::move(msg), idx});
    };

    if (session.strokes.empty()) add("NO_STROKES", "session has no pen-down strokes");

    std::size_t base = 0;
    for (std::size_t k = 0; k < session.strokes.size(); ++k) {
        const auto& samples = session.strokes[k].samples;
        const std::string where = "stroke " + std::to_string(k);
        if (samples.size() < 2) add("STROKE_TOO_SHORT", where + " has fewer than 2 samples", base);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& s = samples[i];
            if (!std::isfinite(s.t) || !std::isfinite(s.x) || !std::isfinite(s.y)) {
                add("NON_FINITE", where + " has a non-finite value", base + i);
                continue;
            }
            if (s.t < 0.0) add("NEGATIVE_TIME", where + " has a negative timestamp", base + i);
            if (std::abs(s.x) > kCoordLimit || std::abs(s.y) > kCoordLimit)
                add("OUT_OF_RANGE", where + " has a coordinate beyond 1000 mm", base + i);
            if (!s.pen_down) add("PEN_UP_IN_STROKE", where + " contains a pen-up sample", base + i);
            if (i > 0 && !(s.t > samples[i - 1].t)) add("TIME_ORDER", where + " timestamps not strictly increasing", base + i);
        }
        if (k > 0 && !samples.empty() && !session.strokes[k - 1].samples.empty() &&
            !(samples.front().t > session.strokes[k - 1].samples.back().t))
            add("STROKE_OVERLAP", where + " starts before the previous stroke ends", base);
        base += samples.size();
    }
    return report;
}

double session_duration(const Session& session) {
    return session.strokes.back().samples.back().t - session.strokes.front().samples.front().t;
}

Session load_session(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IO", "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_session(ss.str());
}

void save_session(const Session& session, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("IO", "cannot write " + path.string());
    out << serialize_session(session);
}

}  // namespace grapho
