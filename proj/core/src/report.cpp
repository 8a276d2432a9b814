#include "grapho/report.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "grapho/config.hpp"
#include "grapho/error.hpp"
#include "json.hpp"
#include "text_util.hpp"

namespace grapho {

namespace {

using ojson = nlohmann::ordered_json;

const char* kVelocityItems[] = {"VPR", "VC", "P", "T"};

int velocity_bit(const VelocityScore& v, std::size_t item) {
    switch (item) {
        case 0: return v.vpr;
        case 1: return v.vc;
        case 2: return v.p;
        default: return v.t;
    }
}

void set_velocity_bit(VelocityScore& v, std::size_t item, int bit) {
    switch (item) {
        case 0: v.vpr = bit; break;
        case 1: v.vc = bit; break;
        case 2: v.p = bit; break;
        default: v.t = bit; break;
    }
}

std::string csv_join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    return line + '\n';
}

ojson finite_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) { return detail::fmt_fixed(v, 2); }

}  // namespace

ScoringConfig parse_scoring_config(std::string_view text) {
    ScoringConfig cfg;
    struct Field {
        double* d = nullptr;
        int* i = nullptr;
        double lo = 0.0;
        double hi = INFINITY;
        bool lo_open = true;
        bool hi_open = false;
    };
    auto& sc = cfg.scale;
    auto& kc = cfg.kinematics;
    auto& sh = cfg.shape;
    const std::map<std::string, Field> fields{
        {"vpr_autocorr_min", {&sc.vpr_autocorr_min, nullptr, 0.0, 1.0, true, false}},
        {"vc_cv_max", {&sc.vc_cv_max}},
        {"p_cv_max", {&sc.p_cv_max}},
        {"t_limit_circle_square", {&sc.t_limit_circle_square}},
        {"t_limit_elel", {&sc.t_limit_elel}},
        {"vpr_min_lag", {&sc.vpr_min_lag}},
        {"resample_hz", {&kc.resample_hz, nullptr, 0.0, 10000.0}},
        {"cutoff_hz", {&kc.cutoff_hz}},
        {"filter_order", {nullptr, &kc.filter_order, 1.0, 8.0, false, false}},
        {"peak_prominence_frac", {&kc.peak_prominence_frac, nullptr, 0.0, 1.0, true, true}},
        {"peak_min_separation", {&kc.peak_min_separation, nullptr, 0.0, 10.0, false, false}},
        {"pause_floor_frac", {&kc.pause_floor_frac, nullptr, 0.0, 1.0, true, true}},
        {"pause_min_duration", {&kc.pause_min_duration, nullptr, 0.0, 10.0, false, false}},
        {"turn_window", {&kc.turn_window}},
        {"turn_min_deg", {&kc.turn_min_deg, nullptr, 0.0, 180.0}},
        {"turn_coincidence", {&kc.turn_coincidence, nullptr, 0.0, 10.0, false, false}},
        {"turn_min_displacement_mm", {&kc.turn_min_displacement_mm, nullptr, 0.0, 100.0, false, false}},
        {"straight_curvature", {&sh.straight_curvature}},
        {"straight_min_mm", {&sh.straight_min_mm}},
        {"spike_curvature", {&sh.spike_curvature}},
        {"rounded_turn_deg", {&sh.rounded_turn_deg}},
        {"circular_turn_deg", {&sh.circular_turn_deg}},
        {"circle_ratio_max", {&sh.circle_ratio_max, nullptr, 1.0, INFINITY, false, false}},
        {"circle_min_diameter_mm", {&sh.circle_min_diameter_mm, nullptr, 0.0, INFINITY, false, false}},
        {"square_ratio_max", {&sh.square_ratio_max, nullptr, 1.0, INFINITY, false, false}},
        {"square_tight_ratio_max", {&sh.square_tight_ratio_max, nullptr, 1.0, INFINITY, false, false}},
        {"square_side_cap_mm", {&sh.square_side_cap_mm}},
        {"extension_mm", {&sh.extension_mm}},
        {"angle_min_deg", {&sh.angle_min_deg, nullptr, 0.0, 180.0, false, false}},
        {"angle_max_deg", {&sh.angle_max_deg, nullptr, 0.0, 180.0, false, false}},
        {"alignment_max_deg", {&sh.alignment_max_deg, nullptr, 0.0, 90.0, false, false}},
        {"max_interruptions", {nullptr, &sh.max_interruptions, 0.0, 1000.0, false, false}},
        {"tall_ratio", {&sh.tall_ratio, nullptr, 1.0, INFINITY, true, false}},
        {"horizontal_tol_deg", {&sh.horizontal_tol_deg, nullptr, 0.0, 90.0, false, false}},
        {"min_letter_pairs", {nullptr, &sh.min_letter_pairs, 1.0, 1000.0, false, false}},
        {"baseline_max_deg", {&sh.baseline_max_deg, nullptr, 0.0, 90.0, false, false}},
    };

    std::set<std::string> seen;
    for (const auto& kv : parse_key_values(text)) {
        auto it = fields.find(kv.key);
        if (it == fields.end()) throw Error("CONFIG", "unknown key '" + kv.key + "'", kv.line);
        if (!seen.insert(kv.key).second) throw Error("CONFIG", "duplicate key '" + kv.key + "'", kv.line);
        const auto& f = it->second;
        double v = 0.0;
        try {
            v = f.i ? static_cast<double>(kv_int(kv)) : kv_double(kv);
        } catch (const Error& e) {
            throw Error("CONFIG", e.what(), kv.line);
        }
        const bool lo_ok = f.lo_open ? v > f.lo : v >= f.lo;
        const bool hi_ok = f.hi_open ? v < f.hi : v <= f.hi;
        if (!lo_ok || !hi_ok) throw Error("CONFIG", "'" + kv.key + "' is out of range", kv.line);
        if (f.d)
            *f.d = v;
        else
            *f.i = static_cast<int>(v);
    }
    if (!(kc.cutoff_hz < 0.5 * kc.resample_hz)) throw Error("CONFIG", "cutoff_hz must be below resample_hz / 2");
    if (!(sh.angle_min_deg < sh.angle_max_deg)) throw Error("CONFIG", "angle_min_deg must be below angle_max_deg");
    return cfg;
}

SessionResult score_session(const Session& session, const ScoringConfig& cfg) {
    SessionResult r;
    r.subject_id = session.subject_id;
    r.group_label = session.group_label;
    r.task = session.task;
    auto analysis = analyze_shape(session, analyze_kinematics(session, cfg.kinematics), cfg.shape);
    r.shape = score_shape(analysis, cfg.shape);
    r.velocity = score_task(session, analysis, cfg.scale, cfg.shape);
    r.geometry = analysis.geometry;

    const auto& kin = analysis.kinematics;
    auto& m = r.metrics;
    m.duration = session_duration(session);
    if (session.task == TaskKind::Elel) m.t_window = elel_time_window(session, analysis.geometry, cfg.shape);
    m.autocorr_peak = autocorrelation_peak(kin.profile, cfg.scale.vpr_min_lag);
    m.peak_count = kin.peaks.size();
    std::vector<double> heights, intervals, pauses;
    for (std::size_t i = 0; i < kin.peaks.size(); ++i) {
        heights.push_back(kin.peaks[i].height);
        if (i) intervals.push_back(kin.peaks[i].time - kin.peaks[i - 1].time);
    }
    for (const auto& p : kin.pauses) pauses.push_back(p.duration());
    m.peak_height_cv = coefficient_of_variation(heights);
    m.peak_interval_cv = coefficient_of_variation(intervals);
    m.pause_count = kin.pauses.size();
    m.pause_cv = coefficient_of_variation(pauses);
    return r;
}

std::string session_detail_json(const SessionResult& r) {
    ojson j;
    j["subject"] = r.subject_id;
    j["group"] = r.group_label ? ojson(*r.group_label) : ojson(nullptr);
    j["task"] = std::string(to_string(r.task));
    if (!r.source.empty()) j["source"] = r.source;

    ojson shape;
    for (const auto& [name, bit] : r.shape.items) shape["items"][name] = bit;
    shape["total"] = r.shape.total;
    j["shape"] = shape;

    ojson vel;
    vel["VPR"] = r.velocity.vpr;
    vel["VC"] = r.velocity.vc;
    vel["P"] = r.velocity.p;
    vel["T"] = r.velocity.t;
    vel["total"] = r.velocity.total();
    j["velocity"] = vel;

    const auto& m = r.metrics;
    ojson km;
    km["duration_s"] = m.duration;
    km["t_window_s"] = m.t_window ? ojson(*m.t_window) : ojson(nullptr);
    km["autocorr_peak"] = finite_or_null(m.autocorr_peak);
    km["peak_count"] = m.peak_count;
    km["peak_height_cv"] = finite_or_null(m.peak_height_cv);
    km["peak_interval_cv"] = finite_or_null(m.peak_interval_cv);
    km["pause_count"] = m.pause_count;
    km["pause_duration_cv"] = finite_or_null(m.pause_cv);
    j["kinematics"] = km;

    const auto& g = r.geometry;
    ojson geo;
    geo["feret_max_mm"] = g.feret_max;
    geo["feret_min_mm"] = g.feret_min;
    geo["closure_gap_mm"] = g.closure_gap;
    geo["perimeter_mm"] = g.perimeter;
    geo["baseline_angle_deg"] = g.baseline_angle;
    geo["rounded_turn_deg"] = g.rounded_turn_deg;
    geo["straight_runs"] = ojson::array();
    for (const auto& s : g.straight_runs) geo["straight_runs"].push_back({{"length_mm", s.length}, {"angle_deg", s.angle_deg}});
    geo["corners"] = ojson::array();
    for (const auto& c : g.corners) geo["corners"].push_back({{"time_s", c.time}, {"interior_angle_deg", c.interior_angle}});
    geo["loops"] = ojson::array();
    for (const auto& l : g.loops)
        geo["loops"].push_back({{"apex_y_mm", l.apex_y}, {"base_y_mm", l.base_y}, {"height_mm", l.height}, {"time_s", l.time}});
    j["geometry"] = geo;
    return j.dump(2) + "\n";
}

int CohortRow::shape_total() const {
    int t = 0;
    for (const auto& [task, s] : shape) t += s.total;
    return t;
}

ItemTotals CohortRow::velocity_items() const {
    ItemTotals t;
    for (const auto& [task, v] : velocity) {
        t.vpr += v.vpr;
        t.vc += v.vc;
        t.p += v.p;
        t.t += v.t;
    }
    return t;
}

int CohortRow::velocity_total() const {
    const auto t = velocity_items();
    return t.vpr + t.vc + t.p + t.t;
}

CohortTable build_cohort(const std::vector<SessionResult>& results, std::vector<std::string>* problems) {
    std::map<std::string, CohortRow> rows;
    for (const auto& r : results) {
        auto& row = rows[r.subject_id];
        row.subject_id = r.subject_id;
        if (!row.group_label) row.group_label = r.group_label;
        if (row.shape.count(r.task)) {
            if (problems)
                problems->push_back("DUPLICATE: subject " + r.subject_id + " has more than one " +
                                    std::string(to_string(r.task)) + " session" +
                                    (r.source.empty() ? "" : " (" + r.source + " ignored)"));
            continue;
        }
        row.shape[r.task] = r.shape;
        row.velocity[r.task] = r.velocity;
    }
    CohortTable t;
    for (auto& [id, row] : rows) {
        if (problems && !row.complete()) {
            std::string missing;
            for (auto task : kAllTasks)
                if (!row.shape.count(task)) missing += (missing.empty() ? "" : ",") + std::string(to_string(task));
            problems->push_back("MISSING_TASK: subject " + id + " lacks " + missing);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string nepsy_table_csv(const CohortTable& table) {
    std::vector<std::string> head{"task", "item"};
    std::vector<std::string> groups{"group", ""};
    for (const auto& r : table.rows) {
        head.push_back(r.subject_id);
        groups.push_back(r.group_label.value_or(""));
    }
    std::string out = csv_join(head) + csv_join(groups);
    for (auto task : kAllTasks) {
        const std::string tname(to_string(task));
        for (const auto& item : shape_item_names(task)) {
            std::vector<std::string> line{tname, item};
            for (const auto& r : table.rows) {
                auto it = r.shape.find(task);
                line.push_back(it == r.shape.end() ? "" : std::to_string(it->second.item(item)));
            }
            out += csv_join(line);
        }
        std::vector<std::string> line{tname, "Total"};
        for (const auto& r : table.rows) {
            auto it = r.shape.find(task);
            line.push_back(it == r.shape.end() ? "" : std::to_string(it->second.total));
        }
        out += csv_join(line);
    }
    std::vector<std::string> line{"total", "Total"};
    for (const auto& r : table.rows) line.push_back(std::to_string(r.shape_total()));
    return out + csv_join(line);
}

std::string velocity_table_csv(const CohortTable& table) {
    std::vector<std::string> head{"task", "item"};
    std::vector<std::string> groups{"group", ""};
    for (const auto& r : table.rows) {
        head.push_back(r.subject_id);
        groups.push_back(r.group_label.value_or(""));
    }
    std::string out = csv_join(head) + csv_join(groups);
    for (auto task : kAllTasks) {
        const std::string tname(to_string(task));
        for (std::size_t item = 0; item < 4; ++item) {
            std::vector<std::string> line{tname, kVelocityItems[item]};
            for (const auto& r : table.rows) {
                auto it = r.velocity.find(task);
                line.push_back(it == r.velocity.end() ? "" : std::to_string(velocity_bit(it->second, item)));
            }
            out += csv_join(line);
        }
        std::vector<std::string> line{tname, "Total"};
        for (const auto& r : table.rows) {
            auto it = r.velocity.find(task);
            line.push_back(it == r.velocity.end() ? "" : std::to_string(it->second.total()));
        }
        out += csv_join(line);
    }
    for (std::size_t item = 0; item < 4; ++item) {
        std::vector<std::string> line{"total_items", kVelocityItems[item]};
        for (const auto& r : table.rows) {
            const auto t = r.velocity_items();
            const int v[] = {t.vpr, t.vc, t.p, t.t};
            line.push_back(std::to_string(v[item]));
        }
        out += csv_join(line);
    }
    std::vector<std::string> line{"total", "Total"};
    for (const auto& r : table.rows) line.push_back(std::to_string(r.velocity_total()));
    return out + csv_join(line);
}

std::string cohort_csv(const CohortTable& table) {
    std::vector<std::string> head{"subject_id", "group"};
    for (auto task : kAllTasks) {
        const std::string tname(to_string(task));
        for (const auto& item : shape_item_names(task)) head.push_back(tname + "_" + item);
        head.push_back(tname + "_shape_total");
    }
    for (auto task : kAllTasks) {
        const std::string tname(to_string(task));
        for (auto item : kVelocityItems) head.push_back(tname + "_" + item);
        head.push_back(tname + "_velocity_total");
    }
    for (auto item : kVelocityItems) head.push_back(std::string(item) + "_total");
    head.push_back("velocity_total");
    head.push_back("shape_total");
    std::string out = csv_join(head);

    for (const auto& r : table.rows) {
        std::vector<std::string> line{r.subject_id, r.group_label.value_or("")};
        for (auto task : kAllTasks) {
            auto it = r.shape.find(task);
            for (const auto& item : shape_item_names(task))
                line.push_back(it == r.shape.end() ? "" : std::to_string(it->second.item(item)));
            line.push_back(it == r.shape.end() ? "" : std::to_string(it->second.total));
        }
        for (auto task : kAllTasks) {
            auto it = r.velocity.find(task);
            for (std::size_t item = 0; item < 4; ++item)
                line.push_back(it == r.velocity.end() ? "" : std::to_string(velocity_bit(it->second, item)));
            line.push_back(it == r.velocity.end() ? "" : std::to_string(it->second.total()));
        }
        const auto t = r.velocity_items();
        for (int v : {t.vpr, t.vc, t.p, t.t}) line.push_back(std::to_string(v));
        line.push_back(std::to_string(r.velocity_total()));
        line.push_back(std::to_string(r.shape_total()));
        out += csv_join(line);
    }
    return out;
}

std::vector<SubjectVelocitySheet> read_velocity_table(std::string_view csv) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
    std::size_t line_no = 0;
    for (auto raw : detail::split(csv, '\n')) {
        ++line_no;
        auto line = detail::trim(raw);
        if (line.empty() || line.substr(0, 2) == "##") continue;
        std::vector<std::string> cells;
        for (auto c : detail::split(line, ',')) cells.emplace_back(detail::trim(c));
        rows.push_back(std::move(cells));
        line_numbers.push_back(line_no);
    }
    if (rows.empty()) throw Error("SCHEMA", "empty score table");

    auto parse_bit = [](const std::string& cell, std::size_t line) {
        if (cell != "0" && cell != "1") throw Error("SCHEMA", "score cells must be 0 or 1, got '" + cell + "'", line);
        return cell == "1" ? 1 : 0;
    };

    std::vector<std::string> subjects;
    std::map<std::string, std::map<TaskKind, VelocityScore>> scores;
    std::map<std::string, std::map<TaskKind, int>> seen;
    const auto& head = rows.front();

    if (head.size() >= 3 && head[0] == "task" && head[1] == "item") {
        subjects.assign(head.begin() + 2, head.end());
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto& row = rows[r];
            if (row.size() < 2) throw Error("SCHEMA", "short row", line_numbers[r]);
            auto task = parse_task(row[0]);
            if (!task) continue;
            const auto item = std::find(std::begin(kVelocityItems), std::end(kVelocityItems), row[1]);
            if (item == std::end(kVelocityItems)) continue;
            if (row.size() != head.size()) throw Error("SCHEMA", "row width differs from header", line_numbers[r]);
            const auto idx = static_cast<std::size_t>(item - std::begin(kVelocityItems));
            for (std::size_t s = 0; s < subjects.size(); ++s) {
                set_velocity_bit(scores[subjects[s]][*task], idx, parse_bit(row[s + 2], line_numbers[r]));
                seen[subjects[s]][*task] |= 1 << idx;
            }
        }
    } else if (!head.empty() && head[0] == "subject_id") {
        std::map<std::string, std::size_t> col;
        for (std::size_t c = 0; c < head.size(); ++c) col[head[c]] = c;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto& row = rows[r];
            if (row.size() != head.size()) throw Error("SCHEMA", "row width differs from header", line_numbers[r]);
            subjects.push_back(row[0]);
            for (auto task : kAllTasks)
                for (std::size_t idx = 0; idx < 4; ++idx) {
                    auto it = col.find(std::string(to_string(task)) + "_" + kVelocityItems[idx]);
                    if (it == col.end()) continue;
                    set_velocity_bit(scores[row[0]][task], idx, parse_bit(row[it->second], line_numbers[r]));
                    seen[row[0]][task] |= 1 << idx;
                }
        }
    } else {
        throw Error("SCHEMA", "unrecognised score table header", line_numbers.front());
    }

    std::set<std::string> unique(subjects.begin(), subjects.end());
    if (unique.size() != subjects.size()) throw Error("SCHEMA", "duplicate subject in score table");
    std::vector<SubjectVelocitySheet> sheets;
    for (const auto& id : subjects) {
        for (auto task : kAllTasks)
            if (seen[id][task] != 0xF)
                throw Error("SCHEMA", "subject " + id + " lacks velocity items for " + std::string(to_string(task)));
        sheets.push_back(aggregate_subject(scores[id], id));
    }
    return sheets;
}

std::string cluster_report_json(const ClusterResult& result, const std::vector<Feature>& features, std::uint64_t seed) {
    ojson j;
    j["features"] = ojson::array();
    for (auto f : features) j["features"].push_back(std::string(to_string(f)));
    j["seed"] = seed;
    j["k"] = result.assignment.k;
    j["inertia"] = result.assignment.inertia;
    j["mean_silhouette"] = result.silhouette.mean;
    j["centroids"] = result.assignment.centroids;
    j["subjects"] = ojson::array();
    for (std::size_t i = 0; i < result.points.size(); ++i)
        j["subjects"].push_back({{"subject", result.points[i].subject_id},
                                 {"values", result.points[i].values},
                                 {"cluster", result.assignment.labels[i]},
                                 {"silhouette", result.silhouette.values[i]}});
    return j.dump(2) + "\n";
}

std::string trajectory_svg(const Session& session, const ShapeAnalysis& analysis) {
    double minx = INFINITY, maxx = -INFINITY, miny = INFINITY, maxy = -INFINITY;
    for (const auto& st : session.strokes)
        for (const auto& s : st.samples) {
            minx = std::min(minx, s.x);
            maxx = std::max(maxx, s.x);
            miny = std::min(miny, s.y);
            maxy = std::max(maxy, s.y);
        }
    const double margin = 5.0;
    const double w_mm = (maxx - minx) + 2 * margin, h_mm = (maxy - miny) + 2 * margin;
    const double scale = 560.0 / std::max(w_mm, h_mm);
    const double width = w_mm * scale, height = h_mm * scale;
    auto px = [&](double x) { return num((x - minx + margin) * scale); };
    auto py = [&](double y) { return num((maxy + margin - y) * scale); };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height + 24) +
           "\" viewBox=\"0 0 " + num(width) + " " + num(height + 24) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height + 24) + "\" fill=\"white\"/>\n";
    out += "<text x=\"8\" y=\"" + num(height + 17) + "\" font-family=\"sans-serif\" font-size=\"12\">" +
           xml_escape(session.subject_id) + " " + std::string(to_string(session.task)) + " trajectory (mm, " +
           num(scale) + " px/mm)</text>\n";
    for (const auto& st : session.strokes) {
        std::string d;
        for (std::size_t i = 0; i < st.samples.size(); ++i)
            d += (i ? " L " : "M ") + px(st.samples[i].x) + " " + py(st.samples[i].y);
        out += "<path class=\"raw\" d=\"" + d + "\" fill=\"none\" stroke=\"#bbbbbb\" stroke-width=\"3\"/>\n";
    }
    for (const auto& sk : analysis.kinematics.strokes) {
        std::string d;
        for (std::size_t i = 0; i < sk.trace.size(); ++i) d += (i ? " L " : "M ") + px(sk.trace.x[i]) + " " + py(sk.trace.y[i]);
        out += "<path class=\"smoothed\" d=\"" + d + "\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.2\"/>\n";
    }
    for (const auto& c : analysis.geometry.corners)
        out += "<circle class=\"corner\" cx=\"" + px(c.position.x) + "\" cy=\"" + py(c.position.y) +
               "\" r=\"4\" fill=\"none\" stroke=\"#c0392b\"/>\n";
    for (const auto& l : analysis.geometry.loops)
        out += "<circle class=\"apex\" cx=\"" + px(l.apex.x) + "\" cy=\"" + py(l.apex.y) + "\" r=\"3\" fill=\"#27ae60\"/>\n";
    out += "</svg>\n";
    return out;
}

std::string velocity_svg(const Session& session, const SessionKinematics& kin) {
    const auto& vp = kin.profile;
    const double width = 800, height = 300, left = 50, right = 15, top = 15, bottom = 40;
    const double t0 = vp.t0, t1 = vp.t0 + vp.dt * static_cast<double>(vp.size() > 1 ? vp.size() - 1 : 1);
    double vmax = 0.0;
    for (double v : vp.speed) vmax = std::max(vmax, v);
    if (!(vmax > 0)) vmax = 1.0;
    auto px = [&](double t) { return num(left + (t - t0) / (t1 - t0) * (width - left - right)); };
    auto py = [&](double v) { return num(height - bottom - v / (1.05 * vmax) * (height - top - bottom)); };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
           "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) + "\" fill=\"white\"/>\n";
    for (const auto& p : kin.pauses) {
        const double a = std::max(p.start, t0), b = std::min(p.end, t1);
        out += "<rect class=\"pause-band\" x=\"" + px(a) + "\" y=\"" + num(top) + "\" width=\"" +
               num(std::max(0.0, std::stod(px(b)) - std::stod(px(a)))) + "\" height=\"" + num(height - top - bottom) +
               "\" fill=\"#f5d76e\" fill-opacity=\"0.5\"/>\n";
    }
    out += "<path class=\"axis\" d=\"M " + num(left) + " " + num(top) + " L " + num(left) + " " + num(height - bottom) +
           " L " + num(width - right) + " " + num(height - bottom) + "\" fill=\"none\" stroke=\"black\"/>\n";
    std::string d;
    for (std::size_t i = 0; i < vp.size(); ++i) d += (i ? " L " : "M ") + px(vp.time(i)) + " " + py(vp.speed[i]);
    out += "<path class=\"speed\" d=\"" + d + "\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.2\"/>\n";
    for (const auto& p : kin.peaks)
        out += "<circle class=\"peak\" cx=\"" + px(p.time) + "\" cy=\"" + py(p.height) + "\" r=\"3\" fill=\"#c0392b\"/>\n";
    out += "<text x=\"" + num(left) + "\" y=\"" + num(height - 12) + "\" font-family=\"sans-serif\" font-size=\"12\">" +
           xml_escape(session.subject_id) + " " + std::string(to_string(session.task)) + " speed (mm/s) over " +
           num(t1 - t0) + " s, peak " + num(vmax) + " mm/s</text>\n";
    out += "</svg>\n";
    return out;
}

}  // namespace grapho
