#include "grapho/shape_scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "grapho/error.hpp"

namespace grapho {

namespace {

constexpr double kPi = 3.14159265358979323846;

double to_deg(double r) { return r * 180.0 / kPi; }

Point sub(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point a) { return std::hypot(a.x, a.y); }
double dist(Point a, Point b) { return norm(sub(a, b)); }
double signed_angle(Point a, Point b) { return std::atan2(cross(a, b), dot(a, b)); }

double fold_line_angle(double deg) {
    double a = std::fmod(deg, 180.0);
    if (a < 0) a += 180.0;
    return a;
}

double from_horizontal(double line_deg) {
    const double a = fold_line_angle(line_deg);
    return a > 90.0 ? 180.0 - a : a;
}

Point lerp(Point a, Point b, double w) { return {a.x * (1.0 - w) + b.x * w, a.y * (1.0 - w) + b.y * w}; }

struct LineFit {
    Point centroid;
    Point direction;
    double max_deviation = 0.0;
};

LineFit fit_line(const std::vector<Point>& pts) {
    LineFit f;
    if (pts.empty()) return f;
    for (const auto& p : pts) {
        f.centroid.x += p.x;
        f.centroid.y += p.y;
    }
    f.centroid.x /= static_cast<double>(pts.size());
    f.centroid.y /= static_cast<double>(pts.size());
    double sxx = 0, syy = 0, sxy = 0;
    for (const auto& p : pts) {
        const auto d = sub(p, f.centroid);
        sxx += d.x * d.x;
        syy += d.y * d.y;
        sxy += d.x * d.y;
    }
    const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    f.direction = {std::cos(theta), std::sin(theta)};
    if (dot(sub(pts.back(), pts.front()), f.direction) < 0) f.direction = {-f.direction.x, -f.direction.y};
    for (const auto& p : pts) f.max_deviation = std::max(f.max_deviation, std::abs(cross(sub(p, f.centroid), f.direction)));
    return f;
}

double principal_axis_deg(const std::vector<Point>& pts) {
    const auto f = fit_line(pts);
    return to_deg(std::atan2(f.direction.y, f.direction.x));
}

std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end(), [](Point a, Point b) { return a.x == b.x && a.y == b.y; }), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(sub(hull[k - 1], hull[k - 2]), sub(p, hull[k - 2])) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        const auto& p = pts[i];
        while (k >= lower && cross(sub(hull[k - 1], hull[k - 2]), sub(p, hull[k - 2])) <= 0) --k;
        hull[k++] = p;
    }
    hull.resize(k - 1);
    return hull;
}

std::pair<double, double> feret_diameters(const std::vector<Point>& pts) {
    const auto hull = convex_hull(pts);
    double fmax = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i)
        for (std::size_t j = i + 1; j < hull.size(); ++j) fmax = std::max(fmax, dist(hull[i], hull[j]));
    if (hull.size() < 3) return {fmax, 0.0};
    double fmin = INFINITY;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto a = hull[i];
        const auto b = hull[(i + 1) % hull.size()];
        const double len = dist(a, b);
        if (len <= 0) continue;
        double width = 0.0;
        for (const auto& p : hull) width = std::max(width, std::abs(cross(sub(b, a), sub(p, a))) / len);
        fmin = std::min(fmin, width);
    }
    return {fmax, std::isfinite(fmin) ? fmin : 0.0};
}

Point point_at(const ArcTrace& tr, double s) {
    const auto& a = tr.arclength;
    s = std::clamp(s, 0.0, a.back());
    auto it = std::upper_bound(a.begin(), a.end(), s);
    std::size_t j = it == a.begin() ? 0 : static_cast<std::size_t>(std::distance(a.begin(), it)) - 1;
    if (j + 1 >= a.size()) return tr.points.back();
    const double span = a[j + 1] - a[j];
    return lerp(tr.points[j], tr.points[j + 1], span > 0 ? (s - a[j]) / span : 0.0);
}

double time_to_arclength(const UniformTrace& trace, const std::vector<double>& cum, double t) {
    const double u = (t - trace.t0) / trace.dt;
    if (u <= 0) return 0.0;
    const auto j = static_cast<std::size_t>(std::floor(u));
    if (j + 1 >= cum.size()) return cum.back();
    return cum[j] + (cum[j + 1] - cum[j]) * (u - static_cast<double>(j));
}

Point trace_position(const UniformTrace& trace, double t) {
    const double u = std::clamp((t - trace.t0) / trace.dt, 0.0, static_cast<double>(trace.size() - 1));
    const auto j = std::min(static_cast<std::size_t>(std::floor(u)), trace.size() - 1);
    if (j + 1 >= trace.size()) return {trace.x.back(), trace.y.back()};
    const double w = u - static_cast<double>(j);
    return lerp({trace.x[j], trace.y[j]}, {trace.x[j + 1], trace.y[j + 1]}, w);
}

ArcTrace build_arc_trace(const StrokeKinematics& sk, const ShapeConfig& cfg) {
    const auto& tr = sk.trace;
    const std::size_t n = tr.size();
    std::vector<double> cum(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) cum[j] = cum[j - 1] + std::hypot(tr.x[j] - tr.x[j - 1], tr.y[j] - tr.y[j - 1]);

    ArcTrace out;
    out.stroke = sk.stroke_index;
    out.step = cfg.arc_step_mm;
    const double total = cum.back();
    std::size_t j = 0;
    auto emit = [&](double s) {
        while (j + 2 < n && cum[j + 1] < s) ++j;
        const double span = cum[j + 1] - cum[j];
        const double w = span > 0 ? std::clamp((s - cum[j]) / span, 0.0, 1.0) : 0.0;
        out.points.push_back(lerp({tr.x[j], tr.y[j]}, {tr.x[j + 1], tr.y[j + 1]}, w));
        out.times.push_back(tr.time(j) + w * tr.dt);
        out.arclength.push_back(s);
    };
    const auto steps = static_cast<std::size_t>(std::floor(total / out.step));
    for (std::size_t i = 0; i <= steps; ++i) emit(static_cast<double>(i) * out.step);
    if (total - out.arclength.back() > 1e-9) emit(total);
    if (out.points.size() == 1) {
        out.points.push_back(out.points.front());
        out.times.push_back(tr.time(n - 1));
        out.arclength.push_back(total);
    }

    for (double tc : sk.corner_times) out.corner_arclength.push_back(time_to_arclength(tr, cum, tc));

    const std::size_t m = out.points.size();
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.curvature_stencil_mm / out.step)));
    out.curvature.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t kk = std::min({k, i, m - 1 - i});
        if (kk == 0) continue;
        const auto back = sub(out.points[i], out.points[i - kk]);
        const auto fwd = sub(out.points[i + kk], out.points[i]);
        const double span = 0.5 * (out.arclength[i + kk] - out.arclength[i - kk]);
        if (span > 0) out.curvature[i] = signed_angle(back, fwd) / span;
    }
    return out;
}

struct Turning {
    double rounded = 0.0;
    double net = 0.0;
};

Turning turning(const ArcTrace& tr, const ShapeConfig& cfg) {
    Turning t;
    double run = 0.0;
    const auto& p = tr.points;
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
        const auto a = sub(p[i], p[i - 1]);
        const auto b = sub(p[i + 1], p[i]);
        if (norm(a) == 0 || norm(b) == 0) continue;
        const double d = signed_angle(a, b);
        t.net += d;
        if (std::abs(tr.curvature[i]) > cfg.spike_curvature) {
            run = 0.0;
            continue;
        }
        run += d;
        t.rounded = std::max(t.rounded, std::abs(run));
    }
    t.rounded = to_deg(t.rounded);
    t.net = to_deg(t.net);
    return t;
}

void straight_runs(const ArcTrace& tr, const ShapeConfig& cfg, std::vector<StraightRun>& out) {
    const std::size_t m = tr.points.size();
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.curvature_stencil_mm / tr.step)));
    std::size_t i = 0;
    while (i < m) {
        if (!(std::abs(tr.curvature[i]) < cfg.straight_curvature)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < m && std::abs(tr.curvature[j + 1]) < cfg.straight_curvature) ++j;
        const std::size_t a = i >= k ? i - k : 0;
        const std::size_t b = std::min(m - 1, j + k);
        const double len = tr.arclength[b] - tr.arclength[a];
        if (len >= cfg.straight_min_mm) {
            const auto d = sub(tr.points[b], tr.points[a]);
            out.push_back({len, fold_line_angle(to_deg(std::atan2(d.y, d.x)))});
        }
        i = j + 1;
    }
}

bool segments_cross(Point p1, Point p2, Point q1, Point q2, double& tp) {
    const auto r = sub(p2, p1);
    const auto s = sub(q2, q1);
    const double denom = cross(r, s);
    if (denom == 0.0) return false;
    const auto qp = sub(q1, p1);
    const double t = cross(qp, s) / denom;
    const double u = cross(qp, r) / denom;
    if (t < 0.0 || t >= 1.0 || u < 0.0 || u >= 1.0) return false;
    tp = t;
    return true;
}

void find_loops(const ArcTrace& tr, const ShapeConfig& cfg, std::vector<Loop>& out) {
    const auto& p = tr.points;
    const std::size_t m = p.size();
    if (m < 4) return;
    struct Hit {
        std::size_t i, j;
    };
    std::vector<Hit> hits;
    const auto min_span = static_cast<std::size_t>(std::ceil(cfg.min_loop_mm / tr.step));
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double minx = std::min(p[i].x, p[i + 1].x), maxx = std::max(p[i].x, p[i + 1].x);
        const double miny = std::min(p[i].y, p[i + 1].y), maxy = std::max(p[i].y, p[i + 1].y);
        for (std::size_t j = i + std::max<std::size_t>(2, min_span); j + 1 < m; ++j) {
            if (std::max(p[j].x, p[j + 1].x) < minx || std::min(p[j].x, p[j + 1].x) > maxx ||
                std::max(p[j].y, p[j + 1].y) < miny || std::min(p[j].y, p[j + 1].y) > maxy)
                continue;
            double t = 0;
            if (segments_cross(p[i], p[i + 1], p[j], p[j + 1], t)) hits.push_back({i, j});
        }
    }
    std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.j - a.i < b.j - b.i; });
    std::vector<Hit> kept;
    for (const auto& h : hits) {
        bool overlaps = false;
        for (const auto& k : kept)
            if (!(h.j < k.i || h.i > k.j)) {
                overlaps = true;
                break;
            }
        if (!overlaps) kept.push_back(h);
    }
    std::sort(kept.begin(), kept.end(), [](const Hit& a, const Hit& b) { return a.i < b.i; });

    std::vector<std::size_t> apex_idx;
    for (const auto& h : kept) {
        std::size_t best = h.i + 1;
        for (std::size_t q = h.i + 1; q <= h.j; ++q)
            if (p[q].y > p[best].y) best = q;
        apex_idx.push_back(best);
    }
    for (std::size_t n = 0; n < kept.size(); ++n) {
        const std::size_t lo = n == 0 ? 0 : apex_idx[n - 1];
        const std::size_t hi = n + 1 < kept.size() ? apex_idx[n + 1] : m - 1;
        std::size_t low = lo;
        for (std::size_t q = lo; q <= hi; ++q)
            if (p[q].y < p[low].y) low = q;
        std::size_t before = lo;
        for (std::size_t q = lo; q <= apex_idx[n]; ++q)
            if (p[q].y < p[before].y) before = q;
        Loop loop;
        loop.apex = p[apex_idx[n]];
        loop.apex_y = loop.apex.y;
        loop.base_y = p[low].y;
        loop.height = loop.apex_y - loop.base_y;
        loop.time = tr.times[apex_idx[n]];
        loop.t_start = tr.times[kept[n].i];
        loop.t_end = tr.times[kept[n].j + 1];
        loop.base = p[before];
        loop.stroke = tr.stroke;
        if (loop.height > 0.0) out.push_back(loop);
    }
}

void add_corner(std::vector<Corner>& out, const ArcTrace& in_tr, double s_in, const ArcTrace& out_tr, double s_out,
                double time, double min_turn_deg, bool require_turn) {
    const double reach_in = std::min(8.0, s_in);
    const double reach_out = std::min(8.0, out_tr.length() - s_out);
    if (reach_in < 1.5 || reach_out < 1.5) return;
    const auto a = sub(point_at(in_tr, s_in - 0.25 * reach_in), point_at(in_tr, s_in - reach_in));
    const auto b = sub(point_at(out_tr, s_out + reach_out), point_at(out_tr, s_out + 0.25 * reach_out));
    const double turn = std::abs(to_deg(signed_angle(a, b)));
    if (require_turn && turn < min_turn_deg) return;
    out.push_back({time, 180.0 - turn, point_at(in_tr, s_in)});
}

double baseline_from_points(const std::vector<Point>& pts, const std::vector<Point>& fallback) {
    if (pts.size() >= 2) {
        double mx = 0, my = 0;
        for (const auto& q : pts) {
            mx += q.x;
            my += q.y;
        }
        mx /= static_cast<double>(pts.size());
        my /= static_cast<double>(pts.size());
        double sxx = 0, sxy = 0;
        for (const auto& q : pts) {
            sxx += (q.x - mx) * (q.x - mx);
            sxy += (q.x - mx) * (q.y - my);
        }
        if (sxx > 1e-9) return from_horizontal(to_deg(std::atan(sxy / sxx)));
    }
    return from_horizontal(principal_axis_deg(fallback));
}

ShapeScore make_score(TaskKind task, const std::vector<int>& bits) {
    ShapeScore s;
    s.task = task;
    const auto names = shape_item_names(task);
    for (std::size_t i = 0; i < names.size(); ++i) {
        s.items.emplace_back(names[i], bits[i] ? 1 : 0);
        s.total += bits[i] ? 1 : 0;
    }
    return s;
}

void require_task(const ShapeAnalysis& a, TaskKind want) {
    if (a.task != want)
        throw Error("TASK", "expected a " + std::string(to_string(want)) + " session, got " + std::string(to_string(a.task)));
}

}  // namespace

std::vector<std::string> shape_item_names(TaskKind task) {
    std::vector<std::string> names{"GeneralCopy", "MotorA", "MotorB", "GlobalC", "GlobalD"};
    if (task == TaskKind::Square) {
        names.push_back("LocalE");
        names.push_back("LocalF");
    }
    return names;
}

int ShapeScore::item(const std::string& name) const {
    for (const auto& [n, v] : items)
        if (n == name) return v;
    throw Error("SCHEMA", "no rubric item named " + name);
}

ShapeAnalysis analyze_shape(const Session& session, SessionKinematics kinematics, const ShapeConfig& cfg) {
    ShapeAnalysis a;
    a.task = session.task;
    a.kinematics = std::move(kinematics);
    for (const auto& sk : a.kinematics.strokes) a.traces.push_back(build_arc_trace(sk, cfg));

    auto& g = a.geometry;
    std::vector<Point> all;
    for (const auto& tr : a.traces) {
        all.insert(all.end(), tr.points.begin(), tr.points.end());
        g.perimeter += tr.length();
    }
    std::tie(g.feret_max, g.feret_min) = feret_diameters(all);
    if (g.feret_max < cfg.degenerate_extent_mm)
        throw Error("DEGENERATE", "trace extent below " + std::to_string(cfg.degenerate_extent_mm) + " mm");
    g.closure_gap = dist(a.traces.front().points.front(), a.traces.back().points.back());

    for (const auto& tr : a.traces) {
        const auto t = turning(tr, cfg);
        g.rounded_turn_deg = std::max(g.rounded_turn_deg, t.rounded);
        g.net_turn_deg += t.net;
        straight_runs(tr, cfg, g.straight_runs);
        find_loops(tr, cfg, g.loops);
    }
    std::stable_sort(g.loops.begin(), g.loops.end(), [](const Loop& x, const Loop& y) { return x.t_start < y.t_start; });

    const double join_tol = std::max(3.0, 0.05 * g.perimeter);
    for (std::size_t k = 0; k < a.traces.size(); ++k) {
        const auto& tr = a.traces[k];
        const auto& sk = a.kinematics.strokes[k];
        for (std::size_t c = 0; c < tr.corner_arclength.size(); ++c)
            add_corner(g.corners, tr, tr.corner_arclength[c], tr, tr.corner_arclength[c], sk.corner_times[c], 0.0, false);
        const auto& next = a.traces[(k + 1) % a.traces.size()];
        if (dist(tr.points.back(), next.points.front()) <= join_tol && (k + 1 < a.traces.size() || g.closure_gap <= join_tol))
            add_corner(g.corners, tr, tr.length(), next, 0.0, tr.times.back(), 30.0, true);
    }

    if (a.task == TaskKind::Elel) {
        std::vector<Point> bases;
        for (const auto& l : g.loops) bases.push_back(l.base);
        g.baseline_angle = baseline_from_points(bases, all);
    } else if (a.task == TaskKind::Square) {
        const auto fit = fit_square(a, cfg);
        g.baseline_angle = fit.quad ? fit.bottom_angle : from_horizontal(principal_axis_deg(all));
    } else {
        g.baseline_angle = from_horizontal(principal_axis_deg(all));
    }
    return a;
}

ShapeAnalysis analyze_shape(const Session& session, const ShapeConfig& cfg, const KinematicsConfig& kcfg) {
    return analyze_shape(session, analyze_kinematics(session, kcfg), cfg);
}

GeometryReport analyze_geometry(const Session& session, const ShapeConfig& cfg, const KinematicsConfig& kcfg) {
    return analyze_shape(session, cfg, kcfg).geometry;
}

SquareFit fit_square(const ShapeAnalysis& a, const ShapeConfig& cfg) {
    struct Piece {
        std::vector<Point> points;
        std::size_t trace = 0;
        LineFit line;
        double length = 0.0;
    };
    std::vector<Piece> pieces;
    for (std::size_t k = 0; k < a.traces.size(); ++k) {
        const auto& tr = a.traces[k];
        std::vector<double> cuts{0.0};
        for (double c : tr.corner_arclength)
            if (c > 0.0 && c < tr.length()) cuts.push_back(c);
        cuts.push_back(tr.length());
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            const double lo = cuts[c], hi = cuts[c + 1];
            if (hi - lo < cfg.min_piece_mm) continue;
            Piece p;
            p.trace = k;
            p.length = hi - lo;
            p.points.push_back(point_at(tr, lo));
            for (std::size_t i = 0; i < tr.points.size(); ++i)
                if (tr.arclength[i] > lo && tr.arclength[i] < hi) p.points.push_back(tr.points[i]);
            p.points.push_back(point_at(tr, hi));
            p.line = fit_line(p.points);
            pieces.push_back(std::move(p));
        }
    }

    const double merge_cos = std::cos(cfg.merge_angle_deg * kPi / 180.0);
    auto mergeable = [&](const Piece& x, const Piece& y) {
        if (dot(x.line.direction, y.line.direction) < merge_cos) return false;
        const double off = std::abs(cross(sub(y.points.front(), x.line.centroid), x.line.direction));
        return off <= std::max(3.0, 0.1 * x.length);
    };
    auto absorb = [&](Piece& into, const Piece& from, bool append) {
        if (append)
            into.points.insert(into.points.end(), from.points.begin(), from.points.end());
        else
            into.points.insert(into.points.begin(), from.points.begin(), from.points.end());
        into.length += from.length;
        into.line = fit_line(into.points);
    };

    std::vector<Piece> merged;
    for (auto& p : pieces) {
        if (!merged.empty() && mergeable(merged.back(), p))
            absorb(merged.back(), p, true);
        else
            merged.push_back(std::move(p));
    }
    if (merged.size() >= 2 && mergeable(merged.back(), merged.front()) &&
        dist(merged.back().points.back(), merged.front().points.front()) <= std::max(3.0, 0.1 * merged.front().length)) {
        absorb(merged.front(), merged.back(), false);
        merged.pop_back();
    }

    SquareFit fit;
    std::vector<const Piece*> side_pieces;
    for (const auto& p : merged) {
        if (p.length >= cfg.min_side_mm && p.line.max_deviation <= cfg.side_straightness * p.length) {
            side_pieces.push_back(&p);
            fit.sides.push_back({p.line.centroid, p.line.direction, p.length, 0});
        } else {
            ++fit.extra_elements;
        }
    }

    auto side_distance = [&](const Piece& p, Point q) {
        double best = INFINITY;
        for (std::size_t i = 0; i + 1 < p.points.size(); ++i) {
            const auto ab = sub(p.points[i + 1], p.points[i]);
            const double l2 = dot(ab, ab);
            const double w = l2 > 0 ? std::clamp(dot(sub(q, p.points[i]), ab) / l2, 0.0, 1.0) : 0.0;
            best = std::min(best, dist(q, lerp(p.points[i], p.points[i + 1], w)));
        }
        return best;
    };
    if (!fit.sides.empty()) {
        for (std::size_t k = 0; k + 1 < a.traces.size(); ++k) {
            const Point mid = lerp(a.traces[k].points.back(), a.traces[k + 1].points.front(), 0.5);
            std::size_t best = 0;
            double best_d = INFINITY;
            for (std::size_t s = 0; s < side_pieces.size(); ++s) {
                const double d = side_distance(*side_pieces[s], mid);
                if (d < best_d) {
                    best_d = d;
                    best = s;
                }
            }
            ++fit.sides[best].interruptions;
        }
    }

    if (fit.sides.size() != 4) return fit;
    const double parallel_tol = std::sin(20.0 * kPi / 180.0);
    fit.corners.resize(4);
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& s1 = fit.sides[i];
        const auto& s2 = fit.sides[(i + 1) % 4];
        const double den = cross(s1.direction, s2.direction);
        if (std::abs(den) < parallel_tol) return fit;
        const double t = cross(sub(s2.centroid, s1.centroid), s2.direction) / den;
        fit.corners[i] = {s1.centroid.x + t * s1.direction.x, s1.centroid.y + t * s1.direction.y};
    }
    fit.quad = true;
    double lowest = INFINITY;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto a0 = fit.corners[(i + 3) % 4];
        const auto a1 = fit.corners[i];
        const auto a2 = fit.corners[(i + 1) % 4];
        fit.side_lengths.push_back(dist(a0, a1));
        const auto u = sub(a0, a1), v = sub(a2, a1);
        fit.interior_angles.push_back(to_deg(std::abs(signed_angle(u, v))));

        const auto& side = fit.sides[i];
        const double pa = dot(sub(a0, side.centroid), side.direction);
        const double pb = dot(sub(a1, side.centroid), side.direction);
        const double lo = std::min(pa, pb), hi = std::max(pa, pb);
        double m0 = INFINITY, m1 = -INFINITY;
        for (const auto& q : side_pieces[i]->points) {
            const double pr = dot(sub(q, side.centroid), side.direction);
            m0 = std::min(m0, pr);
            m1 = std::max(m1, pr);
        }
        fit.gaps.push_back(std::max(0.0, m0 - lo));
        fit.gaps.push_back(std::max(0.0, hi - m1));
        fit.extensions.push_back(std::max(0.0, lo - m0));
        fit.extensions.push_back(std::max(0.0, m1 - hi));

        const double mid_y = 0.5 * (a0.y + a1.y);
        if (mid_y < lowest) {
            lowest = mid_y;
            const auto d = sub(a1, a0);
            fit.bottom_angle = from_horizontal(to_deg(std::atan2(d.y, d.x)));
        }
    }
    return fit;
}

std::vector<bool> classify_loops(const std::vector<Loop>& loops, double tall_ratio) {
    std::vector<bool> tall(loops.size(), false);
    if (loops.empty()) return tall;
    std::vector<double> h;
    for (const auto& l : loops) h.push_back(l.height);
    std::sort(h.begin(), h.end());
    const double lower_median = h[(h.size() - 1) / 2];
    for (std::size_t i = 0; i < loops.size(); ++i) tall[i] = loops[i].height >= tall_ratio * lower_median;
    return tall;
}

std::vector<std::pair<std::size_t, std::size_t>> letter_pairs(const std::vector<Loop>& loops, double tall_ratio) {
    const auto tall = classify_loops(loops, tall_ratio);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i + 1 < loops.size();) {
        if (!tall[i] && tall[i + 1]) {
            pairs.emplace_back(i, i + 1);
            i += 2;
        } else {
            ++i;
        }
    }
    return pairs;
}

ShapeScore score_circle(const ShapeAnalysis& a, const ShapeConfig& cfg) {
    require_task(a, TaskKind::Circle);
    const auto& g = a.geometry;
    const double ratio = g.feret_min > 0 ? g.feret_max / g.feret_min : INFINITY;
    const bool circular = g.rounded_turn_deg >= cfg.circular_turn_deg;
    const bool proportional = ratio <= cfg.circle_ratio_max;
    bool long_straight = false;
    for (const auto& r : g.straight_runs)
        if (r.length >= g.feret_max - 1e-6) long_straight = true;
    return make_score(TaskKind::Circle,
                      {circular && g.closure_gap <= 0.5 * g.perimeter && proportional,
                       g.rounded_turn_deg >= cfg.rounded_turn_deg, !long_straight, circular,
                       g.feret_min >= cfg.circle_min_diameter_mm && proportional});
}

ShapeScore score_square(const ShapeAnalysis& a, const ShapeConfig& cfg) {
    require_task(a, TaskKind::Square);
    const auto fit = fit_square(a, cfg);
    int max_interruptions = 0;
    for (const auto& s : fit.sides) max_interruptions = std::max(max_interruptions, s.interruptions);
    const bool motor_a = !fit.sides.empty() && max_interruptions <= cfg.max_interruptions;
    if (!fit.quad) return make_score(TaskKind::Square, {0, motor_a, 0, 0, 0, fit.sides.size() == 4, 0});

    const auto [mn, mx] = std::minmax_element(fit.side_lengths.begin(), fit.side_lengths.end());
    const double ratio = *mn > 0 ? *mx / *mn : INFINITY;
    const double gap_tol = std::max(3.0, 0.1 * *mn);
    const bool connected = std::all_of(fit.gaps.begin(), fit.gaps.end(), [&](double g) { return g <= gap_tol; });
    const auto extensions = std::count_if(fit.extensions.begin(), fit.extensions.end(),
                                          [&](double e) { return e > cfg.extension_mm; });
    const bool angles_ok = std::all_of(fit.interior_angles.begin(), fit.interior_angles.end(), [&](double ang) {
        return ang >= cfg.angle_min_deg && ang <= cfg.angle_max_deg;
    });
    return make_score(TaskKind::Square,
                      {connected && ratio <= cfg.square_ratio_max, motor_a, extensions < 2,
                       fit.bottom_angle <= cfg.alignment_max_deg, angles_ok, true,
                       fit.extra_elements == 0 && *mx <= cfg.square_side_cap_mm && ratio <= cfg.square_tight_ratio_max});
}

ShapeScore score_elel(const ShapeAnalysis& a, const ShapeConfig& cfg) {
    require_task(a, TaskKind::Elel);
    const auto& g = a.geometry;
    const auto& loops = g.loops;
    const auto tall = classify_loops(loops, cfg.tall_ratio);

    bool chained = loops.size() >= 2;
    for (std::size_t i = 1; i < loops.size(); ++i)
        if (tall[i] == tall[i - 1] || loops[i].stroke != loops[i - 1].stroke) chained = false;

    bool apexes = !loops.empty();
    for (const auto& l : loops) {
        bool matched = false;
        for (const auto& sk : a.kinematics.strokes) {
            if (sk.stroke_index != l.stroke) continue;
            for (double tc : sk.corner_times) {
                if (tc < l.t_start - 0.05 || tc > l.t_end + 0.05) continue;
                if (trace_position(sk.trace, tc).y >= l.apex_y - cfg.apex_band * l.height) matched = true;
            }
        }
        apexes = apexes && matched;
    }

    double tallest = 0.0;
    for (const auto& l : loops) tallest = std::max(tallest, l.height);
    bool long_horizontal = false;
    for (const auto& r : g.straight_runs)
        if (from_horizontal(r.angle_deg) <= cfg.horizontal_tol_deg && r.length > tallest) long_horizontal = true;

    const auto pairs = letter_pairs(loops, cfg.tall_ratio);
    return make_score(TaskKind::Elel, {chained, apexes, !long_horizontal,
                                       static_cast<int>(pairs.size()) >= cfg.min_letter_pairs,
                                       g.baseline_angle <= cfg.baseline_max_deg});
}

ShapeScore score_shape(const ShapeAnalysis& a, const ShapeConfig& cfg) {
    switch (a.task) {
        case TaskKind::Circle: return score_circle(a, cfg);
        case TaskKind::Square: return score_square(a, cfg);
        case TaskKind::Elel: return score_elel(a, cfg);
    }
    return score_circle(a, cfg);
}

ShapeScore score_circle(const Session& s, const ShapeConfig& cfg, const KinematicsConfig& kcfg) {
    if (s.task != TaskKind::Circle) throw Error("TASK", "score_circle needs a circle session");
    return score_circle(analyze_shape(s, cfg, kcfg), cfg);
}

ShapeScore score_square(const Session& s, const ShapeConfig& cfg, const KinematicsConfig& kcfg) {
    if (s.task != TaskKind::Square) throw Error("TASK", "score_square needs a square session");
    return score_square(analyze_shape(s, cfg, kcfg), cfg);
}

ShapeScore score_elel(const Session& s, const ShapeConfig& cfg, const KinematicsConfig& kcfg) {
    if (s.task != TaskKind::Elel) throw Error("TASK", "score_elel needs an elel session");
    return score_elel(analyze_shape(s, cfg, kcfg), cfg);
}

}  // namespace grapho
