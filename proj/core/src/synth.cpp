#include "grapho/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "grapho/config.hpp"
#include "grapho/error.hpp"
#include "text_util.hpp"

namespace grapho {

namespace {

constexpr double kPi = 3.14159265358979323846;

double deg(double d) { return d * kPi / 180.0; }

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Stratified draws on [-j, j]: one value per stratum, strata in random order.
std::vector<double> stratified_jitter(std::mt19937_64& rng, std::size_t n, double j) {
    std::vector<double> out(n, 0.0);
    if (n == 0 || j == 0.0) return out;
    std::vector<std::size_t> strata(n);
    for (std::size_t i = 0; i < n; ++i) strata[i] = i;
    for (std::size_t i = n - 1; i > 0; --i) {
        auto k = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(i + 1));
        std::swap(strata[i], strata[std::min(k, i)]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (static_cast<double>(strata[i]) + unit_uniform(rng)) / static_cast<double>(n);
        out[i] = -j + 2.0 * j * u;
    }
    return out;
}

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::pair<std::vector<ArcPiece>, std::vector<ArcPiece>> split_at(const std::vector<ArcPiece>& pieces, double at) {
    std::vector<ArcPiece> before, after;
    double acc = 0.0;
    for (const auto& p : pieces) {
        if (acc + p.length <= at + 1e-12) {
            before.push_back(p);
        } else if (acc >= at) {
            after.push_back(p);
        } else {
            const double f = (at - acc) / p.length;
            const double mid = p.heading_start + (p.heading_end - p.heading_start) * f;
            before.push_back({p.heading_start, mid, p.length * f});
            after.push_back({mid, p.heading_end, p.length * (1.0 - f)});
        }
        acc += p.length;
    }
    return {before, after};
}

double total_length(const std::vector<ArcPiece>& pieces) {
    double s = 0.0;
    for (const auto& p : pieces) s += p.length;
    return s;
}

struct Letter {
    std::vector<ArcPiece> rise;  // from the letter start up to the apex
    std::vector<ArcPiece> fall;  // from the apex back down to the start height
};

Letter cursive_letter(double height) {
    const double rb = 3.0;
    const double rc = 0.2 * height;
    const double bottom_from = deg(250), bottom_to = deg(390);
    const double up_from = deg(30), up_to = deg(70);
    const double cap1_to = deg(130), cap2_from = deg(180), down = deg(250);

    const double lift_bottom = rb * (1.0 - std::cos(up_from));
    const double lift_cap = rc * (std::cos(up_to) - std::cos(cap1_to));
    const double lift_per_mm = (std::cos(up_from) - std::cos(up_to)) / (up_to - up_from);
    const double up_len = (height - lift_bottom - lift_cap) / lift_per_mm;
    if (!(up_len > 0.0)) throw Error("SCHEMA", "letter height too small for the loop geometry");

    Letter l;
    l.rise = {{bottom_from, bottom_to, rb * (bottom_to - bottom_from)},
              {up_from, up_to, up_len},
              {up_to, cap1_to, rc * (cap1_to - up_to)}};
    l.fall = {{cap2_from, down, rc * (down - cap2_from)}};
    double dy = 0.0;
    for (const auto& p : l.rise) dy += arc_displacement(p).y;
    dy += arc_displacement(l.fall.front()).y;
    l.fall.push_back({down, down, dy / -std::sin(down)});
    return l;
}

}  // namespace

double lognormal_speed(const PulseParams& p, double t) {
    const double x = t - p.t0;
    if (!(x > 0.0)) return 0.0;
    const double z = (std::log(x) - p.mu) / p.sigma;
    return p.D * std::exp(-0.5 * z * z) / (p.sigma * x * std::sqrt(2.0 * kPi));
}

double lognormal_progress(const PulseParams& p, double t) {
    const double x = t - p.t0;
    if (!(x > 0.0)) return 0.0;
    return 0.5 * std::erfc(-(std::log(x) - p.mu) / (p.sigma * std::sqrt(2.0)));
}

Point arc_displacement(const ArcPiece& piece) {
    const double sweep = piece.heading_end - piece.heading_start;
    if (std::abs(sweep) < 1e-12)
        return {piece.length * std::cos(piece.heading_start), piece.length * std::sin(piece.heading_start)};
    const double r = piece.length / sweep;
    return {r * (std::sin(piece.heading_end) - std::sin(piece.heading_start)),
            r * (std::cos(piece.heading_start) - std::cos(piece.heading_end))};
}

ArcPath::ArcPath(std::vector<ArcPiece> pieces, Point start) : pieces_(std::move(pieces)) {
    Point p = start;
    for (const auto& piece : pieces_) {
        offsets_.push_back(total_);
        starts_.push_back(p);
        const auto d = arc_displacement(piece);
        p.x += d.x;
        p.y += d.y;
        total_ += piece.length;
    }
    if (pieces_.empty()) starts_.push_back(start);
}

Point ArcPath::at(double s) const {
    if (pieces_.empty()) return starts_.front();
    s = std::clamp(s, 0.0, total_);
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), s);
    std::size_t k = static_cast<std::size_t>(std::distance(offsets_.begin(), it));
    k = k == 0 ? 0 : k - 1;
    const auto& piece = pieces_[k];
    const double u = std::min(s - offsets_[k], piece.length);
    const double frac = piece.length > 0.0 ? u / piece.length : 0.0;
    const ArcPiece part{piece.heading_start, piece.heading_start + (piece.heading_end - piece.heading_start) * frac, u};
    const auto d = arc_displacement(part);
    return {starts_[k].x + d.x, starts_[k].y + d.y};
}

PatternSpec default_spec(TaskKind task) {
    PatternSpec s;
    s.task = task;
    switch (task) {
        case TaskKind::Circle:
            s.n_units = 12;
            s.period = 0.28;
            s.scale_mm = 40.0;
            break;
        case TaskKind::Square:
            s.n_units = 12;
            s.period = 0.28;
            s.scale_mm = 40.0;
            break;
        case TaskKind::Elel:
            s.n_units = 3;
            s.period = 0.55;
            s.scale_mm = 16.0;
            break;
    }
    return s;
}

void check_spec(const PatternSpec& s) {
    auto bad = [](const std::string& msg) { throw Error("SCHEMA", msg); };
    if (s.n_units < 1) bad("n_units must be at least 1");
    if (s.n_units > 10000) bad("n_units is unreasonably large");
    if (!(s.period > 0.0) || !std::isfinite(s.period)) bad("period must be positive");
    for (double j : {s.time_jitter, s.amp_jitter, s.pause_jitter})
        if (!(j >= 0.0 && j < 1.0)) bad("jitters must lie in [0, 1)");
    if (!(s.pause_base >= 0.0) || !std::isfinite(s.pause_base)) bad("pause_base must be non-negative");
    if (!(s.scale_mm > 0.0) || s.scale_mm > 400.0) bad("scale_mm must lie in (0, 400]");
    if (!(s.pulse_sigma > 0.0) || !std::isfinite(s.pulse_sigma)) bad("pulse_sigma must be positive");
    if (!(s.pulse_width > 0.0) || !std::isfinite(s.pulse_width)) bad("pulse_width must be positive");
    if (!(s.rate > 0.0) || !std::isfinite(s.rate)) bad("rate must be positive");
    if (!std::isfinite(s.rotation_deg)) bad("rotation_deg must be finite");
    if (s.task == TaskKind::Square && s.n_units % 4 != 0) bad("square n_units must be a multiple of 4");
    if (s.task == TaskKind::Elel && s.scale_mm < 6.0) bad("elel scale_mm must be at least 6");
}

std::vector<std::vector<ArcPiece>> cursive_pulses(const std::vector<double>& letter_heights) {
    if (letter_heights.empty()) throw Error("SCHEMA", "need at least one letter");
    std::vector<std::vector<ArcPiece>> segments;
    std::vector<ArcPiece> current;
    for (double h : letter_heights) {
        auto letter = cursive_letter(h);
        current.insert(current.end(), letter.rise.begin(), letter.rise.end());
        segments.push_back(current);
        current = letter.fall;
    }
    current.push_back({deg(250), deg(300), 3.0 * deg(50)});
    segments.push_back(current);

    std::vector<std::vector<ArcPiece>> pulses{segments.front()};
    for (std::size_t i = 1; i + 1 < segments.size(); ++i) {
        auto [a, b] = split_at(segments[i], 0.5 * total_length(segments[i]));
        pulses.push_back(a);
        pulses.push_back(b);
    }
    pulses.push_back(segments.back());
    return pulses;
}

std::vector<std::vector<ArcPiece>> pulse_geometry(const PatternSpec& spec) {
    check_spec(spec);
    std::vector<std::vector<ArcPiece>> pulses;
    const double rot = deg(spec.rotation_deg);
    switch (spec.task) {
        case TaskKind::Circle: {
            const int n = spec.n_units;
            const double sweep = 2.0 * kPi / n;
            const double len = kPi * spec.scale_mm / n;
            for (int i = 0; i < n; ++i)
                pulses.push_back({{kPi + rot + sweep * i, kPi + rot + sweep * (i + 1), len}});
            break;
        }
        case TaskKind::Square: {
            const int per_side = spec.n_units / 4;
            const double len = spec.scale_mm / per_side;
            for (int side = 0; side < 4; ++side) {
                const double heading = 1.5 * kPi + rot + 0.5 * kPi * side;
                for (int i = 0; i < per_side; ++i) pulses.push_back({{heading, heading, len}});
            }
            break;
        }
        case TaskKind::Elel: {
            std::vector<double> heights;
            for (int i = 0; i < spec.n_units; ++i) {
                heights.push_back(0.5 * spec.scale_mm);
                heights.push_back(spec.scale_mm);
            }
            pulses = cursive_pulses(heights);
            for (auto& pulse : pulses)
                for (auto& piece : pulse) {
                    piece.heading_start += rot;
                    piece.heading_end += rot;
                }
            break;
        }
    }
    return pulses;
}

SynthPlan plan_session(const PatternSpec& spec) {
    auto geometry = pulse_geometry(spec);
    const std::size_t n = geometry.size();
    std::mt19937_64 rng(spec.seed);
    const auto tj = stratified_jitter(rng, n, spec.time_jitter);
    const auto aj = stratified_jitter(rng, n, spec.amp_jitter);
    const auto pj = stratified_jitter(rng, n, spec.pause_jitter);

    SynthPlan plan;
    const double mu = std::log(spec.pulse_width * spec.period);
    std::vector<ArcPiece> all;
    double onset = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        PulseParams p;
        p.t0 = onset;
        p.mu = mu;
        p.sigma = spec.pulse_sigma;
        p.D = 0.0;
        for (auto piece : geometry[k]) {
            piece.length *= 1.0 + aj[k];
            p.D += piece.length;
            all.push_back(piece);
        }
        p.theta_start = geometry[k].front().heading_start;
        p.theta_end = geometry[k].back().heading_end;
        plan.pulses.push_back(p);
        onset += spec.period * (1.0 + tj[k]) + spec.pause_base * (1.0 + pj[k]);
    }
    plan.path = ArcPath(std::move(all), spec.origin);
    for (const auto& p : plan.pulses)
        plan.t_end = std::max(plan.t_end, p.t0 + std::exp(p.mu + 3.5 * p.sigma));
    return plan;
}

Session generate_session(const PatternSpec& spec) {
    const auto plan = plan_session(spec);
    Session session;
    session.subject_id = spec.subject_id;
    session.group_label = spec.group_label;
    session.task = spec.task;
    session.device_note = "synth";
    Stroke stroke;
    const auto count = static_cast<std::size_t>(std::floor(plan.t_end * spec.rate)) + 1;
    stroke.samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / spec.rate;
        double s = 0.0;
        for (const auto& p : plan.pulses) s += p.D * lognormal_progress(p, t);
        const auto pos = plan.path.at(s);
        stroke.samples.push_back({t, pos.x, pos.y, true});
    }
    session.strokes.push_back(std::move(stroke));
    return session;
}

const PatternSpec& CohortSpec::spec_for(TaskKind task) const {
    switch (task) {
        case TaskKind::Circle: return circle;
        case TaskKind::Square: return square;
        case TaskKind::Elel: return elel;
    }
    return circle;
}

PatternSpec& CohortSpec::spec_for(TaskKind task) {
    return const_cast<PatternSpec&>(static_cast<const CohortSpec&>(*this).spec_for(task));
}

namespace {

void apply_pattern_key(PatternSpec& s, const std::string& key, const KeyValue& kv) {
    if (key == "n_units") {
        s.n_units = static_cast<int>(std::clamp<long long>(kv_int(kv), -1, 1000000));
    } else if (key == "period") {
        s.period = kv_double(kv);
    } else if (key == "time_jitter") {
        s.time_jitter = kv_double(kv);
    } else if (key == "amp_jitter") {
        s.amp_jitter = kv_double(kv);
    } else if (key == "pause_base") {
        s.pause_base = kv_double(kv);
    } else if (key == "pause_jitter") {
        s.pause_jitter = kv_double(kv);
    } else if (key == "scale_mm") {
        s.scale_mm = kv_double(kv);
    } else if (key == "pulse_sigma") {
        s.pulse_sigma = kv_double(kv);
    } else if (key == "pulse_width") {
        s.pulse_width = kv_double(kv);
    } else if (key == "rotation_deg") {
        s.rotation_deg = kv_double(kv);
    } else {
        throw Error("SCHEMA", "unknown key '" + kv.key + "'", kv.line);
    }
}

}  // namespace

CohortSpec parse_cohort_spec(std::string_view text) {
    CohortSpec spec;
    const auto entries = parse_key_values(text);
    std::vector<const KeyValue*> scoped;
    for (const auto& kv : entries) {
        if (kv.key.find('.') != std::string::npos) {
            scoped.push_back(&kv);
            continue;
        }
        if (kv.key == "subjects") {
            const auto n = kv_int(kv);
            if (n < 1 || n > 10000) throw Error("SCHEMA", "subjects must lie in [1, 10000]", kv.line);
            spec.subjects = static_cast<int>(n);
        } else if (kv.key == "subject_prefix") {
            if (kv.value.empty() || kv.value.find_first_of(" \t=") != std::string::npos)
                throw Error("SCHEMA", "subject_prefix must be a token", kv.line);
            spec.subject_prefix = kv.value;
        } else if (kv.key == "group") {
            if (kv.value.find_first_of(" \t=") != std::string::npos)
                throw Error("SCHEMA", "group must be a token", kv.line);
            spec.group_label = kv.value.empty() ? std::nullopt : std::optional<std::string>(kv.value);
        } else if (kv.key == "seed") {
            const auto v = kv_int(kv);
            if (v < 0) throw Error("SCHEMA", "seed must be non-negative", kv.line);
            spec.seed = static_cast<std::uint64_t>(v);
        } else if (kv.key == "tasks") {
            spec.tasks.clear();
            for (auto name : detail::split(kv.value, ',')) {
                auto task = parse_task(detail::trim(name));
                if (!task) throw Error("SCHEMA", "unknown task '" + std::string(name) + "'", kv.line);
                if (std::find(spec.tasks.begin(), spec.tasks.end(), *task) == spec.tasks.end()) spec.tasks.push_back(*task);
            }
        } else {
            for (auto task : kAllTasks) apply_pattern_key(spec.spec_for(task), kv.key, kv);
        }
    }
    for (const auto* kv : scoped) {
        const auto dot = kv->key.find('.');
        auto task = parse_task(kv->key.substr(0, dot));
        if (!task) throw Error("SCHEMA", "unknown task prefix in '" + kv->key + "'", kv->line);
        apply_pattern_key(spec.spec_for(*task), kv->key.substr(dot + 1), *kv);
    }
    for (auto task : spec.tasks) {
        try {
            check_spec(spec.spec_for(task));
        } catch (const Error& e) {
            throw Error("SCHEMA", std::string(to_string(task)) + ": " + e.what());
        }
    }
    return spec;
}

std::vector<Session> generate_cohort(const CohortSpec& spec) {
    std::vector<Session> out;
    const int width = static_cast<int>(std::to_string(spec.subjects).size());
    for (int i = 0; i < spec.subjects; ++i) {
        std::string num = std::to_string(i + 1);
        std::string id = spec.subject_prefix + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(num.size()))), '0') + num;
        for (auto task : spec.tasks) {
            PatternSpec ps = spec.spec_for(task);
            ps.task = task;
            ps.subject_id = id;
            ps.group_label = spec.group_label;
            ps.seed = mix_seed(spec.seed * 1000003ULL + static_cast<std::uint64_t>(i) * 3ULL + static_cast<std::uint64_t>(task));
            out.push_back(generate_session(ps));
        }
    }
    return out;
}

}  // namespace grapho
