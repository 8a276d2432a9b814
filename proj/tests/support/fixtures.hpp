#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "grapho/clustering.hpp"
#include "grapho/session.hpp"
#include "grapho/synth.hpp"

namespace fixtures {

inline constexpr double kPi = std::numbers::pi;

inline grapho::Session make_session(grapho::TaskKind task, std::vector<grapho::Stroke> strokes,
                                    std::string subject = "T1") {
    grapho::Session s;
    s.subject_id = std::move(subject);
    s.task = task;
    s.strokes = std::move(strokes);
    return s;
}

// Constant angular speed circle, starting at the leftmost point and running counter-clockwise.
inline grapho::Stroke circle_stroke(double radius, double omega, double rate, double turns = 1.0,
                                    double cx = 100.0, double cy = 100.0) {
    grapho::Stroke st;
    const double duration = turns * 2.0 * kPi / omega;
    const auto n = static_cast<std::size_t>(std::llround(duration * rate));
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / rate;
        const double a = kPi + omega * t;
        st.samples.push_back({t, cx + radius * std::cos(a), cy + radius * std::sin(a), true});
    }
    return st;
}

inline double min_jerk(double tau) { return tau * tau * tau * (10.0 - 15.0 * tau + 6.0 * tau * tau); }

// Closed polygon drawn side by side; each side follows a minimum-jerk position profile,
// so the pen comes to rest at every vertex.
inline grapho::Stroke polygon_stroke(const std::vector<grapho::Point>& vertices, double side_time, double rate) {
    grapho::Stroke st;
    const auto per_side = static_cast<std::size_t>(std::llround(side_time * rate));
    const std::size_t sides = vertices.size();
    for (std::size_t k = 0; k < sides; ++k) {
        const auto& a = vertices[k];
        const auto& b = vertices[(k + 1) % sides];
        for (std::size_t i = (k == 0 ? 0 : 1); i <= per_side; ++i) {
            const double u = min_jerk(static_cast<double>(i) / static_cast<double>(per_side));
            const double t = static_cast<double>(k * per_side + i) / rate;
            st.samples.push_back({t, a.x + u * (b.x - a.x), a.y + u * (b.y - a.y), true});
        }
    }
    return st;
}

// Rectangle starting at its top-left corner, first side running down, counter-clockwise.
inline std::vector<grapho::Point> rectangle(double width, double height, double rotation_deg = 0.0,
                                            grapho::Point centre = {100.0, 100.0}) {
    std::vector<grapho::Point> v{{-width / 2, height / 2}, {-width / 2, -height / 2}, {width / 2, -height / 2},
                                 {width / 2, height / 2}};
    const double c = std::cos(rotation_deg * kPi / 180.0), s = std::sin(rotation_deg * kPi / 180.0);
    for (auto& p : v) p = {centre.x + c * p.x - s * p.y, centre.y + s * p.x + c * p.y};
    return v;
}

// Silhouette straight from the textbook definition, no shared work between points.
inline std::vector<double> naive_silhouette(const std::vector<grapho::FeatureVector>& pts, const std::vector<int>& labels) {
    const std::size_t n = pts.size();
    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);
    auto dist = [&](std::size_t i, std::size_t j) {
        double s = 0.0;
        for (std::size_t d = 0; d < pts[i].values.size(); ++d) {
            const double diff = pts[i].values[d] - pts[j].values[d];
            s += diff * diff;
        }
        return std::sqrt(s);
    };
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
        std::vector<int> count(static_cast<std::size_t>(k), 0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sum[static_cast<std::size_t>(labels[j])] += dist(i, j);
            count[static_cast<std::size_t>(labels[j])] += 1;
        }
        const auto own = static_cast<std::size_t>(labels[i]);
        // a lone member has no intra-cluster distance
        const double a = count[own] == 0 ? 0.0 : sum[own] / count[own];
        double b = INFINITY;
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c)
            if (c != own && count[c] > 0) b = std::min(b, sum[c] / count[c]);
        const double m = std::max(a, b);
        out[i] = m > 0.0 ? (b - a) / m : 0.0;
    }
    return out;
}

struct RandomInstance {
    std::vector<grapho::FeatureVector> points;
    std::vector<int> labels;
};

// Random labelled points with deliberate duplicates and singleton clusters.
inline RandomInstance random_instance(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nd(2, 50), kd(2, 8), dimd(1, 4), grid(0, 4);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    const int n = nd(rng);
    const int k = std::min(kd(rng), n);
    const int dims = dimd(rng);
    const bool lattice = grid(rng) < 2;
    RandomInstance inst;
    for (int i = 0; i < n; ++i) {
        grapho::FeatureVector fv{"P" + std::to_string(i), {}};
        for (int d = 0; d < dims; ++d) fv.values.push_back(lattice ? static_cast<double>(grid(rng)) : u(rng));
        inst.points.push_back(fv);
    }
    std::uniform_int_distribution<int> ld(0, k - 1);
    for (int i = 0; i < n; ++i) inst.labels.push_back(i < k ? i : ld(rng));
    std::shuffle(inst.labels.begin(), inst.labels.end(), rng);
    return inst;
}

}  // namespace fixtures
