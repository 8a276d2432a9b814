#include "grapho/clustering.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>

#include "grapho/error.hpp"
#include "text_util.hpp"

namespace grapho {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::uint64_t restart_seed(std::uint64_t seed, std::uint64_t restart) {
    std::uint64_t x = seed ^ (restart * 0x9E3779B97F4A7C15ULL);
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void check_points(const std::vector<FeatureVector>& points) {
    if (points.empty()) throw Error("NO_INPUT", "no points to cluster");
    const auto dim = points.front().values.size();
    if (dim == 0) throw Error("SCHEMA", "feature vectors are empty");
    for (const auto& p : points) {
        if (p.values.size() != dim) throw Error("SCHEMA", "feature vectors differ in dimension");
        for (double v : p.values)
            if (!std::isfinite(v)) throw Error("SCHEMA", "non-finite feature value for " + p.subject_id);
    }
}

std::vector<int> assign(const std::vector<FeatureVector>& points, const std::vector<std::vector<double>>& centroids,
                        double& inertia) {
    std::vector<int> labels(points.size(), 0);
    inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double best = INFINITY;
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            const double d = sq_dist(points[i].values, centroids[c]);
            if (d < best) {
                best = d;
                labels[i] = static_cast<int>(c);
            }
        }
        inertia += best;
    }
    return labels;
}

std::vector<std::vector<double>> means(const std::vector<FeatureVector>& points, const std::vector<int>& labels,
                                       const std::vector<std::vector<double>>& previous) {
    const auto k = previous.size();
    const auto dim = points.front().values.size();
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        ++counts[c];
        for (std::size_t d = 0; d < dim; ++d) sums[c][d] += points[i].values[d];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            sums[c] = previous[c];
            continue;
        }
        for (auto& v : sums[c]) v /= static_cast<double>(counts[c]);
    }
    return sums;
}

// Moves the point farthest from its centroid into each empty cluster.
void repair_empty(const std::vector<FeatureVector>& points, std::vector<int>& labels,
                  std::vector<std::vector<double>>& centroids) {
    const auto k = centroids.size();
    std::vector<std::size_t> counts(k, 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] != 0) continue;
        std::size_t far = points.size();
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto own = static_cast<std::size_t>(labels[i]);
            if (counts[own] < 2) continue;
            const double d = sq_dist(points[i].values, centroids[own]);
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far == points.size()) return;
        --counts[static_cast<std::size_t>(labels[far])];
        labels[far] = static_cast<int>(c);
        ++counts[c];
        centroids[c] = points[far].values;
    }
}

std::vector<std::vector<double>> plus_plus_init(const std::vector<FeatureVector>& points, int k,
                                                std::mt19937_64& rng) {
    const std::size_t n = points.size();
    std::vector<std::vector<double>> centroids;
    auto first = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n));
    centroids.push_back(points[std::min(first, n - 1)].values);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points[i].values, centroids[0]);
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        if (!(total > 0.0)) break;
        const double target = unit_uniform(rng) * total;
        double acc = 0.0;
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (d2[i] <= 0.0) continue;
            acc += d2[i];
            pick = i;
            if (acc > target) break;
        }
        centroids.push_back(points[pick].values);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(points[i].values, centroids.back()));
    }
    return centroids;
}

}  // namespace

std::size_t count_distinct(const std::vector<FeatureVector>& points) {
    std::set<std::vector<double>> seen;
    for (const auto& p : points) seen.insert(p.values);
    return seen.size();
}

ClusterAssignment lloyd(const std::vector<FeatureVector>& points, std::vector<std::vector<double>> centroids,
                        int max_iterations, std::vector<double>* inertia_history) {
    check_points(points);
    if (centroids.empty()) throw Error("K_RANGE", "need at least one centroid");
    double inertia = 0.0;
    auto labels = assign(points, centroids, inertia);
    if (inertia_history) inertia_history->push_back(inertia);
    for (int it = 0; it < max_iterations; ++it) {
        repair_empty(points, labels, centroids);
        centroids = means(points, labels, centroids);
        auto next = assign(points, centroids, inertia);
        if (inertia_history) inertia_history->push_back(inertia);
        if (next == labels) break;
        labels = std::move(next);
    }
    repair_empty(points, labels, centroids);
    centroids = means(points, labels, centroids);

    ClusterAssignment out;
    out.k = static_cast<int>(centroids.size());
    out.labels = labels;
    out.centroids = centroids;
    for (std::size_t i = 0; i < points.size(); ++i)
        out.inertia += sq_dist(points[i].values, centroids[static_cast<std::size_t>(labels[i])]);
    return out;
}

ClusterAssignment kmeans(const std::vector<FeatureVector>& points, int k, std::uint64_t seed, int restarts) {
    check_points(points);
    if (k < 1) throw Error("K_RANGE", "k must be at least 1");
    if (restarts < 1) throw Error("K_RANGE", "restarts must be at least 1");
    const auto distinct = count_distinct(points);
    if (static_cast<std::size_t>(k) > distinct)
        throw Error("K_RANGE", "k = " + std::to_string(k) + " exceeds the " + std::to_string(distinct) + " distinct points");

    std::optional<ClusterAssignment> best;
    for (int r = 0; r < restarts; ++r) {
        std::mt19937_64 rng(restart_seed(seed, static_cast<std::uint64_t>(r)));
        auto result = lloyd(points, plus_plus_init(points, k, rng));
        if (!best || result.inertia < best->inertia) best = std::move(result);
    }

    std::vector<int> remap(static_cast<std::size_t>(k), -1);
    int next = 0;
    for (int l : best->labels)
        if (remap[static_cast<std::size_t>(l)] < 0) remap[static_cast<std::size_t>(l)] = next++;
    for (auto& r : remap)
        if (r < 0) r = next++;
    ClusterAssignment out = *best;
    for (auto& l : out.labels) l = remap[static_cast<std::size_t>(l)];
    for (std::size_t c = 0; c < remap.size(); ++c) out.centroids[static_cast<std::size_t>(remap[c])] = best->centroids[c];
    return out;
}

SilhouetteReport silhouette(const std::vector<FeatureVector>& points, const std::vector<int>& labels) {
    check_points(points);
    const std::size_t n = points.size();
    if (labels.size() != n) throw Error("LABELS", "one label per point required");
    int k = 0;
    for (int l : labels) {
        if (l < 0) throw Error("LABELS", "labels must be non-negative");
        k = std::max(k, l + 1);
    }
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    const auto used = std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; });
    if (used < 2) throw Error("K_ONE", "silhouette needs at least two clusters");

    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) dist[i * n + j] = dist[j * n + i] = std::sqrt(sq_dist(points[i].values, points[j].values));

    SilhouetteReport rep;
    rep.values.resize(n);
    std::vector<double> sums(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sums[static_cast<std::size_t>(labels[j])] += dist[i * n + j];
        const auto own = static_cast<std::size_t>(labels[i]);
        const double a = sizes[own] > 1 ? sums[own] / static_cast<double>(sizes[own] - 1) : 0.0;
        double b = INFINITY;
        for (std::size_t c = 0; c < sums.size(); ++c)
            if (c != own && sizes[c] > 0) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
        const double m = std::max(a, b);
        rep.values[i] = m > 0.0 ? std::clamp((b - a) / m, -1.0, 1.0) : 0.0;
    }
    double total = 0.0;
    for (double v : rep.values) total += v;
    rep.mean = total / static_cast<double>(n);
    return rep;
}

int choose_k(const std::vector<FeatureVector>& points, int k_min, int k_max, std::uint64_t seed, int restarts) {
    check_points(points);
    if (k_min < 2 || k_max < k_min) throw Error("K_RANGE", "need 2 <= k_min <= k_max");
    const auto distinct = static_cast<int>(count_distinct(points));
    if (k_min > distinct) throw Error("K_RANGE", "k_min exceeds the number of distinct points");
    const int hi = std::min(k_max, distinct);
    int best_k = k_min;
    double best = -INFINITY;
    for (int k = k_min; k <= hi; ++k) {
        const auto a = kmeans(points, k, seed, restarts);
        const double s = silhouette(points, a.labels).mean;
        if (s > best + 1e-12) {
            best = s;
            best_k = k;
        }
    }
    return best_k;
}

std::string_view to_string(Feature f) {
    switch (f) {
        case Feature::VPR: return "VPR";
        case Feature::VC: return "VC";
        case Feature::P: return "P";
        case Feature::T: return "T";
    }
    return "VPR";
}

Feature parse_feature(std::string_view name) {
    std::string up;
    for (char c : detail::trim(name)) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (up == "VPR") return Feature::VPR;
    if (up == "VC") return Feature::VC;
    if (up == "P") return Feature::P;
    if (up == "T") return Feature::T;
    throw Error("INVALID_FEATURE", "unknown feature '" + std::string(name) + "'; valid names are VPR, VC, P, T");
}

std::vector<Feature> parse_features(std::string_view list) {
    std::vector<Feature> out;
    for (auto part : detail::split(list, ',')) {
        const auto f = parse_feature(part);
        if (std::find(out.begin(), out.end(), f) != out.end())
            throw Error("INVALID_FEATURE", "feature '" + std::string(to_string(f)) + "' listed twice");
        out.push_back(f);
    }
    return out;
}

std::vector<FeatureVector> feature_vectors(const std::vector<SubjectVelocitySheet>& sheets,
                                           const std::vector<Feature>& features) {
    if (features.empty()) throw Error("INVALID_FEATURE", "no features selected; valid names are VPR, VC, P, T");
    std::vector<FeatureVector> out;
    for (const auto& s : sheets) {
        FeatureVector v;
        v.subject_id = s.subject_id;
        for (auto f : features) {
            switch (f) {
                case Feature::VPR: v.values.push_back(s.item_totals.vpr); break;
                case Feature::VC: v.values.push_back(s.item_totals.vc); break;
                case Feature::P: v.values.push_back(s.item_totals.p); break;
                case Feature::T: v.values.push_back(s.item_totals.t); break;
            }
        }
        out.push_back(std::move(v));
    }
    return out;
}

ClusterResult cluster_subjects(const std::vector<SubjectVelocitySheet>& sheets, const std::vector<Feature>& features,
                               std::optional<int> k, std::uint64_t seed, int restarts) {
    if (sheets.size() < 3) throw Error("TOO_FEW_SUBJECTS", "clustering needs at least 3 subjects");
    ClusterResult r;
    r.points = feature_vectors(sheets, features);
    const auto distinct = static_cast<int>(count_distinct(r.points));
    if (distinct < 2) throw Error("K_RANGE", "all subjects share the same feature vector");
    const int chosen = k ? *k
                         : choose_k(r.points, 2, std::min({distinct, static_cast<int>(r.points.size()) - 1, 10}), seed,
                                    restarts);
    r.assignment = kmeans(r.points, chosen, seed, restarts);
    r.silhouette = silhouette(r.points, r.assignment.labels);
    return r;
}

}  // namespace grapho
