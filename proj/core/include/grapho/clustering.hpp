#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "grapho/velocity_scoring.hpp"

namespace grapho {

struct FeatureVector {
    std::string subject_id;
    std::vector<double> values;
};

struct ClusterAssignment {
    int k = 0;
    std::vector<int> labels;
    std::vector<std::vector<double>> centroids;
    double inertia = 0.0;
};

struct SilhouetteReport {
    std::vector<double> values;
    double mean = 0.0;
};

inline constexpr int kDefaultRestarts = 50;

std::size_t count_distinct(const std::vector<FeatureVector>& points);

// Lloyd iterations from the given centroids until assignments stop changing.
// Optionally records the inertia after every assignment step.
ClusterAssignment lloyd(const std::vector<FeatureVector>& points, std::vector<std::vector<double>> centroids,
                        int max_iterations = 300, std::vector<double>* inertia_history = nullptr);

ClusterAssignment kmeans(const std::vector<FeatureVector>& points, int k, std::uint64_t seed,
                         int restarts = kDefaultRestarts);

SilhouetteReport silhouette(const std::vector<FeatureVector>& points, const std::vector<int>& labels);

// The upper end of the scan is clamped to the number of distinct points.
int choose_k(const std::vector<FeatureVector>& points, int k_min, int k_max, std::uint64_t seed,
             int restarts = kDefaultRestarts);

enum class Feature { VPR, VC, P, T };

std::string_view to_string(Feature f);
Feature parse_feature(std::string_view name);
std::vector<Feature> parse_features(std::string_view list);

std::vector<FeatureVector> feature_vectors(const std::vector<SubjectVelocitySheet>& sheets,
                                           const std::vector<Feature>& features);

struct ClusterResult {
    ClusterAssignment assignment;
    SilhouetteReport silhouette;
    std::vector<FeatureVector> points;
};

ClusterResult cluster_subjects(const std::vector<SubjectVelocitySheet>& sheets, const std::vector<Feature>& features,
                               std::optional<int> k, std::uint64_t seed, int restarts = kDefaultRestarts);

}  // namespace grapho
