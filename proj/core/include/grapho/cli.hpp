#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "grapho/report.hpp"

namespace grapho {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
    std::vector<std::filesystem::path> inputs;
    std::filesystem::path out_dir;
    std::optional<std::filesystem::path> config_file;
    ScoringConfig scoring;
    std::uint64_t seed = 0;
    std::string features = "VPR,P";
};

int cmd_score(const RunConfig& run, std::ostream& out, std::ostream& err);

int cmd_cluster(const std::filesystem::path& table, const std::string& features, std::optional<int> k,
                std::uint64_t seed, const std::filesystem::path& out_file, std::ostream& out, std::ostream& err);

int cmd_plot(const std::filesystem::path& session_file, const std::filesystem::path& out_dir, std::ostream& out,
             std::ostream& err);

int cmd_synth(const std::filesystem::path& spec_file, const std::filesystem::path& out_dir, std::ostream& out,
              std::ostream& err);

}  // namespace grapho
