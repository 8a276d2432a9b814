#include "grapho/cli.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <thread>

#include "grapho/error.hpp"
#include "grapho/synth.hpp"

namespace grapho {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IO", "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("IO", "cannot write " + path.string());
    out << text;
    if (!out) throw Error("IO", "write failed for " + path.string());
}

struct Outcome {
    std::optional<SessionResult> result;
    std::string error;
};

Outcome score_file(const fs::path& path, const ScoringConfig& cfg) {
    Outcome o;
    try {
        auto session = load_session(path);
        o.result = score_session(session, cfg);
        o.result->source = path.string();
    } catch (const Error& e) {
        o.error = path.string() + ": " + e.what();
    } catch (const std::exception& e) {
        o.error = path.string() + ": " + e.what();
    }
    return o;
}

}  // namespace

int cmd_score(const RunConfig& run, std::ostream& out, std::ostream& err) {
    ScoringConfig cfg = run.scoring;
    if (run.config_file) {
        try {
            cfg = parse_scoring_config(read_text(*run.config_file));
        } catch (const Error& e) {
            err << run.config_file->string() << ": " << e.what() << "\n";
            return kExitUsage;
        }
    }

    std::vector<fs::path> files;
    std::vector<std::string> errors;
    for (const auto& in : run.inputs) {
        std::error_code ec;
        if (fs::is_directory(in, ec)) {
            std::vector<fs::path> found;
            for (const auto& entry : fs::directory_iterator(in, ec))
                if (entry.is_regular_file() && entry.path().extension() == ".gsx") found.push_back(entry.path());
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else if (fs::exists(in, ec)) {
            files.push_back(in);
        } else {
            errors.push_back(in.string() + ": IO: no such file or directory");
        }
    }
    if (files.empty()) {
        for (const auto& e : errors) err << e << "\n";
        err << "NO_INPUT: no session files to score\n";
        return kExitUsage;
    }

    std::vector<Outcome> outcomes(files.size());
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t begin = 0; begin < files.size(); begin += workers) {
        const std::size_t end = std::min(files.size(), begin + workers);
        std::vector<std::future<Outcome>> jobs;
        for (std::size_t i = begin; i < end; ++i)
            jobs.push_back(std::async(std::launch::async, score_file, files[i], std::cref(cfg)));
        for (std::size_t i = begin; i < end; ++i) outcomes[i] = jobs[i - begin].get();
    }

    std::vector<SessionResult> results;
    for (auto& o : outcomes) {
        if (o.result)
            results.push_back(std::move(*o.result));
        else
            errors.push_back(o.error);
    }

    std::vector<std::string> problems;
    auto table = build_cohort(results, &problems);

    try {
        std::error_code ec;
        fs::create_directories(run.out_dir / "sessions", ec);
        if (ec) throw Error("IO", "cannot create " + (run.out_dir / "sessions").string() + ": " + ec.message());
        std::set<std::string> used;
        for (const auto& r : results) {
            std::string name = r.subject_id + "_" + std::string(to_string(r.task));
            std::string unique = name;
            for (int n = 2; !used.insert(unique).second; ++n) unique = name + "_" + std::to_string(n);
            write_text(run.out_dir / "sessions" / (unique + ".json"), session_detail_json(r));
        }
        write_text(run.out_dir / "nepsy_table.csv", nepsy_table_csv(table));
        write_text(run.out_dir / "velocity_table.csv", velocity_table_csv(table));
        write_text(run.out_dir / "cohort.csv", cohort_csv(table));
    } catch (const Error& e) {
        err << e.what() << "\n";
        return kExitPartial;
    }

    for (const auto& e : errors) err << e << "\n";
    for (const auto& p : problems) err << p << "\n";
    out << "scored " << results.size() << " of " << files.size() << " sessions for " << table.rows.size()
        << " subjects into " << run.out_dir.string() << "\n";
    return errors.empty() && problems.empty() ? kExitOk : kExitPartial;
}

int cmd_cluster(const fs::path& table, const std::string& features, std::optional<int> k, std::uint64_t seed,
                const fs::path& out_file, std::ostream& out, std::ostream& err) {
    std::vector<Feature> feats;
    try {
        feats = parse_features(features);
    } catch (const Error& e) {
        err << e.what() << "\n";
        return kExitUsage;
    }
    if (k && *k < 2) {
        err << "K_RANGE: k must be at least 2\n";
        return kExitUsage;
    }
    try {
        auto sheets = read_velocity_table(read_text(table));
        auto result = cluster_subjects(sheets, feats, k, seed);
        if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
        write_text(out_file, cluster_report_json(result, feats, seed));
        out << "k=" << result.assignment.k << " mean_silhouette=" << result.silhouette.mean << "\n";
        for (std::size_t i = 0; i < result.points.size(); ++i) {
            out << result.points[i].subject_id << " cluster=" << result.assignment.labels[i] << " (";
            for (std::size_t f = 0; f < feats.size(); ++f)
                out << (f ? " " : "") << to_string(feats[f]) << "=" << result.points[i].values[f];
            out << ")\n";
        }
    } catch (const Error& e) {
        err << table.string() << ": " << e.what() << "\n";
        return kExitPartial;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return kExitPartial;
    }
    return kExitOk;
}

int cmd_plot(const fs::path& session_file, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
    try {
        auto session = load_session(session_file);
        auto analysis = analyze_shape(session);
        fs::create_directories(out_dir);
        const auto stem = session_file.stem().string();
        const auto traj = out_dir / (stem + "_trajectory.svg");
        const auto vel = out_dir / (stem + "_velocity.svg");
        write_text(traj, trajectory_svg(session, analysis));
        write_text(vel, velocity_svg(session, analysis.kinematics));
        out << traj.string() << "\n" << vel.string() << "\n";
    } catch (const Error& e) {
        err << session_file.string() << ": " << e.what() << "\n";
        return kExitPartial;
    } catch (const std::exception& e) {
        err << session_file.string() << ": " << e.what() << "\n";
        return kExitPartial;
    }
    return kExitOk;
}

int cmd_synth(const fs::path& spec_file, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
    CohortSpec spec;
    try {
        spec = parse_cohort_spec(read_text(spec_file));
    } catch (const Error& e) {
        err << spec_file.string() << ": " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        fs::create_directories(out_dir);
        for (const auto& s : generate_cohort(spec)) {
            const auto path = out_dir / (s.subject_id + "_" + std::string(to_string(s.task)) + ".gsx");
            save_session(s, path);
            out << path.string() << "\n";
        }
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return kExitPartial;
    }
    return kExitOk;
}

}  // namespace grapho
