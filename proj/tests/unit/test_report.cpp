#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "grapho/error.hpp"
#include "grapho/report.hpp"
#include "grapho/synth.hpp"
#include "json.hpp"
#include "xml_check.hpp"

using namespace grapho;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SessionResult result_for(const std::string& subject, TaskKind task, std::uint64_t seed = 1) {
    auto spec = default_spec(task);
    spec.subject_id = subject;
    spec.seed = seed;
    spec.group_label = "HC";
    return score_session(generate_session(spec));
}

}  // namespace

TEST_CASE("scoring config overrides") {
    const auto cfg = parse_scoring_config("# thresholds\nvc_cv_max=0.3\ncutoff_hz = 8\nfilter_order=3\ntall_ratio=1.4\n");
    CHECK(cfg.scale.vc_cv_max == 0.3);
    CHECK(cfg.kinematics.cutoff_hz == 8.0);
    CHECK(cfg.kinematics.filter_order == 3);
    CHECK(cfg.shape.tall_ratio == 1.4);
    CHECK(cfg.scale.t_limit_elel == 8.0);

    for (const char* bad : {"colour=red\n", "vc_cv_max=-1\n", "cutoff_hz=150\n", "peak_prominence_frac=1\n",
                            "vc_cv_max=0.2\nvc_cv_max=0.3\n", "vc_cv_max=abc\n", "angle_min_deg=130\n"}) {
        CAPTURE(bad);
        try {
            parse_scoring_config(bad);
            FAIL("expected CONFIG");
        } catch (const Error& e) {
            CHECK(e.code() == "CONFIG");
        }
    }
}

TEST_CASE("session details") {
    const auto r = result_for("S9", TaskKind::Elel);
    const auto j = nlohmann::json::parse(session_detail_json(r));
    CHECK(j["subject"] == "S9");
    CHECK(j["task"] == "elel");
    CHECK(j["shape"]["total"] == 5);
    CHECK(j["velocity"]["total"] == 4);
    CHECK(j["kinematics"]["t_window_s"].is_number());
    CHECK(j["geometry"]["loops"].size() == 6);
}

TEST_CASE("cohort aggregation") {
    std::vector<SessionResult> results;
    for (const char* s : {"S2", "S1"})
        for (auto task : kAllTasks) results.push_back(result_for(s, task));
    results.push_back(result_for("S3", TaskKind::Circle));
    results.push_back(result_for("S1", TaskKind::Circle, 5));

    std::vector<std::string> problems;
    const auto table = build_cohort(results, &problems);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0].subject_id == "S1");
    CHECK(table.rows[0].complete());
    CHECK_FALSE(table.rows[2].complete());
    CHECK(table.rows[0].velocity_total() == 12);
    CHECK(table.rows[0].shape_total() == 17);
    REQUIRE(problems.size() == 2);
    CHECK(problems[0].rfind("DUPLICATE", 0) == 0);
    CHECK(problems[1].rfind("MISSING_TASK", 0) == 0);

    const auto csv = cohort_csv(table);
    CHECK(csv.find("S1,HC,1,1,1,1,1,5,") != std::string::npos);
    CHECK(fixtures::count_of(csv, "\n") == 4);
}

TEST_CASE("velocity table round trip recomputes totals") {
    std::vector<SessionResult> results;
    for (const char* s : {"A", "B", "C"})
        for (auto task : kAllTasks) results.push_back(result_for(s, task));
    results[1].velocity = {0, 1, 0, 1};
    const auto table = build_cohort(results);
    const auto csv = velocity_table_csv(table);
    const auto sheets = read_velocity_table(csv);
    REQUIRE(sheets.size() == 3);
    CHECK(sheets[0].grand_total == 10);
    CHECK(sheets[0].per_task.at(TaskKind::Square) == VelocityScore{0, 1, 0, 1});
    CHECK(sheets[1].grand_total == 12);

    const auto transposed = read_velocity_table(cohort_csv(table));
    REQUIRE(transposed.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(transposed[i].item_totals == sheets[i].item_totals);

    // a lying Total row is ignored
    auto tampered = csv;
    const auto pos = tampered.find("total,Total,10");
    REQUIRE(pos != std::string::npos);
    tampered.replace(pos, 14, "total,Total,99");
    CHECK(read_velocity_table(tampered)[0].grand_total == 10);

    CHECK_THROWS_AS(read_velocity_table("task,item,A\ncircle,VPR,2\n"), Error);
    CHECK_THROWS_AS(read_velocity_table("hello\n"), Error);
    CHECK_THROWS_AS(read_velocity_table("task,item,A\ncircle,VPR,1\n"), Error);
}

TEST_CASE("published fixtures are internally consistent") {
    const auto sheets = read_velocity_table(slurp(std::filesystem::path(GRAPHO_DATA_DIR) / "published_velocity_scores.csv"));
    REQUIRE(sheets.size() == 12);
    const int totals[12] = {6, 8, 5, 1, 10, 7, 12, 12, 12, 12, 12, 12};
    for (int i = 0; i < 12; ++i) {
        CHECK(sheets[static_cast<std::size_t>(i)].grand_total == totals[i]);
        const auto& t = sheets[static_cast<std::size_t>(i)].item_totals;
        CHECK(t.vpr + t.vc + t.p + t.t == totals[i]);
        for (int v : {t.vpr, t.vc, t.p, t.t}) {
            CHECK(v >= 0);
            CHECK(v <= 3);
        }
    }

    // rubric table: every task block's Total row equals the sum of its items
    std::istringstream in(slurp(std::filesystem::path(GRAPHO_DATA_DIR) / "published_nepsy_scores.csv"));
    std::string line;
    std::map<std::string, std::vector<int>> sums;
    std::vector<int> grand;
    int checked = 0;
    while (std::getline(in, line)) {
        if (line.rfind("##", 0) == 0 || line.rfind("task,", 0) == 0 || line.rfind("group,", 0) == 0) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        REQUIRE(cells.size() == 14);
        std::vector<int> v;
        for (std::size_t i = 2; i < cells.size(); ++i) v.push_back(std::stoi(cells[i]));
        if (cells[0] == "total") {
            for (std::size_t i = 0; i < 12; ++i) CHECK(v[i] == grand[i]);
            ++checked;
        } else if (cells[1] == "Total") {
            for (std::size_t i = 0; i < 12; ++i) CHECK(v[i] == sums[cells[0]][i]);
            const int cap = cells[0] == "square" ? 7 : 5;
            for (int x : v) CHECK(x <= cap);
            if (grand.empty()) grand.assign(12, 0);
            for (std::size_t i = 0; i < 12; ++i) grand[i] += v[i];
            ++checked;
        } else {
            auto& s = sums[cells[0]];
            if (s.empty()) s.assign(12, 0);
            for (std::size_t i = 0; i < 12; ++i) {
                CHECK((v[i] == 0 || v[i] == 1));
                s[i] += v[i];
            }
        }
    }
    CHECK(checked == 4);
    CHECK(grand == std::vector<int>{17, 17, 17, 12, 16, 15, 17, 17, 17, 17, 17, 17});
}

TEST_CASE("criteria tables have one column per subject") {
    std::vector<SessionResult> results;
    for (const char* s : {"S1", "S2"})
        for (auto task : kAllTasks) results.push_back(result_for(s, task));
    const auto table = build_cohort(results);
    const auto nepsy = nepsy_table_csv(table);
    CHECK(nepsy.rfind("task,item,S1,S2\ngroup,,HC,HC\ncircle,GeneralCopy,1,1\n", 0) == 0);
    CHECK(nepsy.find("square,LocalF,1,1\n") != std::string::npos);
    CHECK(nepsy.find("total,Total,17,17\n") != std::string::npos);
    const auto vel = velocity_table_csv(table);
    CHECK(vel.find("total_items,VPR,3,3\n") != std::string::npos);
    CHECK(vel.find("total,Total,12,12\n") != std::string::npos);
}

TEST_CASE("cluster report") {
    const auto sheets = read_velocity_table(slurp(std::filesystem::path(GRAPHO_DATA_DIR) / "published_velocity_scores.csv"));
    const auto r = cluster_subjects(sheets, {Feature::VPR, Feature::P}, std::nullopt, 4);
    const auto j = nlohmann::json::parse(cluster_report_json(r, {Feature::VPR, Feature::P}, 4));
    CHECK(j["k"] == 6);
    CHECK(j["features"] == nlohmann::json::array({"VPR", "P"}));
    CHECK(j["subjects"].size() == 12);
    CHECK(j["mean_silhouette"].get<double>() == 1.0);
}

TEST_CASE("plots are well-formed SVG") {
    for (auto task : kAllTasks) {
        auto spec = default_spec(task);
        spec.subject_id = "S<&>";
        const auto s = generate_session(spec);
        const auto analysis = analyze_shape(s);
        for (const auto& doc : {trajectory_svg(s, analysis), velocity_svg(s, analysis.kinematics)}) {
            std::size_t elements = 0;
            CHECK(fixtures::xml_problem(doc, &elements) == "");
            CHECK(fixtures::count_of(doc, "<path") > 0);
        }
        CHECK(fixtures::count_of(velocity_svg(s, analysis.kinematics), "class=\"peak\"") == analysis.kinematics.peaks.size());
    }
    CHECK(fixtures::xml_problem("<svg><path></svg>") != "");
}

TEST_CASE("a session with one pause gets one pause band") {
    auto s = fixtures::make_session(TaskKind::Circle, {fixtures::circle_stroke(20, fixtures::kPi, 200)});
    auto& samples = s.strokes[0].samples;
    // hold the pen still for 0.3 s in the middle of the drawing
    const std::size_t mid = samples.size() / 2;
    const auto hold = samples[mid];
    std::vector<PenSample> out(samples.begin(), samples.begin() + static_cast<long>(mid) + 1);
    for (int i = 1; i <= 60; ++i) out.push_back({hold.t + i * 0.005, hold.x, hold.y, true});
    for (std::size_t i = mid + 1; i < samples.size(); ++i) {
        auto p = samples[i];
        p.t += 0.3;
        out.push_back(p);
    }
    samples = out;
    const auto analysis = analyze_shape(s);
    const auto doc = velocity_svg(s, analysis.kinematics);
    CHECK(analysis.kinematics.pauses.size() == 1);
    CHECK(fixtures::count_of(doc, "class=\"pause-band\"") == 1);
}
