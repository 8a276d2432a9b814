#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "grapho/error.hpp"
#include "grapho/kinematics.hpp"
#include "grapho/report.hpp"
#include "grapho/synth.hpp"
#include "grapho/velocity_scoring.hpp"

using namespace grapho;

namespace {

struct Acf {
    double value = -1.0;
    std::size_t lag = 0;
};

// Plain biased autocorrelation, recomputed from scratch at every lag.
Acf reference_acf(const std::vector<double>& s, double dt, double min_lag) {
    const std::size_t n = s.size();
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    Acf best;
    for (auto k = static_cast<std::size_t>(std::ceil(min_lag / dt - 1e-9)); k <= n / 2; ++k) {
        double c = 0.0;
        for (std::size_t i = 0; i + k < n; ++i) c += (s[i] - mean) * (s[i + k] - mean);
        if (c / var > best.value) best = {c / var, k};
    }
    return best;
}

double path_length(const Session& s) {
    double len = 0.0;
    for (const auto& st : s.strokes)
        for (std::size_t i = 1; i < st.samples.size(); ++i)
            len += std::hypot(st.samples[i].x - st.samples[i - 1].x, st.samples[i].y - st.samples[i - 1].y);
    return len;
}

}  // namespace

TEST_CASE("lognormal pulse shape") {
    PulseParams p{0.0, -1.0, 0.3, 10.0, 0, 0};
    CHECK(lognormal_speed(p, 0.0) == 0.0);
    CHECK(lognormal_speed(p, -1.0) == 0.0);
    CHECK(lognormal_progress(p, 0.0) == 0.0);

    double best_t = 0, best_v = -1;
    for (int i = 1; i <= 200000; ++i) {
        const double t = i * 1e-5;
        const double v = lognormal_speed(p, t);
        if (v > best_v) {
            best_v = v;
            best_t = t;
        }
    }
    CHECK(best_t == doctest::Approx(std::exp(-1.0 - 0.09)).epsilon(1e-4));
    CHECK(best_t == doctest::Approx(0.3362).epsilon(1e-3));

    // composite Simpson on [t0, t0 + 5]
    const int n = 100000;
    const double h = 5.0 / n;
    double sum = lognormal_speed(p, 0.0) + lognormal_speed(p, 5.0);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * lognormal_speed(p, i * h);
    CHECK(std::abs(sum * h / 3.0 - 10.0) / 10.0 < 0.005);
    CHECK(lognormal_progress(p, 5.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("arc pieces") {
    const auto straight = arc_displacement({0.0, 0.0, 10.0});
    CHECK(straight.x == doctest::Approx(10.0));
    CHECK(straight.y == doctest::Approx(0.0));
    const auto half = arc_displacement({0.0, fixtures::kPi, fixtures::kPi * 5.0});
    CHECK(half.x == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(half.y == doctest::Approx(10.0));

    ArcPath path({{0.0, 0.0, 10.0}, {fixtures::kPi / 2, fixtures::kPi / 2, 5.0}}, {1.0, 1.0});
    CHECK(path.length() == doctest::Approx(15.0));
    CHECK(path.at(10.0).x == doctest::Approx(11.0));
    CHECK(path.end().y == doctest::Approx(6.0));
    CHECK(path.at(-3.0).x == doctest::Approx(1.0));
}

TEST_CASE("generation is deterministic and valid") {
    for (auto task : kAllTasks) {
        auto spec = default_spec(task);
        spec.time_jitter = spec.amp_jitter = spec.pause_jitter = 0.4;
        spec.seed = 42;
        const auto a = generate_session(spec), b = generate_session(spec);
        CHECK(serialize_session(a) == serialize_session(b));
        CHECK(validate_session(a).ok());
        spec.seed = 43;
        CHECK(serialize_session(generate_session(spec)) != serialize_session(a));
    }
}

TEST_CASE("path length matches the pulse amplitudes") {
    std::mt19937_64 rng(5);
    for (auto task : kAllTasks)
        for (int i = 0; i < 10; ++i) {
            auto spec = default_spec(task);
            spec.time_jitter = spec.amp_jitter = 0.5;
            spec.seed = rng();
            const auto plan = plan_session(spec);
            double amplitude = 0.0;
            for (const auto& p : plan.pulses) amplitude += p.D;
            CHECK(std::abs(path_length(generate_session(spec)) - amplitude) / amplitude < 0.02);
            CHECK(plan.path.length() == doctest::Approx(amplitude));
        }
}

TEST_CASE("regular sessions repeat at the pulse period") {
    for (auto task : kAllTasks) {
        CAPTURE(to_string(task));
        const auto spec = default_spec(task);
        const auto kin = analyze_kinematics(generate_session(spec));
        const auto acf = reference_acf(kin.profile.speed, kin.profile.dt, 0.1);
        CHECK(acf.value >= 0.9);
        CHECK(autocorrelation_peak(kin.profile, 0.1) == doctest::Approx(acf.value).epsilon(1e-9));
        const double period_samples = (spec.period + spec.pause_base) / kin.profile.dt;
        CHECK(std::abs(static_cast<double>(acf.lag) - period_samples) <= 1.0);
    }
}

TEST_CASE("heavily jittered sessions lose the repetition") {
    for (double j : {0.5, 0.6}) {
        int above = 0;
        for (auto task : kAllTasks)
            for (std::uint64_t seed = 1; seed <= 30; ++seed) {
                auto spec = default_spec(task);
                spec.time_jitter = spec.amp_jitter = spec.pause_jitter = j;
                spec.seed = seed;
                const auto kin = analyze_kinematics(generate_session(spec));
                above += autocorrelation_peak(kin.profile, 0.1) >= 0.5;
            }
        CAPTURE(j);
        CHECK(above == 0);
    }
}

TEST_CASE("two-second circle scores full marks, stretched to six seconds loses T") {
    auto spec = default_spec(TaskKind::Circle);
    spec.n_units = 6;
    spec.period = 1.0 / 3.0;
    const auto s = generate_session(spec);
    CHECK(session_duration(s) == doctest::Approx(2.0).epsilon(0.01));
    const auto r = score_session(s);
    CHECK(r.velocity == VelocityScore{1, 1, 1, 1});
    CHECK(r.shape.total == 5);

    spec.period = 1.0;
    const auto slow = score_session(generate_session(spec));
    CHECK(slow.metrics.duration == doctest::Approx(6.0).epsilon(0.01));
    CHECK(slow.velocity == VelocityScore{1, 1, 1, 0});
    CHECK(slow.velocity.total() == 3);
}

TEST_CASE("elel pairs") {
    auto spec = default_spec(TaskKind::Elel);
    CHECK(spec.n_units == 3);
    const auto r = score_session(generate_session(spec));
    CHECK(r.shape.total == 5);
    CHECK(r.velocity.vpr == 1);
    CHECK(r.geometry.loops.size() == 6);

    spec.n_units = 2;
    const auto two = score_session(generate_session(spec));
    CHECK(two.shape.item("GlobalC") == 0);
    CHECK(two.shape.item("GeneralCopy") == 1);
}

TEST_CASE("invalid patterns are rejected") {
    auto spec = default_spec(TaskKind::Circle);
    spec.n_units = 0;
    CHECK_THROWS_AS(generate_session(spec), Error);
    spec = default_spec(TaskKind::Square);
    spec.n_units = 6;
    CHECK_THROWS_AS(check_spec(spec), Error);
    spec = default_spec(TaskKind::Circle);
    spec.period = 0.0;
    CHECK_THROWS_AS(check_spec(spec), Error);
    spec = default_spec(TaskKind::Circle);
    spec.time_jitter = -0.1;
    CHECK_THROWS_AS(check_spec(spec), Error);
}

TEST_CASE("cohort files") {
    const auto spec = parse_cohort_spec(
        "# comment\nsubjects=4\ngroup=HC\nseed=9\nperiod=0.3\nelel.period=0.5\nsquare.time_jitter=0.2\n");
    CHECK(spec.subjects == 4);
    CHECK(spec.circle.period == 0.3);
    CHECK(spec.elel.period == 0.5);
    CHECK(spec.square.time_jitter == 0.2);
    CHECK(spec.circle.time_jitter == 0.0);
    const auto sessions = generate_cohort(spec);
    CHECK(sessions.size() == 12);
    for (const auto& s : sessions) {
        CHECK(validate_session(s).ok());
        CHECK(s.group_label == std::optional<std::string>("HC"));
    }
    CHECK(sessions.front().subject_id == "S1");
    const auto again = generate_cohort(spec);
    for (std::size_t i = 0; i < sessions.size(); ++i) CHECK(again[i] == sessions[i]);

    try {
        parse_cohort_spec("n_units=0\n");
        FAIL("expected SCHEMA");
    } catch (const Error& e) {
        CHECK(e.code() == "SCHEMA");
    }
    CHECK_THROWS_AS(parse_cohort_spec("colour=blue\n"), Error);
    CHECK(generate_cohort(parse_cohort_spec("subjects=12\n")).front().subject_id == "S01");
}
