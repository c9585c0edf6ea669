#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fracfit/dataset_io.hpp"
#include "fracfit/errors.hpp"
#include "fracfit/pso.hpp"

using namespace fracfit;

namespace {

const ParamVector kDesign1{1.406, 1.196, 0.794, 1.638, 0.934};

const FracTransferFunction& design1() {
    static const FracTransferFunction tf = *FracTransferFunction::from_vector(kDesign1);
    return tf;
}

std::vector<Dataset> small_data() {
    return {normalize(gen_synthetic(design1(), SimGrid(9.0, 0.5), 30.0, 2, 0.0, 1))};
}

PsoConfig small_config(std::uint64_t seed) {
    PsoConfig c;
    c.swarm_size = 6;
    c.iterations = 3;
    c.seed = seed;
    return c;
}

bool in_bounds_and_ordered(const ParamVector& x, const ParamBounds& b) {
    return b.contains(x) && x[kAlpha1] < x[kAlpha2];
}

}  // namespace

TEST_CASE("bounds presets") {
    const ParamBounds w = ParamBounds::widened();
    CHECK(w.lower == ParamVector{1.1, 1.0, 0.3, 0.8, 0.5});
    CHECK(w.upper == ParamVector{1.9, 1.5, 1.2, 2.5, 2.0});
    const ParamBounds n = ParamBounds::narrow();
    CHECK(n.lower == ParamVector{1.1, 1.0, 0.5, 1.0, 1.0});
    CHECK(n.upper == ParamVector{1.9, 1.5, 1.0, 2.0, 2.0});
    CHECK(ParamBounds::preset("widened") == w);
    CHECK(ParamBounds::preset("narrow") == n);
    CHECK_THROWS_AS(ParamBounds::preset("other"), ConfigError);
    CHECK(w.contains(kDesign1));
    CHECK_FALSE(n.contains(kDesign1));
}

TEST_CASE("config validation") {
    PsoConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.swarm_size == 200);
    CHECK(c.iterations == 10);
    const ParamVector cap = c.effective_velocity_cap();
    CHECK(cap[0] == doctest::Approx(0.4));
    CHECK(cap[3] == doctest::Approx(0.85));

    auto rejects = [](auto mutate) {
        PsoConfig bad;
        mutate(bad);
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    };
    rejects([](PsoConfig& b) { b.swarm_size = 1; });
    rejects([](PsoConfig& b) { b.iterations = 0; });
    rejects([](PsoConfig& b) { b.inertia = 0.0; });
    rejects([](PsoConfig& b) { b.inertia = 1.1; });
    rejects([](PsoConfig& b) { b.cognitive = -0.1; });
    rejects([](PsoConfig& b) { b.social = NAN; });
    rejects([](PsoConfig& b) { b.velocity_cap = ParamVector{1, 1, 0, 1, 1}; });
    rejects([](PsoConfig& b) { b.bounds.lower[2] = 2.0; });
    rejects([](PsoConfig& b) {
        b.bounds.lower[kAlpha1] = 1.5;
        b.bounds.upper[kAlpha1] = 1.8;
        b.bounds.upper[kAlpha2] = 1.5;
    });
    rejects([](PsoConfig& b) { b.bounds.upper[kAlpha2] = 2.1; });
}

TEST_CASE("particle initialization") {
    PsoConfig c;
    const ParamVector cap = c.effective_velocity_cap();
    auto r1 = particle_rng(9, 3);
    auto r2 = particle_rng(9, 3);
    auto r3 = particle_rng(9, 4);
    const Particle a = init_particle(c, r1);
    CHECK(a == init_particle(c, r2));
    CHECK_FALSE(a == init_particle(c, r3));

    for (std::size_t i = 0; i < 500; ++i) {
        auto rng = particle_rng(1, i);
        const Particle p = init_particle(c, rng);
        CHECK(in_bounds_and_ordered(p.position, c.bounds));
        CHECK(p.best_position == p.position);
        for (std::size_t d = 0; d < 5; ++d) {
            CHECK(std::fabs(p.velocity[d]) <= cap[d]);
        }
    }
}

TEST_CASE("init_swarm") {
    const auto data = small_data();
    const FitnessFunction fitness(data);
    PsoConfig c;
    const auto swarm = init_swarm(c, fitness);
    CHECK(swarm.size() == 200);
    CHECK(swarm == init_swarm(c, fitness));
    for (const Particle& p : swarm) {
        CHECK(p.best_fitness == fitness(p.position));
    }

    SUBCASE("collapsed box") {
        PsoConfig d = small_config(4);
        d.bounds.lower = kDesign1;
        d.bounds.upper = kDesign1;
        for (const Particle& p : init_swarm(d, fitness)) {
            CHECK(p.position == kDesign1);
        }
        const FitResult r = run_pso(d, data);
        CHECK(r.best_position == kDesign1);
    }
}

TEST_CASE("update_particle") {
    PsoConfig c;
    c.velocity_cap = ParamVector{10, 10, 10, 10, 10};
    c.bounds.lower = {0.1, 0.05, 0.0, 0.1, 0.1};
    c.bounds.upper = {2.0, 1.9, 10.0, 10.0, 10.0};
    auto rng = particle_rng(0, 0);

    SUBCASE("no learning terms, unit inertia") {
        c.inertia = 1.0;
        c.cognitive = 0.0;
        c.social = 0.0;
        Particle p{{1.5, 1.0, 1, 1, 1}, {0.1, 0.1, 0.1, 0.1, 0.1}, {1.2, 1.1, 2, 2, 2}, 0.0};
        update_particle(p, {1.3, 1.0, 3, 3, 3}, c, rng);
        CHECK(p.velocity == ParamVector{0.1, 0.1, 0.1, 0.1, 0.1});
        for (std::size_t d = 0; d < 5; ++d) {
            CHECK(p.position[d] == doctest::Approx(ParamVector{1.6, 1.1, 1.1, 1.1, 1.1}[d]));
        }
    }
    SUBCASE("fixed point") {
        const ParamVector x{1.5, 1.2, 1, 1, 1};
        Particle p{x, {0, 0, 0, 0, 0}, x, 0.0};
        update_particle(p, x, c, rng);
        CHECK(p.position == x);
        CHECK(p.velocity == ParamVector{0, 0, 0, 0, 0});
    }
    SUBCASE("pure inertia decay") {
        c.inertia = 0.5;
        c.cognitive = 0.0;
        c.social = 0.0;
        Particle p{{0.5, 0.2, 1, 1, 1}, {1, 1, 1, 1, 1}, {0.5, 0.2, 1, 1, 1}, 0.0};
        update_particle(p, p.position, c, rng);
        CHECK(p.velocity == ParamVector{0.5, 0.5, 0.5, 0.5, 0.5});
    }
    SUBCASE("velocity cap") {
        c.velocity_cap = ParamVector{0.01, 0.01, 0.01, 0.01, 0.01};
        c.inertia = 1.0;
        Particle p{{1.5, 1.0, 1, 1, 1}, {1, -1, 1, -1, 1}, {1.5, 1.0, 1, 1, 1}, 0.0};
        update_particle(p, p.position, c, rng);
        CHECK(p.velocity == ParamVector{0.01, -0.01, 0.01, -0.01, 0.01});
    }
    SUBCASE("clamping zeroes the violated component") {
        c.inertia = 1.0;
        c.cognitive = 0.0;
        c.social = 0.0;
        Particle p{{1.9, 1.0, 9.5, 1, 1}, {0.5, 0, 1, 0, 0}, {1.9, 1.0, 9.5, 1, 1}, 0.0};
        update_particle(p, p.position, c, rng);
        CHECK(p.position[kAlpha2] == 2.0);
        CHECK(p.position[2] == 10.0);
        CHECK(p.velocity[kAlpha2] == 0.0);
        CHECK(p.velocity[2] == 0.0);
    }
    SUBCASE("order repair swaps the orders") {
        c.inertia = 1.0;
        c.cognitive = 0.0;
        c.social = 0.0;
        Particle p{{1.2, 1.0, 1, 1, 1}, {-0.5, 0.5, 0, 0, 0}, {1.2, 1.0, 1, 1, 1}, 0.0};
        update_particle(p, p.position, c, rng);
        CHECK(p.position[kAlpha2] == doctest::Approx(1.5));
        CHECK(p.position[kAlpha1] == doctest::Approx(0.7));
    }
    SUBCASE("without the social term the global best is irrelevant") {
        c.social = 0.0;
        const Particle start{{1.5, 1.1, 1, 2, 1}, {0.1, -0.2, 0.3, 0, 0}, {1.4, 1.0, 2, 2, 2}, 0.0};
        Particle a = start;
        Particle b = start;
        auto ra = particle_rng(5, 0);
        auto rb = particle_rng(5, 0);
        update_particle(a, {1.9, 0.1, 9, 9, 9}, c, ra);
        update_particle(b, {0.2, 0.1, 0, 0.2, 0.2}, c, rb);
        CHECK(a == b);
    }
}

TEST_CASE("repair_order") {
    const ParamBounds b = ParamBounds::widened();
    ParamVector x{1.2, 1.4, 1, 1, 1};
    repair_order(x, b);
    CHECK(x[kAlpha2] == 1.4);
    CHECK(x[kAlpha1] == 1.2);
    ParamVector equal{1.3, 1.3, 1, 1, 1};
    repair_order(equal, b);
    CHECK(equal[kAlpha2] == 1.3);
}

TEST_CASE("fitness") {
    const SimGrid grid(9.8, 0.2);
    SUBCASE("self-consistent data") {
        const std::vector<Dataset> data{gen_synthetic(design1(), grid, 30.0, 4, 0.0, 1)};
        const FitnessFunction f(data);
        CHECK(f.trace_count() == 4);
        CHECK(f.sample_count() == 200);
        CHECK(f(kDesign1) < 1e-14);
    }
    SUBCASE("constant offset") {
        const StepResponse y = step_response(design1(), grid);
        std::vector<double> shifted = y.values;
        for (double& v : shifted) {
            v += 0.1;
        }
        const std::vector<Dataset> data{Dataset({StepTrace(y.times, shifted, 1.0, "s", true)}, "m")};
        CHECK(FitnessFunction(data)(kDesign1) == doctest::Approx(0.1).epsilon(1e-12));
    }
    SUBCASE("noise floor") {
        const std::vector<Dataset> data{gen_synthetic(design1(), grid, 30.0, 4, 0.01, 7)};
        const double f = FitnessFunction(data)(kDesign1);
        CHECK(f > 0.0085);
        CHECK(f < 0.0115);
    }
    SUBCASE("invalid positions give the sentinel") {
        const auto data = small_data();
        const FitnessFunction f(data);
        CHECK(f({1.2, 1.3, 1, 1, 1}) == std::numeric_limits<double>::infinity());
        CHECK(f({1.5, 1.2, 1, 1, -1}) == std::numeric_limits<double>::infinity());
    }
    SUBCASE("traces on different grids pool every sample") {
        const std::vector<Dataset> data{gen_synthetic(design1(), SimGrid(9.0, 0.3), 30.0, 1, 0.0, 1),
                                        gen_synthetic(design1(), SimGrid(9.8, 0.2), 60.0, 2, 0.0, 1)};
        const FitnessFunction f(data);
        CHECK(f.sample_count() == 31 + 100);
        CHECK(f(kDesign1) < 1e-12);
    }
    CHECK_THROWS_AS(FitnessFunction(std::vector<Dataset>{}), DataError);
}

TEST_CASE("run_pso contracts") {
    const auto data = small_data();

    SUBCASE("loop count") {
        PsoConfig c = small_config(1);
        c.swarm_size = 2;
        c.iterations = 1;
        const FitResult r = run_pso(c, data);
        CHECK(r.history.size() == 1);
        CHECK(r.evaluations == 4);
        CHECK(r.best_fitness == r.history.back());
    }
    SUBCASE("same seed, same result") {
        const FitResult a = run_pso(small_config(11), data);
        const FitResult b = run_pso(small_config(11), data);
        CHECK(a == b);
        CHECK_FALSE(a == run_pso(small_config(12), data));
    }
    SUBCASE("synchronous order is independent of the thread count") {
        PsoConfig c = small_config(3);
        c.synchronous = true;
        const FitResult one = run_pso(c, data);
        c.threads = 4;
        CHECK(run_pso(c, data) == one);
    }
    SUBCASE("invariants over seeds") {
        const FitnessFunction fitness(data);
        for (std::uint64_t seed = 0; seed < 6; ++seed) {
            PsoConfig c = small_config(seed);
            c.synchronous = seed % 2 == 1;
            const FitResult r = run_pso(c, data);
            CHECK(r.history.size() == 3);
            for (std::size_t i = 1; i < r.history.size(); ++i) {
                CHECK(r.history[i] <= r.history[i - 1]);
            }
            CHECK(r.best_fitness == r.history.back());
            CHECK(in_bounds_and_ordered(r.best_position, c.bounds));
            CHECK(fitness(r.best_position) == r.best_fitness);
        }
    }
    SUBCASE("no social term: the best equals the best of independent particles") {
        PsoConfig c = small_config(21);
        c.social = 0.0;
        const FitResult r = run_pso(c, data);

        const FitnessFunction fitness(data);
        double best = std::numeric_limits<double>::infinity();
        const ParamVector ignored{1.5, 1.2, 1, 1, 1};
        for (int i = 0; i < c.swarm_size; ++i) {
            auto rng = particle_rng(c.seed, static_cast<std::size_t>(i));
            Particle p = init_particle(c, rng);
            p.best_fitness = fitness(p.position);
            best = std::min(best, p.best_fitness);
            for (int it = 0; it < c.iterations; ++it) {
                update_particle(p, ignored, c, rng);
                const double f = fitness(p.position);
                if (f < p.best_fitness) {
                    p.best_fitness = f;
                    p.best_position = p.position;
                }
                best = std::min(best, f);
            }
        }
        CHECK(r.best_fitness == best);
    }
}

TEST_CASE("data sufficiency warnings") {
    const std::vector<Dataset> thin{gen_synthetic(design1(), SimGrid(9.8, 0.2), 30.0, 1, 0.0, 1)};
    CHECK(data_sufficiency_warnings(thin).size() == 2);
    const std::vector<Dataset> enough{gen_synthetic(design1(), SimGrid(9.8, 0.2), 30.0, 4, 0.0, 1)};
    CHECK(data_sufficiency_warnings(enough).empty());

    PsoConfig c = small_config(2);
    c.swarm_size = 2;
    c.iterations = 1;
    const FitResult r = run_pso(c, thin);
    CHECK(r.warnings.size() == 2);
    CHECK(std::isfinite(r.best_fitness));
}

TEST_CASE("run_pso errors") {
    CHECK_THROWS_AS(run_pso(small_config(1), std::vector<Dataset>{}), DataError);
    PsoConfig bad = small_config(1);
    bad.swarm_size = 1;
    CHECK_THROWS_AS(run_pso(bad, small_data()), ConfigError);
}
