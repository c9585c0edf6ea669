// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "fracfit/dataset_io.hpp"
#include "fracfit/fode.hpp"
#include "fracfit/log.hpp"
#include "fracfit/pso.hpp"
#include "fracfit/special.hpp"

using namespace fracfit;
namespace fs = std::filesystem;

namespace {

const ParamVector kDesign1{1.406, 1.196, 0.794, 1.638, 0.934};
const ParamVector kDesign2{1.424, 1.170, 0.986, 2.103, 0.728};

FracTransferFunction tf_of(const ParamVector& x) { return *FracTransferFunction::from_vector(x); }

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int failures = 0;

void report(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("%.2f s", secs);
    if (limit_s > 0.0) {
        timing += fmt(" (limit %.0f s)", limit_s);
        if (secs >= limit_s) {
            o.pass = false;
        }
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] criterion %d: %s | %s | %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
                o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
}

Outcome criterion1() {
    double worst = 0.0;
    for (double z : {-10.0, -1.0, -0.1, 0.1, 1.0, 10.0}) {
        worst = std::max(worst, std::fabs(mittag_leffler_3p(1.0, 1.0, 1.0, z).value - std::exp(z)));
        worst = std::max(worst, std::fabs(mittag_leffler_3p(1.0, 2.0, 1.0, z).value - std::expm1(z) / z));
    }
    return {worst <= 1e-9, fmt("max abs error %.3g (tol 1e-9)", worst)};
}

Outcome criterion2() {
    const double h = 1e-3;
    const std::size_t n = 10001;
    std::string detail;
    bool pass = true;
    for (const ParamVector& x : {kDesign1, kDesign2}) {
        const FracTransferFunction tf = tf_of(x);
        const std::vector<double> gl = gl_solve(tf, 1.0, h, n);
        SeriesStepEvaluator series(tf);
        double worst = 0.0;
        std::size_t served = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const SeriesPoint p = series.evaluate(static_cast<double>(i) * h);
            if (p.converged) {
                ++served;
                worst = std::max(worst, std::fabs(p.value - gl[i]));
            }
        }
        pass = pass && worst < 1e-3 && served > 0;
        detail += fmt("%smax gap %.3g over %zu series points", detail.empty() ? "" : "; ", worst, served);
    }
    return {pass, detail + " (tol 1e-3)"};
}

Outcome criterion3() {
    const FracTransferFunction tf = FracTransferFunction::make(2.0, 1.0, 2.0, 1.0, 1.0);
    const double h = 1e-4;
    const std::size_t n = 100001;
    const std::vector<double> gl = gl_solve(tf, 1.0, h, n);
    double pos = 0.0;
    double vel = 0.0;
    auto acc = [&](double p, double v) { return tf.b0 - tf.a1 * v - tf.a0 * p; };
    double worst = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double k1p = vel, k1v = acc(pos, vel);
        const double k2p = vel + 0.5 * h * k1v, k2v = acc(pos + 0.5 * h * k1p, vel + 0.5 * h * k1v);
        const double k3p = vel + 0.5 * h * k2v, k3v = acc(pos + 0.5 * h * k2p, vel + 0.5 * h * k2v);
        const double k4p = vel + h * k3v, k4v = acc(pos + h * k3p, vel + h * k3v);
        pos += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        vel += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
        worst = std::max(worst, std::fabs(gl[i] - pos));
    }
    return {worst < 1e-4, fmt("max |GL - RK4| %.3g at h = 1e-4 (tol 1e-4)", worst)};
}

Outcome criterion4() {
    bool pass = true;
    std::string detail;
    for (const ParamVector& x : {kDesign1, kDesign2}) {
        const FracTransferFunction tf = tf_of(x);
        const double t = 10.0 * 2.0 * std::numbers::pi / std::sqrt(tf.a0);
        const std::vector<double> at{t};
        const double y = step_response(tf, at).values[0];
        const double err = std::fabs(y - dc_gain(tf));
        pass = pass && err < 1e-3;
        detail += fmt("%sy(%.2f) = %.6f vs %.6f", detail.empty() ? "" : "; ", t, y, dc_gain(tf));
    }
    return {pass, detail + " (tol 1e-3)"};
}

// Four 50-point responses of Design 1 at 30 degrees, normalized.
std::vector<Dataset> design1_data(double noise, std::uint64_t seed) {
    return {normalize(gen_synthetic(tf_of(kDesign1), SimGrid(9.8, 0.2), 30.0, 4, noise, seed))};
}

Outcome criterion5() {
    const std::vector<Dataset> data = design1_data(0.0, 0);
    int fit_ok = 0;
    int param_ok = 0;
    int both_ok = 0;
    double best_worst = 1e300;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        PsoConfig c;
        c.seed = seed;
        const FitResult r = run_pso(c, data);
        double worst = 0.0;
        for (std::size_t d = 0; d < 5; ++d) {
            worst = std::max(worst, std::fabs(r.best_position[d] - kDesign1[d]) / kDesign1[d]);
        }
        best_worst = std::min(best_worst, worst);
        const bool f = r.best_fitness < 1e-3;
        const bool p = worst <= 0.05;
        fit_ok += f;
        param_ok += p;
        both_ok += f && p;
    }
    return {both_ok >= 9, fmt("%d/10 runs recover (fitness < 1e-3: %d, all params within 5%%: %d, "
                              "smallest worst-parameter error %.1f%%; need 9)",
                              both_ok, fit_ok, param_ok, 100.0 * best_worst)};
}

Outcome criterion6() {
    int ok = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const std::vector<Dataset> train = design1_data(0.01, 1000 + seed);
        const std::vector<Dataset> heldout = design1_data(0.01, 2000 + seed);
        PsoConfig c;
        c.seed = seed;
        const FitResult r = run_pso(c, train);
        const double rmse = FitnessFunction(heldout)(r.best_position);
        worst = std::max(worst, rmse);
        ok += rmse < 0.02;
    }
    return {ok >= 8, fmt("%d/10 runs with held-out RMSE < 0.02 (worst %.4f; need 8)", ok, worst)};
}

Outcome criterion7() {
    const double p1 = std::round(percent_of_setpoint(1.24, 30.0) * 100.0) / 100.0;
    const double p2 = std::round(percent_of_setpoint(2.52, 60.0) * 10.0) / 10.0;
    return {p1 == 4.13 && p2 == 4.2, fmt("(1.24, 30) -> %.2f%%, (2.52, 60) -> %.1f%%", p1, p2)};
}

Outcome criterion8() {
    std::mt19937_64 rng(8);
    const ParamBounds b = ParamBounds::widened();
    int monotone = 0;
    int runs = 0;
    while (runs < 100) {
        ParamVector x{};
        for (std::size_t d = 0; d < 5; ++d) {
            x[d] = std::uniform_real_distribution<double>(b.lower[d], b.upper[d])(rng);
        }
        if (!FracTransferFunction::from_vector(x)) {
            continue;
        }
        const std::vector<Dataset> data{
            normalize(gen_synthetic(tf_of(x), SimGrid(9.6, 0.4), 30.0, 1, 0.01, rng()))};
        PsoConfig c;
        c.swarm_size = 8;
        c.iterations = 5;
        c.seed = rng();
        c.synchronous = runs % 2 == 1;
        const FitResult r = run_pso(c, data);
        bool ok = r.best_fitness == r.history.back();
        for (std::size_t i = 1; i < r.history.size(); ++i) {
            ok = ok && r.history[i] <= r.history[i - 1];
        }
        monotone += ok;
        ++runs;
    }
    return {monotone == 100, fmt("%d/100 runs with non-increasing global-best history", monotone)};
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion9(const std::string& exe) {
    const fs::path root = fs::temp_directory_path() / ("fracfit_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string common = R"("model": {"preset": "dragonskin20"},
        "pso": {"swarm_size": 6, "iterations": 2},
        "synth": {"n_trials": 4, "noise_sigma": 0.01, "name": "d1"},
        "validate": {"counts": [1, 4], "heldout_trials": 2})";
    std::ofstream(root / "run.json") << "{" << common << "}";
    // compare needs a baseline, simulate rejects a second model block.
    std::ofstream(root / "compare.json")
        << "{" << common << R"(, "baseline": {"k_np": 1.638, "c_np": 1.0, "force": 0.934}})";

    const std::string data = "--data " + (root / "data" / "d1.csv").string();
    const std::vector<std::pair<std::string, std::string>> commands{
        {"synth", "--config " + (root / "run.json").string()},
        {"simulate", "--config " + (root / "run.json").string()},
        {"fit", "--config " + (root / "run.json").string() + " " + data},
        {"compare", "--config " + (root / "compare.json").string() + " " + data},
        {"validate", "--config " + (root / "run.json").string()},
    };
    // Fixed input for fit and compare.
    const std::string make_data =
        exe + " --config " + (root / "run.json").string() + " --seed 7 --out " + (root / "data").string() + " synth";
    if (std::system((make_data + " 2>/dev/null").c_str()) != 0) {
        return {false, "could not create input data"};
    }

    int identical = 0;
    std::string detail;
    for (const auto& [name, extra] : commands) {
        std::array<std::string, 2> snapshots;
        bool ran = true;
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path out = root / (name + std::to_string(rep));
            const std::string cmd =
                exe + " " + extra + " --seed 7 --out " + out.string() + " " + name + " 2>/dev/null";
            ran = ran && std::system(cmd.c_str()) == 0;
            if (!fs::exists(out)) {
                break;
            }
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(out)) {
                files.push_back(e.path());
            }
            std::sort(files.begin(), files.end());
            for (const fs::path& f : files) {
                snapshots[static_cast<std::size_t>(rep)] += f.filename().string() + '\n' + read_file(f);
            }
        }
        const bool same = ran && !snapshots[0].empty() && snapshots[0] == snapshots[1];
        identical += same;
        detail += (detail.empty() ? "" : ", ") + name + (same ? " identical" : " DIFFERS");
    }
    fs::remove_all(root);
    return {identical == static_cast<int>(commands.size()), detail};
}

}  // namespace

int main(int argc, char** argv) {
    set_log_threshold(LogLevel::Error);
    const std::string exe = argc > 1 ? argv[1] : "fracfit";
    // Optional criterion numbers after the executable restrict the run.
    std::vector<int> only;
    for (int i = 2; i < argc; ++i) {
        only.push_back(std::atoi(argv[i]));
    }
    int ran = 0;
    auto run = [&](int id, const std::string& name, double limit, const std::function<Outcome()>& body) {
        if (only.empty() || std::find(only.begin(), only.end(), id) != only.end()) {
            report(id, name, limit, body);
            ++ran;
        }
    };

    run(1, "Mittag-Leffler exponential identities", 1.0, criterion1);
    run(2, "series vs Grunwald-Letnikov, both designs, 1 ms on [0, 10]", 30.0, criterion2);
    run(3, "alpha2 = 2, alpha1 = 1 vs RK4 on [0, 10]", 5.0, criterion3);
    run(4, "final value by t = 10 * 2 pi / sqrt(a0)", 0.0, criterion4);
    run(5, "PSO recovery, noise-free, 200 x 10, 10 seeds", 300.0, criterion5);
    run(6, "held-out RMSE with 1% noise, 10 seeds", 0.0, criterion6);
    run(7, "rmse_percent arithmetic", 0.0, criterion7);
    run(8, "monotone global best, 100 random targets", 0.0, criterion8);
    run(9, "byte-identical CLI reruns", 0.0, [&] { return criterion9(exe); });

    std::printf("%d of %d criteria failed\n", failures, ran);
    return failures == 0 ? 0 : 1;
}
