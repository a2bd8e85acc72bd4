// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "sentinel/cases.hpp"
#include "sentinel/csv_io.hpp"
#include "sentinel/dynsim.hpp"
#include "sentinel/rmt.hpp"
#include "sentinel/test_function.hpp"

using namespace sentinel;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

double tau_of(const Eigen::MatrixXd& g, const TestFunction& phi) {
    return rmt::les(rmt::eigenvalues_sym(rmt::covariance(rmt::DataMatrix(g))), phi);
}

Eigen::MatrixXd gaussian(Eigen::Index n, Eigen::Index t, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Eigen::MatrixXd m(n, t);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < t; ++j) m(i, j) = nd(rng);
    return m;
}

Outcome mp_fidelity() {
    const double c = 0.25;
    const auto g = rmt::gen_test_matrix(200, 800, rmt::Distribution::gaussian, 2024);
    const auto eig = rmt::eigenvalues_sym(rmt::covariance(g));
    const auto law = rmt::mp_support(c);
    bool inside = true;
    for (double l : eig) inside = inside && l >= law.lower - 0.3 && l <= law.upper + 0.3;
    double ks = 0.0;
    const double n = static_cast<double>(eig.size());
    for (std::size_t i = 0; i < eig.size(); ++i) {
        const double f = rmt::mp_cdf(eig[i], c);
        ks = std::max({ks, std::abs(static_cast<double>(i + 1) / n - f), std::abs(static_cast<double>(i) / n - f)});
    }
    return {inside && ks < 0.05,
            fmt("eigenvalues in [%.4f, %.4f] (bounds [0.7, 9.3]), KS distance %.4f (< 0.05)", eig.front(),
                eig.back(), ks)};
}

Outcome lln() {
    const std::size_t n = 400, t = 1600;
    const double c = 0.25;
    const auto g = rmt::gen_test_matrix(n, t, rmt::Distribution::gaussian, 7);
    const auto eig = rmt::eigenvalues_sym(rmt::covariance(g));
    bool ok = true;
    std::string detail;
    for (const char* name : {"identity", "square", "log"}) {
        const auto phi = TestFunction::parse(name);
        const double ratio = rmt::les(eig, phi) / rmt::les_mean(phi, n, c);
        ok = ok && ratio >= 0.98 && ratio <= 1.02;
        detail += fmt("%s tau/E tau = %.5f; ", name, ratio);
    }
    const double mean_id = rmt::les_mean(TestFunction::identity(), n, c);
    const bool exact = std::abs(mean_id - static_cast<double>(t)) <= 1e-8 * static_cast<double>(t);
    detail += fmt("E tau(identity) = %.10f (T = %zu)", mean_id, t);
    return {ok && exact, detail};
}

std::vector<double> mc_taus;

Outcome clt_variance() {
    bool closed = true;
    std::string detail = "closed form:";
    for (auto [c, k4] : std::vector<std::pair<double, double>>{{0.25, 0.0}, {0.5, 1.0}, {1.0, -2.0}}) {
        const double v = rmt::les_variance(TestFunction::identity(), {c, k4});
        const double expect = (2.0 + k4) / c;
        closed = closed && std::abs(v - expect) <= 1e-6;
        detail += fmt(" (c=%.2f,k4=%g) %.9f vs %.9f;", c, k4, v, expect);
    }
    const std::size_t n = 100, t = 400, trials = 2000;
    const auto phi = TestFunction::power(2);
    mc_taus.clear();
    for (std::size_t s = 0; s < trials; ++s) {
        mc_taus.push_back(tau_of(rmt::gen_test_matrix(n, t, rmt::Distribution::gaussian, 100000 + s).values(), phi));
    }
    const double emp = oracle::variance(mc_taus);
    const double quad = rmt::les_variance(phi, {0.25, 0.0});
    const double rel = std::abs(emp - quad) / quad;
    detail += fmt(" Monte Carlo Var(tau) = %.2f vs %.2f (rel. diff %.3f < 0.10)", emp, quad, rel);
    return {closed && rel < 0.10, detail};
}

Outcome clt_normality() {
    if (mc_taus.empty()) clt_variance();
    const double m = oracle::mean(mc_taus);
    const double sd = std::sqrt(oracle::variance(mc_taus));
    std::vector<double> z;
    for (double v : mc_taus) z.push_back((v - m) / sd);
    const double skew = oracle::skewness(z);
    const double kurt = oracle::excess_kurtosis(z);
    return {std::abs(skew) < 0.15 && std::abs(kurt) < 0.3,
            fmt("skewness %.4f (|.| < 0.15), excess kurtosis %.4f (|.| < 0.3)", skew, kurt)};
}

Outcome lorenz_reproduction() {
    const auto r = cases::run_lorenz_case(cases::lorenz_case_config());
    std::string detail;
    for (const auto& c : r.checks) detail += (c.pass ? "[ok] " : "[x] ") + c.detail + "; ";
    return {r.passed(), detail};
}

Outcome fault_reproduction() {
    const auto r = cases::run_fault_case({}, 1);
    std::string detail;
    for (const auto& c : r.checks) detail += (c.pass ? "[ok] " : "[x] ") + c.name + ": " + c.detail + "; ";
    return {r.passed(), detail};
}

Outcome integrator_order() {
    dynsim::Dynamics f = [](std::span<const double> x, double, std::span<double> d) {
        d[0] = 10.0 * (x[1] - x[0]);
        d[1] = 28.0 * x[0] - x[1] - x[0] * x[2];
        d[2] = -8.0 / 3.0 * x[2] + x[0] * x[1];
    };
    auto run = [&](double dt) {
        dynsim::State x{1.0, 1.0, 1.0};
        const auto steps = static_cast<int>(std::lround(1.0 / dt));
        for (int i = 0; i < steps; ++i) x = dynsim::rk4_step(x, i * dt, dt, f);
        return x;
    };
    auto err = [](const dynsim::State& a, const dynsim::State& b) {
        return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
    };
    const double dt = 0.001;
    const auto ref = run(dt / 100.0);
    const double e1 = err(run(dt), ref);
    const double e2 = err(run(dt / 2.0), ref);
    const double ratio = e1 / e2;
    return {std::abs(ratio - 16.0) <= 0.2 * 16.0,
            fmt("error(dt=%.3g) = %.3e, error(dt/2) = %.3e, ratio %.3f (16 +/- 20%%)", dt, e1, e2, ratio)};
}

Outcome invariance_suite() {
    std::mt19937_64 rng(8);
    double worst_orth = 0.0, worst_perm = 0.0, worst_trace = 0.0;
    const double coef[4] = {1.0, 2.0, -0.5, 0.1};
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::MatrixXd g = gaussian(20, 100, rng);
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(100, 100, rng)).householderQ();
        Eigen::PermutationMatrix<Eigen::Dynamic> p(20);
        p.setIdentity();
        std::shuffle(p.indices().data(), p.indices().data() + 20, rng);

        const auto eig = rmt::eigenvalues_sym(rmt::covariance(rmt::DataMatrix(g)));
        const auto eig_q = rmt::eigenvalues_sym(rmt::covariance(rmt::DataMatrix(g * q)));
        const auto eig_p = rmt::eigenvalues_sym(rmt::covariance(rmt::DataMatrix(p * g)));
        // phi(l) = 1 + 2 l - 0.5 l^2 + 0.1 l^3 as a sum of power LES, and as Tr phi(M).
        double tau = 0.0, tau_q = 0.0, tau_p = 0.0;
        for (int k = 0; k <= 3; ++k) {
            const auto phi = TestFunction::power(k);
            tau += coef[k] * rmt::les(eig, phi);
            tau_q += coef[k] * rmt::les(eig_q, phi);
            tau_p += coef[k] * rmt::les(eig_p, phi);
        }
        const Eigen::MatrixXd m = rmt::covariance(rmt::DataMatrix(g)).values();
        const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(20, 20);
        const double tr = (coef[0] * id + coef[1] * m + coef[2] * m * m + coef[3] * m * m * m).trace();
        const double scale = std::abs(tau);
        worst_orth = std::max(worst_orth, std::abs(tau_q - tau) / scale);
        worst_perm = std::max(worst_perm, std::abs(tau_p - tau) / scale);
        worst_trace = std::max(worst_trace, std::abs(tr - tau) / scale);
    }
    return {worst_orth < 1e-8 && worst_perm < 1e-8 && worst_trace < 1e-8,
            fmt("max relative deviation over 100 trials: orthogonal %.2e, permutation %.2e, trace identity %.2e "
                "(< 1e-8)",
                worst_orth, worst_perm, worst_trace)};
}

Outcome determinism() {
    const fs::path base = fs::temp_directory_path() / ("sentinel_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(base);
    fs::create_directories(base);
    std::vector<fs::path> dirs = {base / "run1", base / "run2"};
    for (const auto& d : dirs) {
        const std::string cmd = std::string(SENTINEL_CLI) + " reproduce lorenz --seed 42 --out " + d.string() + " > " +
                                (d.string() + ".log") + " 2>&1";
        const int status = std::system(cmd.c_str());
        if (!WIFEXITED(status) || WEXITSTATUS(status) > 1) {
            fs::remove_all(base);
            return {false, "reproduce lorenz failed to run: " + cmd};
        }
    }
    std::size_t files = 0;
    bool same = true;
    std::string differing;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
        ++files;
        const auto other = dirs[1] / entry.path().filename();
        if (!fs::exists(other) || io::read_file(entry.path()) != io::read_file(other)) {
            same = false;
            differing += entry.path().filename().string() + " ";
        }
    }
    const auto count2 = static_cast<std::size_t>(std::distance(fs::directory_iterator(dirs[1]), fs::directory_iterator{}));
    fs::remove_all(base);
    same = same && files == count2 && files > 0;
    return {same, same ? fmt("%zu output files byte-identical across two runs", files)
                       : "differing files: " + differing};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
        double budget_s;
    };
    const std::vector<Criterion> criteria = {
        {1, "MP-law fidelity", mp_fidelity, 5.0},
        {2, "LLN mean", lln, 0.0},
        {3, "CLT variance", clt_variance, 60.0},
        {4, "CLT normality", clt_normality, 0.0},
        {5, "Lorenz reproduction", lorenz_reproduction, 30.0},
        {6, "Fault-case reproduction", fault_reproduction, 0.0},
        {7, "Integrator order", integrator_order, 0.0},
        {8, "Invariance suite", invariance_suite, 0.0},
        {9, "Determinism", determinism, 0.0},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0.0 && secs >= c.budget_s) {
            o.pass = false;
            o.detail += fmt(" [runtime %.2f s exceeds %.0f s]", secs, c.budget_s);
        }
        std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
