// End-to-end acceptance checks. One PASS/FAIL line per criterion row; exit status 1 if any
// row fails. Printed reference values are -E~ with the published number of digits, and a
// row passes when the computed value is within one unit of the last printed digit.

#include <bispectra/eigensolve.hpp>
#include <bispectra/operators.hpp>
#include <bispectra/potentials.hpp>
#include <bispectra/quadrature.hpp>
#include <bispectra/reference.hpp>
#include <bispectra/sweep.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace bispectra;

namespace {

int failures = 0;

void report(bool ok, const std::string& id, const std::string& detail) {
    std::printf("%s  %-12s %s\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

double unit_of(const std::string& printed) {
    const auto dot = printed.find('.');
    return std::pow(10.0, -static_cast<double>(printed.size() - dot - 1));
}

// computed is E~, printed is -E~ as published.
void digits_row(const std::string& id, const std::string& what, double computed, const std::string& printed) {
    const double target = std::stod(printed), unit = unit_of(printed);
    const double diff = std::abs(-computed - target);
    report(diff <= unit * (1 + 1e-9), id, what + ": -E = " + fmt("%.13f", -computed) + " vs " + printed + " (|diff| " + fmt("%.2e", diff) +
                                              ", unit " + fmt("%.0e", unit) + ")");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const SweepRecord<double>* find(const std::vector<SweepRecord<double>>& rs, double q, int n, int angular, std::optional<int> orbital = {}) {
    for (const auto& r : rs) {
        if (r.Q == q && r.label.n == n && r.label.angular == angular && (!orbital || r.label.orbital == orbital)) return &r;
    }
    return nullptr;
}

SweepResult<double> sweep(Equation eq, PotentialKind pot, std::vector<int> angular, int levels, std::vector<double> qs) {
    SweepConfig<double> cfg;
    cfg.equation = eq;
    cfg.potential = pot;
    cfg.angular = std::move(angular);
    cfg.levels = levels;
    cfg.q_list = std::move(qs);
    auto r = run_sweep(cfg);
    for (const auto& f : r.failures) std::printf("      failure Q=%g angular=%d: %s\n", f.Q, f.angular, f.reason.c_str());
    for (const auto& d : r.diagnostics) std::printf("      diagnostic %s\n", d.c_str());
    return r;
}

// Both members of a Dirac pair, deeper first.
std::vector<double> pair_of(const std::vector<SweepRecord<double>>& rs, double q, int n, int kappa) {
    std::vector<double> e;
    for (const auto& r : rs)
        if (r.Q == q && r.label.n == n && r.label.angular == kappa) e.push_back(r.e_tilde);
    std::sort(e.begin(), e.end());
    return e;
}

double dirac_second_level(std::size_t n) {
    const RadialGrid<double> g(100.0, n);
    const auto d = assemble_dirac(g, sample_on_grid(PotentialSpec<double>::coulomb(), g), 1);
    return tilde_from_edge_offset(shift_invert_bound_states<double>(d, 3, 1e-10).edge_offsets[2]);
}

// ---------------------------------------------------------------------------------------

void table1() {
    std::printf("== 1. Dirac-Coulomb levels (rho_inf = 100, N = 20000)\n");
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = sweep(Equation::Dirac, PotentialKind::Coulomb, {1, 2}, 3, {1.0});

    const auto* ground = find(r.records, 1.0, 1, 1);
    if (!ground) {
        report(false, "1.ground", "n=1 kappa=1 missing");
    } else {
        const double diff = std::abs(ground->e_tilde + 1.000013313195);
        report(diff <= 1e-9, "1.ground", "n=1 kappa=1: -E = " + fmt("%.13f", -ground->e_tilde) + " vs 1.000013313195 (|diff| " +
                                             fmt("%.2e", diff) + ", tol 1e-9)");
    }

    struct Row {
        int n, kappa;
        const char* printed;
    };
    for (const Row row : {Row{2, 1, ".2500049"}, Row{3, 1, ".1111129"}, Row{2, 2, ".250000832055"}, Row{3, 2, ".11111164"}}) {
        const auto e = pair_of(r.records, 1.0, row.n, row.kappa);
        const std::size_t expected = row.n > row.kappa ? 2 : 1;
        const std::string id = "1.(" + std::to_string(row.n) + "," + std::to_string(row.kappa) + ")";
        if (e.size() != expected) {
            report(false, id, "expected " + std::to_string(expected) + " levels, found " + std::to_string(e.size()));
            continue;
        }
        for (std::size_t i = 0; i < e.size(); ++i) {
            digits_row(id + (expected == 2 ? (i == 0 ? "a" : "b") : ""), "n=" + std::to_string(row.n) + " kappa=" + std::to_string(row.kappa), e[i],
                       row.printed);
        }
    }

    // Order of convergence toward the closed form. The ground state is exact to rounding on
    // every grid, so the fit uses the upper n = 2, kappa = 1 level.
    const double exact = dirac_coulomb_exact(2, 1);
    const double e1 = std::abs(dirac_second_level(5000) - exact), e2 = std::abs(dirac_second_level(10000) - exact),
                 e3 = std::abs(dirac_second_level(20000) - exact);
    const double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
    report(std::abs(p1 - 2) <= 0.2 && std::abs(p2 - 2) <= 0.2, "1.order",
           "N = 5000/10000/20000 errors " + fmt("%.2e", e1) + " " + fmt("%.2e", e2) + " " + fmt("%.2e", e3) + ", orders " + fmt("%.3f", p1) + " " +
               fmt("%.3f", p2) + " (2 +- 0.2)");

    const double t = seconds_since(t0);
    report(t < 120, "1.time", fmt("%.1f s", t) + " (target 120 s)");
}

void table2() {
    std::printf("== 2. Schrodinger levels at a~ = a~_B\n");
    const auto t0 = std::chrono::steady_clock::now();
    struct Row {
        int n, l;
        const char* v2;
        const char* v1;
    };
    const std::vector<Row> rows = {{1, 0, "1.00033", ".999994"},  {2, 0, ".25004", ".2499996"},  {3, 0, ".11112", ".11111103"},
                                   {2, 1, ".250014", ".2500001"}, {3, 1, ".111115", ".11111117"}, {4, 1, ".06250178", ".06250003"}};
    for (const auto pot : {PotentialKind::BISelfField, PotentialKind::BITestParticle}) {
        const bool self = pot == PotentialKind::BISelfField;
        const auto r = sweep(Equation::Schrodinger, pot, {0, 1}, 3, {1.0});
        for (const auto& row : rows) {
            const std::string id = std::string("2.") + (self ? "V2" : "V1") + ".(" + std::to_string(row.n) + "," + std::to_string(row.l) + ")";
            const auto* rec = find(r.records, 1.0, row.n, row.l);
            if (!rec) {
                report(false, id, "level missing");
                continue;
            }
            digits_row(id, "n=" + std::to_string(row.n) + " l=" + std::to_string(row.l), rec->e_tilde, self ? row.v2 : row.v1);
        }
    }
    const double t = seconds_since(t0);
    report(t < 300, "2.time", fmt("%.1f s", t) + " (target 300 s)");
}

void table3() {
    std::printf("== 3. Dirac levels at a~ = a~_B\n");
    struct Row {
        int n, kappa;
        std::vector<const char*> v2, v1;
    };
    const std::vector<Row> rows = {{1, 1, {"1.00035"}, {"1.000013"}},
                                   {2, 1, {".250047", ".250019"}, {".2500049", ".2500049"}},
                                   {3, 1, {".111125", ".111117"}, {".1111129", ".1111129"}},
                                   {2, 2, {".2500148"}, {".25000083"}}};
    for (const auto pot : {PotentialKind::BISelfField, PotentialKind::BITestParticle}) {
        const bool self = pot == PotentialKind::BISelfField;
        const auto r = sweep(Equation::Dirac, pot, {1, 2}, 3, {1.0});
        for (const auto& row : rows) {
            const std::string id = std::string("3.") + (self ? "V2" : "V1") + ".(" + std::to_string(row.n) + "," + std::to_string(row.kappa) + ")";
            const auto& printed = self ? row.v2 : row.v1;
            const auto e = pair_of(r.records, 1.0, row.n, row.kappa);
            if (e.size() != printed.size()) {
                report(false, id, "expected " + std::to_string(printed.size()) + " levels, found " + std::to_string(e.size()));
                continue;
            }
            for (std::size_t i = 0; i < e.size(); ++i) {
                digits_row(id + (e.size() == 2 ? (i == 0 ? "a" : "b") : ""), "n=" + std::to_string(row.n) + " kappa=" + std::to_string(row.kappa), e[i],
                           printed[i]);
            }
        }
        if (self) {
            const auto s = degeneracy_splitting(r.records, 2, 1);
            const bool have = s.size() == 1 && s[0].delta();
            const double d = have ? *s[0].delta() : std::nan("");
            report(have && std::abs(d - 2.8e-5) <= 0.2e-5, "3.split", "V2 n=2 kappa=1 splitting " + fmt("%.3e", d) + " (2.8e-5 +- 0.2e-5)");
        }
    }
}

void figure1() {
    std::printf("== 4. Deviation signs and the kappa = 2 crossing\n");
    const auto coulomb = sweep(Equation::Schrodinger, PotentialKind::Coulomb, {0, 1}, 3, {1.0});
    auto deviations = [&](PotentialKind pot, const std::vector<double>& qs, auto accept, const std::string& id, const std::string& rule) {
        const auto r = sweep(Equation::Schrodinger, pot, {0, 1}, 3, qs);
        bool ok = r.failures.empty() && r.records.size() == 6 * qs.size();
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& rec : r.records) {
            const auto* c = find(coulomb.records, 1.0, rec.label.n, rec.label.angular);
            if (!c) {
                ok = false;
                continue;
            }
            const double dev = rec.e_tilde - c->e_tilde;
            lo = std::min(lo, dev);
            hi = std::max(hi, dev);
            ok = ok && accept(rec.Q, dev);
        }
        report(ok, id, rule + "; deviations span [" + fmt("%.3e", lo) + ", " + fmt("%.3e", hi) + "] over " + std::to_string(r.records.size()) + " levels");
    };
    // At a~_B the test-particle shift on this grid is ~1e-13, below the 1e-12 bracket of the
    // eigensolver, so its sign is only resolved from Q ~ 1e3 on.
    deviations(
        PotentialKind::BITestParticle, {1000, 5000, 10000, 30000}, [](double, double dev) { return dev > 0; }, "4a.V1",
        "V1 Schrodinger levels at Q = 1e3, 5e3, 1e4, 3e4 sit above Coulomb");
    deviations(
        PotentialKind::BISelfField, {1, 10, 100, 1000}, [](double, double dev) { return dev < 0; }, "4a.V2",
        "V2 Schrodinger levels at Q = 1, 10, 100, 1000 sit below Coulomb");

    std::vector<double> qs;
    for (int i = 0; i <= 8; ++i) qs.push_back(std::pow(10.0, -1 + i * 0.25) / born_a_tilde<double>());
    const auto r = sweep(Equation::Dirac, PotentialKind::BISelfField, {2}, 2, qs);
    const auto s = degeneracy_splitting(r.records, 3, 2);
    std::string trace;
    int positive = 0, negative = 0;
    bool complete = s.size() == qs.size();
    for (const auto& p : s) {
        if (!p.signed_delta) {
            complete = false;
            continue;
        }
        trace += " " + fmt("%.3g", p.a_tilde) + ":" + fmt("%+.2e", *p.signed_delta);
        if (*p.signed_delta > 0) ++positive;
        if (*p.signed_delta < 0) ++negative;
    }
    report(complete && positive > 0 && negative > 0, "4b.cross", "V2 Dirac kappa=2 n=3 signed splitting over a~ in [0.1, 10]:" + trace);
}

void figure2() {
    std::printf("== 5. Splitting below Born's value\n");
    std::vector<double> qs;
    for (int i = 0; i < 10; ++i) qs.push_back(std::pow(50.0, i / 9.0) / 50);
    qs.back() = 1.0;
    const auto r = sweep(Equation::Dirac, PotentialKind::BISelfField, {1}, 2, qs);
    const auto s = degeneracy_splitting(r.records, 2, 1);
    bool ok = s.size() == qs.size();
    std::string trace;
    for (const auto& p : s) {
        ok = ok && p.delta() && *p.delta() > 0;
        trace += " " + fmt("%.3g", p.Q) + ":" + (p.delta() ? fmt("%.2e", *p.delta()) : std::string("-"));
    }
    report(ok, "5.split", "V2 Dirac kappa=1 n=2 splitting at Q from 1/50 to 1 (Q:delta):" + trace);
}

// ---------------------------------------------------------------------------------------

void properties() {
    std::printf("== 6. Property suites\n");
    {
        using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
        struct Case {
            std::function<double(double)> f, smooth;
            double a, b, sa, sb;
        };
        const std::vector<Case> battery = {
            {[](double x) { return std::exp(x); }, nullptr, 0, 1, 0, 0},
            {[](double x) { return 1 / std::sqrt(1 + x * x * x * x); }, nullptr, 0, 3, 0, 0},
            {[](double x) { return 1 / (1 + x * x); }, nullptr, -1, 2, 0, 0},
            {[](double x) { return 1 / std::sqrt(x); }, [](double) { return 2.0; }, 0, 1, 0, 1},
            {[](double x) { return std::log(x); }, [](double t) { return 2 * t * std::log(t * t); }, 0, 1, 0, 1},
            {[](double x) { return std::cos(x) / std::sqrt(x); }, [](double t) { return 2 * std::cos(t * t); }, 0, 2, 0, std::sqrt(2.0)},
        };
        double worst = 0;
        for (const auto& c : battery) {
            double err = 0;
            const double gk = c.smooth ? GK::integrate(c.smooth, c.sa, c.sb, 15, 1e-14, &err) : GK::integrate(c.f, c.a, c.b, 15, 1e-14, &err);
            worst = std::max(worst, std::abs(integrate_tanh_sinh<double>(c.f, c.a, c.b).value - gk));
        }
        report(worst <= 1e-12, "6.quad", "tanh-sinh vs Gauss-Kronrod on " + std::to_string(battery.size()) + " integrals, worst " + fmt("%.2e", worst));
    }
    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> log_a(-6.0, 1.0);
        double worst = 0;
        for (int i = 0; i < 5; ++i) {
            const double a = std::pow(10.0, log_a(rng));
            worst = std::max(worst, std::abs(v1_test_particle(0.0, a) - v2_self_field(0.0, a)) / std::abs(v1_test_particle(0.0, a)));
        }
        report(worst <= 1e-13, "6.origin", "V1(0) = V2(0) for 5 random a~, worst relative gap " + fmt("%.2e", worst));
    }
    {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> log_a(-5.0, 0.0), far(50.0, 500.0), u(0.01, 3.0), lam(0.1, 10.0);
        double tail = 0, scale = 0;
        for (int i = 0; i < 20; ++i) {
            const double a = std::pow(10.0, log_a(rng)), rho = far(rng) * a;
            tail = std::max(tail, std::abs(v1_test_particle(rho, a) * rho + 1));
            const double r = u(rng), b = u(rng), l = lam(rng);
            scale = std::max(scale, std::abs(v1_test_particle(l * r, l * b) * l / v1_test_particle(r, b) - 1));
        }
        report(tail <= 1e-6 && scale <= 1e-13, "6.V1", "Coulomb tail |rho V1 + 1| " + fmt("%.2e", tail) + " (<= 1e-6), scale covariance " + fmt("%.2e", scale));
    }
    {
        const RadialGrid<double> g(10.0, 300);
        bool ok = true;
        for (const auto pot : {PotentialSpec<double>::coulomb(), PotentialSpec<double>::test_particle(0.3)}) {
            const auto d = assemble_dirac(g, sample_on_grid(pot, g), 2);
            for (std::size_t r = 0; r < d.size(); ++r)
                for (std::size_t c = r; c < std::min(d.size(), r + 5); ++c) ok = ok && d.entry(r, c) == d.entry(c, r);
        }
        report(ok, "6.symmetry", "Dirac matrix entries equal their transposes bit for bit");
    }
    {
        const RadialGrid<double> g(60.0, 600);
        const auto op = assemble_schrodinger(g, sample_on_grid(PotentialSpec<double>::test_particle(0.1), g), 1);
        const auto sturm = tridiag_smallest<double>(op, 4, 1e-14);
        EigenRequest<double> req;
        req.count = 4;
        req.target = EigenTarget<double>::nearest(-1.5);
        req.tol = 1e-12;
        const auto lz = lanczos_lowest(op, req);
        double worst = 0;
        for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(sturm.eigenvalues[i] - lz.eigenvalues[i]));
        report(worst <= 1e-10, "6.sturm", "bisection vs shift-invert Lanczos, lowest 4 levels, worst " + fmt("%.2e", worst));
    }
    {
        const RadialGrid<double> g(20.0, 200);
        const auto op = assemble_schrodinger(g, sample_on_grid(PotentialSpec<double>::coulomb(), g), 0);
        const auto n = static_cast<Eigen::Index>(op.size());
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            t(i, i) = op.diagonal()[static_cast<std::size_t>(i)];
            if (i + 1 < n) t(i, i + 1) = t(i + 1, i) = op.off_diagonal()[static_cast<std::size_t>(i)];
        }
        const Eigen::VectorXd dense_s = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t, Eigen::EigenvaluesOnly).eigenvalues();
        const auto sturm = tridiag_smallest<double>(op, 3, 1e-14);
        double worst_s = 0;
        for (std::size_t i = 0; i < 3; ++i) worst_s = std::max(worst_s, std::abs(sturm.eigenvalues[i] - dense_s(static_cast<Eigen::Index>(i))));

        const RadialGrid<double> gd(20.0, 100);
        const auto d = assemble_dirac(gd, sample_on_grid(PotentialSpec<double>::coulomb(), gd), 1);
        const auto m = static_cast<Eigen::Index>(d.size());
        Eigen::MatrixXd dm(m, m);
        for (Eigen::Index r = 0; r < m; ++r)
            for (Eigen::Index c = 0; c < m; ++c) dm(r, c) = d.entry(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
        const Eigen::VectorXd dense_d = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dm, Eigen::EigenvaluesOnly).eigenvalues();
        const auto si = shift_invert_bound_states<double>(d, 3, 1e-10);
        double worst_d = 0;
        std::size_t matched = 0;
        for (std::size_t i = 0; i < si.eigenvalues.size(); ++i) {
            double best = INFINITY;
            for (Eigen::Index k = 0; k < m; ++k) best = std::min(best, std::abs(dense_d(k) - si.eigenvalues[i]));
            worst_d = std::max(worst_d, best);
            ++matched;
        }
        report(worst_s <= 1e-10 && worst_d <= 1e-9 && matched == 3, "6.dense",
               "N <= 200 against dense eigensolvers: tridiagonal " + fmt("%.2e", worst_s) + ", Dirac " + fmt("%.2e", worst_d));
    }
    {
        SweepConfig<double> cfg;
        cfg.equation = Equation::Dirac;
        cfg.potential = PotentialKind::BITestParticle;
        cfg.angular = {1, 2};
        cfg.levels = 2;
        cfg.rho_inf = 60;
        cfg.grid_points = 3000;
        cfg.q_list = {0.5, 2.0};
        const auto r = run_sweep(cfg);
        const bool ok = !r.records.empty() && records_from_csv<double>(records_to_csv(r.records)) == r.records;
        report(ok, "6.csv", std::to_string(r.records.size()) + " records survive a CSV round trip bit for bit");
    }
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    table1();
    table2();
    table3();
    figure1();
    figure2();
    properties();
    std::printf("== %d failing row(s), %.1f s total\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
