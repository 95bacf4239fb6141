#pragma once

#include <bispectra/constants.hpp>
#include <bispectra/eigensolve.hpp>
#include <bispectra/manifest.hpp>
#include <bispectra/potentials.hpp>
#include <bispectra/reference.hpp>
#include <bispectra/svg.hpp>
#include <bispectra/sweep.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace bispectra::cli {

enum ExitCode : int { exit_ok = 0, exit_numerical = 1, exit_usage = 2 };

class usage_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// ---------------------------------------------------------------------------------------
// spectrum

struct SpectrumArgs {
    std::string equation = "schrodinger";
    std::string potential = "coulomb";
    std::optional<double> a_tilde;
    std::optional<double> Q;
    std::optional<int> ell;
    std::optional<int> kappa;
    int levels = 3;
    double rho_inf = 100;
    std::size_t grid = 20000;
    std::string out;
    std::string format = "csv";
};

struct ResolvedSpectrum {
    Equation equation;
    PotentialKind potential;
    double a_tilde = 0;  // 0 for Coulomb
    double Q = 0;
    int angular = 0;
};

inline ResolvedSpectrum resolve(const SpectrumArgs& a) {
    ResolvedSpectrum r;
    try {
        r.equation = parse_equation(a.equation);
        r.potential = parse_potential_kind(a.potential);
        parse_record_format(a.format);
    } catch (const domain_error& e) {
        throw usage_error(e.what());
    }
    if (r.equation == Equation::Dirac && a.ell) throw usage_error("--ell applies to schrodinger; use --kappa with dirac");
    if (r.equation == Equation::Schrodinger && a.kappa) throw usage_error("--kappa applies to dirac; use --ell with schrodinger");
    if (a.a_tilde && a.Q) throw usage_error("give either --a-tilde or --Q, not both");
    if (r.potential == PotentialKind::Coulomb) {
        if (a.a_tilde || a.Q) throw usage_error("--a-tilde/--Q do not apply to the coulomb potential");
    } else {
        if (!a.a_tilde && !a.Q) throw usage_error("--potential " + a.potential + " needs --a-tilde or --Q");
        r.a_tilde = a.a_tilde ? *a.a_tilde : *a.Q * born_a_tilde<double>();
        r.Q = a.Q ? *a.Q : *a.a_tilde / born_a_tilde<double>();
        if (!(r.a_tilde > 0) || !std::isfinite(r.a_tilde)) throw usage_error("a_tilde must be positive and finite");
    }
    r.angular = r.equation == Equation::Dirac ? a.kappa.value_or(1) : a.ell.value_or(0);
    if (r.equation == Equation::Dirac ? r.angular < 1 : r.angular < 0) throw usage_error("--kappa must be >= 1, --ell >= 0");
    if (a.levels < 1) throw usage_error("--levels must be >= 1");
    if (!(a.rho_inf > 0)) throw usage_error("--rho-inf must be positive");
    if (a.grid < 3) throw usage_error("--grid must be >= 3");
    return r;
}

inline int cmd_spectrum(const SpectrumArgs& args, std::ostream& out, std::ostream& err) {
    const ResolvedSpectrum r = resolve(args);
    const RadialGrid<double> grid(args.rho_inf, args.grid);
    ChannelOptions<double> opts;
    ChannelResult<double> ch;
    try {
        const PotentialSpec<double> spec = r.potential == PotentialKind::Coulomb ? PotentialSpec<double>::coulomb()
                                                                               : PotentialSpec<double>{r.potential, r.a_tilde};
        const auto samples = sample_on_grid(spec, grid);
        ch = solve_channel<double>(r.equation, samples, r.angular, args.levels, opts);
        if (r.equation == Equation::Dirac && r.potential != PotentialKind::Coulomb) {
            const auto reference = solve_channel<double>(r.equation, sample_on_grid(PotentialSpec<double>::coulomb(), grid), r.angular, args.levels, opts);
            flag_spurious(ch, reference);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_numerical;
    }

    out << "# equation=" << to_string(r.equation) << " potential=" << to_string(r.potential);
    if (r.potential != PotentialKind::Coulomb) out << " a_tilde=" << fmt("%.17g", r.a_tilde) << " Q=" << fmt("%.17g", r.Q);
    out << " rho_inf=" << fmt("%.17g", args.rho_inf) << " N=" << args.grid << "\n";
    out << "n\tangular\tE_tilde\tresidual\n";
    for (const auto& level : ch.spectrum.levels) {
        out << level.label.n << "\t" << level.label.angular_text() << "\t" << fmt("%.16f", level.e_tilde) << "\t" << fmt("%.2e", level.residual);
        if (level.oscillatory) out << "\t(oscillatory)";
        out << "\n";
    }

    const std::size_t expected = r.equation == Equation::Dirac ? 2 * static_cast<std::size_t>(args.levels) - 1 : static_cast<std::size_t>(args.levels);
    const double tol = r.equation == Equation::Dirac ? opts.dirac_tol : 1e-9;
    bool ok = ch.spectrum.levels.size() == expected;
    for (const auto& level : ch.spectrum.levels) ok = ok && level.residual <= tol && std::isfinite(level.e_tilde);
    for (const auto& d : ch.spectrum.diagnostics) err << "diagnostic: " << d << "\n";

    if (!args.out.empty()) {
        std::vector<SweepRecord<double>> records;
        for (const auto& level : ch.spectrum.levels) {
            records.push_back({r.equation, r.potential, r.a_tilde, r.Q, level.label, level.e_tilde, level.residual, args.rho_inf, args.grid});
        }
        RunManifest manifest;
        manifest.command = "spectrum";
        manifest.config = {{"equation", to_string(r.equation)},
                           {"potential", std::string(to_string(r.potential))},
                           {"a_tilde", r.a_tilde},
                           {"Q", r.Q},
                           {"angular", r.angular},
                           {"levels", args.levels},
                           {"rho_inf", args.rho_inf},
                           {"N", args.grid},
                           {"format", args.format}};
        try {
            write_records(records, args.out, parse_record_format(args.format));
            write_manifest(manifest, args.out);
        } catch (const io_error& e) {
            err << "error: " << e.what() << "\n";
            return exit_numerical;
        }
    }
    if (!ok) {
        err << "error: not every requested level converged\n";
        return exit_numerical;
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------------------
// validate

struct ValidateArgs {
    double rho_inf = 100;
    std::size_t grid = 20000;
    int kappa_max = 2;
    int n_max = 3;
};

inline int cmd_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err) {
    if (args.n_max < 1) throw usage_error("--n-max must be >= 1");
    if (args.kappa_max < 1) throw usage_error("--kappa-max must be >= 1");
    if (!(args.rho_inf > 0)) throw usage_error("--rho-inf must be positive");
    if (args.grid < 3) throw usage_error("--grid must be >= 3");

    const RadialGrid<double> grid(args.rho_inf, args.grid);
    const auto samples = sample_on_grid(PotentialSpec<double>::coulomb(), grid);
    out << "n kappa -E_num -E_exact diff\n";
    std::optional<double> ground_diff;
    bool solved_all = true;
    for (int kappa = 1; kappa <= std::min(args.kappa_max, args.n_max); ++kappa) {
        ChannelResult<double> ch;
        try {
            ch = solve_channel<double>(Equation::Dirac, samples, kappa, args.n_max - kappa + 1);
        } catch (const std::exception& e) {
            err << "error: kappa=" << kappa << ": " << e.what() << "\n";
            solved_all = false;
            continue;
        }
        for (const auto& d : ch.spectrum.diagnostics) err << "diagnostic: kappa=" << kappa << ": " << d << "\n";
        for (int n = kappa; n <= args.n_max; ++n) {
            // One row per (n, kappa); the l = kappa - 1 member stands for the cell.
            const SpectrumLevel<double>* level = nullptr;
            for (const auto& l : ch.spectrum.levels) {
                if (l.label.n == n && l.label.orbital == kappa - 1) level = &l;
            }
            const double exact = dirac_coulomb_exact<double>(n, kappa);
            if (!level) {
                out << n << " " << kappa << " - " << fmt("%.12f", -exact) << " -\n";
                solved_all = false;
                continue;
            }
            const double diff = std::abs(level->e_tilde - exact);
            out << n << " " << kappa << " " << fmt("%.12f", -level->e_tilde) << " " << fmt("%.12f", -exact) << " " << fmt("%.3e", diff) << "\n";
            if (n == 1 && kappa == 1) ground_diff = diff;
        }
    }
    if (!ground_diff) {
        err << "error: ground state (n=1, kappa=1) not computed\n";
        return exit_numerical;
    }
    if (!solved_all) err << "warning: some rows are missing\n";
    if (!(*ground_diff <= 1e-9)) {
        err << "error: ground-state difference " << fmt("%.3e", *ground_diff) << " exceeds 1e-9\n";
        return exit_numerical;
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------------------
// sweep

struct SweepArgs {
    std::string config_path;
    std::string equation = "dirac";
    std::string potential = "bi-self";
    std::vector<int> ell;
    std::vector<int> kappa;
    int levels = 3;
    double rho_inf = 100;
    std::size_t grid = 20000;
    std::optional<double> q_start, q_end, q_step;
    std::optional<std::string> q_list;
    std::string out;
    std::string format = "csv";
    std::string plot;
};

inline std::vector<double> parse_q_list(const std::string& text) {
    std::vector<double> qs;
    std::string item;
    std::string cleaned = text;
    for (char& c : cleaned) {
        if (c == ',' || c == '[' || c == ']' || c == ';') c = ' ';
    }
    std::istringstream in(cleaned);
    while (in >> item) {
        try {
            std::size_t used = 0;
            qs.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw usage_error("Q-list: '" + item + "' is not a number");
        }
    }
    if (qs.empty()) throw usage_error("Q-list: empty");
    return qs;
}

inline nlohmann::json sweep_config_to_json(const SweepConfig<double>& cfg) {
    const nlohmann::json j = {{"equation", to_string(cfg.equation)},
                        {"potential", std::string(to_string(cfg.potential))},
                        {"angular", cfg.angular},
                        {"levels", cfg.levels},
                        {"rho_inf", cfg.rho_inf},
                        {"N", cfg.grid_points},
                        {"Q_list", cfg.schedule()}};  // resolved; a range is written out point by point
    return j;
}

/// SweepConfig from the JSON mirror. Errors name the offending field.
inline SweepConfig<double> sweep_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw usage_error("config: top level must be an object");
    static const std::vector<std::string> known = {"equation", "potential", "angular", "levels", "rho_inf", "N", "Q_list", "Q_start", "Q_end", "Q_step"};
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) throw usage_error("config: unknown field '" + key + "'");
    }
    SweepConfig<double> cfg;
    auto field = [&](const char* name, auto& target) {
        if (!j.contains(name)) return false;
        try {
            j.at(name).get_to(target);
        } catch (const nlohmann::json::exception&) {
            throw usage_error(std::string("config: field '") + name + "' has the wrong type");
        }
        return true;
    };
    std::string equation = "dirac", potential = "bi-self";
    field("equation", equation);
    field("potential", potential);
    try {
        cfg.equation = parse_equation(equation);
    } catch (const domain_error& e) {
        throw usage_error(std::string("config: field 'equation': ") + e.what());
    }
    try {
        cfg.potential = parse_potential_kind(potential);
    } catch (const domain_error& e) {
        throw usage_error(std::string("config: field 'potential': ") + e.what());
    }
    if (!field("angular", cfg.angular)) cfg.angular = {cfg.equation == Equation::Dirac ? 1 : 0};
    field("levels", cfg.levels);
    field("rho_inf", cfg.rho_inf);
    field("N", cfg.grid_points);
    const bool has_list = field("Q_list", cfg.q_list);
    QRange<double> range{};
    const int range_fields = int(field("Q_start", range.start)) + int(field("Q_end", range.end)) + int(field("Q_step", range.step));
    if (has_list && range_fields > 0) throw usage_error("config: give either 'Q_list' or 'Q_start'/'Q_end'/'Q_step'");
    if (range_fields > 0 && range_fields < 3) throw usage_error("config: 'Q_start', 'Q_end' and 'Q_step' go together");
    if (range_fields == 3) cfg.q_range = range;
    if (has_list && cfg.q_list.empty()) throw usage_error("config: field 'Q_list' is empty");
    try {
        cfg.validate();
    } catch (const domain_error& e) {
        throw usage_error(std::string("config: ") + e.what());
    }
    return cfg;
}

inline SweepConfig<double> resolve(const SweepArgs& a) {
    if (!a.config_path.empty()) {
        std::string text;
        try {
            text = read_text_file(a.config_path);
        } catch (const io_error& e) {
            throw usage_error(e.what());
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw usage_error("config: " + std::string(e.what()));
        }
        return sweep_config_from_json(j);
    }
    nlohmann::json j = {{"equation", a.equation}, {"potential", a.potential}, {"levels", a.levels}, {"rho_inf", a.rho_inf}, {"N", a.grid}};
    if (!a.ell.empty() && !a.kappa.empty()) throw usage_error("give --ell or --kappa, not both");
    if (a.equation == "dirac" && !a.ell.empty()) throw usage_error("--ell applies to schrodinger; use --kappa with dirac");
    if (a.equation == "schrodinger" && !a.kappa.empty()) throw usage_error("--kappa applies to dirac; use --ell with schrodinger");
    if (!a.ell.empty()) j["angular"] = a.ell;
    if (!a.kappa.empty()) j["angular"] = a.kappa;
    const bool any_range = a.q_start || a.q_end || a.q_step;
    if (a.q_list && any_range) throw usage_error("give --Q-list or --Q-start/--Q-end/--Q-step, not both");
    if (a.q_list) {
        j["Q_list"] = parse_q_list(*a.q_list);
    } else if (any_range) {
        if (!(a.q_start && a.q_end && a.q_step)) throw usage_error("--Q-start, --Q-end and --Q-step go together");
        j["Q_start"] = *a.q_start;
        j["Q_end"] = *a.q_end;
        j["Q_step"] = *a.q_step;
    } else {
        throw usage_error("no Q schedule: give --config, --Q-list or --Q-start/--Q-end/--Q-step");
    }
    return sweep_config_from_json(j);
}

inline int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
    RecordFormat format;
    try {
        format = parse_record_format(args.format);
    } catch (const domain_error& e) {
        throw usage_error(e.what());
    }
    const SweepConfig<double> cfg = resolve(args);
    const auto result = run_sweep(cfg);
    for (const auto& d : result.diagnostics) err << "diagnostic: " << d << "\n";
    for (const auto& f : result.failures) {
        err << "failure: Q=" << fmt("%.17g", f.Q) << " angular=" << f.angular << ": " << f.reason << "\n";
    }
    try {
        if (args.out.empty()) {
            out << (format == RecordFormat::CSV ? records_to_csv(result.records) : records_to_json(result.records).dump(2) + "\n");
        } else {
            write_records(result.records, args.out, format);
            RunManifest manifest;
            manifest.command = "sweep";
            manifest.config = sweep_config_to_json(cfg);
            manifest.config["format"] = args.format;
            write_manifest(manifest, args.out);
        }
        if (!args.plot.empty()) {
            const std::string title = to_string(cfg.equation) + ", " + std::string(to_string(cfg.potential));
            write_text_file(args.plot, render_svg(sweep_chart(result.records, title)));
        }
    } catch (const io_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_numerical;
    }
    return result.failures.empty() ? exit_ok : exit_numerical;
}

// ---------------------------------------------------------------------------------------
// entry point

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hydrogen bound-state spectra under Coulomb and Born-Infeld potentials", "bispectra"};
    app.require_subcommand(1);
    app.set_version_flag("--version", BISPECTRA_VERSION);

    SpectrumArgs sp;
    auto* spectrum = app.add_subcommand("spectrum", "Bound levels of one angular channel");
    spectrum->add_option("--equation", sp.equation, "schrodinger or dirac")->capture_default_str();
    spectrum->add_option("--potential", sp.potential, "coulomb, bi-test or bi-self")->capture_default_str();
    spectrum->add_option("--a-tilde", sp.a_tilde, "BI parameter a~ (Bohr radii)");
    spectrum->add_option("--Q", sp.Q, "BI parameter as a multiple of Born's value, a~ = Q a~_B");
    spectrum->add_option("--ell", sp.ell, "orbital quantum number l (schrodinger, default 0)");
    spectrum->add_option("--kappa", sp.kappa, "kappa = j + 1/2 (dirac, default 1)");
    spectrum->add_option("--levels", sp.levels, "principal quantum numbers to report")->capture_default_str();
    spectrum->add_option("--rho-inf", sp.rho_inf, "artificial infinity")->capture_default_str();
    spectrum->add_option("--grid", sp.grid, "grid points N")->capture_default_str();
    spectrum->add_option("--out", sp.out, "write records to this file (plus a .manifest.json)");
    spectrum->add_option("--format", sp.format, "csv or json")->capture_default_str();

    ValidateArgs va;
    auto* validate = app.add_subcommand("validate", "Compare Dirac-Coulomb levels with the closed form");
    validate->add_option("--rho-inf", va.rho_inf, "artificial infinity")->capture_default_str();
    validate->add_option("--grid", va.grid, "grid points N")->capture_default_str();
    validate->add_option("--kappa-max", va.kappa_max, "largest kappa")->capture_default_str();
    validate->add_option("--n-max", va.n_max, "largest n")->capture_default_str();

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Spectra over a schedule of a~ = Q a~_B");
    sweep->add_option("--config", sw.config_path, "JSON sweep configuration (replaces the inline flags)");
    sweep->add_option("--equation", sw.equation, "schrodinger or dirac")->capture_default_str();
    sweep->add_option("--potential", sw.potential, "coulomb, bi-test or bi-self")->capture_default_str();
    sweep->add_option("--ell", sw.ell, "l values (schrodinger)")->delimiter(',');
    sweep->add_option("--kappa", sw.kappa, "kappa values (dirac)")->delimiter(',');
    sweep->add_option("--levels", sw.levels, "principal quantum numbers per channel")->capture_default_str();
    sweep->add_option("--rho-inf", sw.rho_inf, "artificial infinity")->capture_default_str();
    sweep->add_option("--grid", sw.grid, "grid points N")->capture_default_str();
    sweep->add_option("--Q-start", sw.q_start, "first Q of a range");
    sweep->add_option("--Q-end", sw.q_end, "last Q of a range (inclusive)");
    sweep->add_option("--Q-step", sw.q_step, "Q increment");
    sweep->add_option("--Q-list", sw.q_list, "explicit comma-separated Q values");
    sweep->add_option("--out", sw.out, "CSV/JSON output path (default: standard output)");
    sweep->add_option("--format", sw.format, "csv or json")->capture_default_str();
    sweep->add_option("--plot", sw.plot, "write an SVG of E~ against a~");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }
    try {
        if (*spectrum) return cmd_spectrum(sp, out, err);
        if (*validate) return cmd_validate(va, out, err);
        if (*sweep) return cmd_sweep(sw, out, err);
    } catch (const usage_error& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_numerical;
    }
    return exit_usage;
}

}  // namespace bispectra::cli
