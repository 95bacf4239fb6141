#pragma once

#include <bispectra/constants.hpp>
#include <bispectra/eigensolve.hpp>
#include <bispectra/errors.hpp>
#include <bispectra/grid.hpp>
#include <bispectra/operators.hpp>
#include <bispectra/potentials.hpp>
#include <bispectra/reference.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace bispectra {

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------------------
// One channel

template <typename Real = double>
struct ChannelOptions {
    /// Bisection bracket width for Schrodinger levels (relative to max(1, |E~|)).
    Real schrodinger_tol = Real(1e-12);
    /// Direct residual bound ||D x - lambda x|| for Dirac levels.
    Real dirac_tol = Real(1e-9);
    BoundStateOptions<Real> dirac{};
    /// Compare Dirac eigenvector roughness against the Coulomb states of the same labels.
    bool screen_spurious = true;
};

template <typename Real = double>
struct ChannelResult {
    Spectrum<Real> spectrum;
    /// Dirac only: sum of squared neighbour differences of the large component over its
    /// squared norm, per level in spectrum order.
    std::vector<Real> oscillation;
};

/// Bound levels of one angular channel (l for Schrodinger, kappa for Dirac): `levels`
/// principal quantum numbers starting at the lowest one the channel allows. Dirac cells with
/// n > kappa hold two levels, l = kappa - 1 and l = kappa.
template <typename Real = double>
ChannelResult<Real> solve_channel(Equation eq, const PotentialSamples<Real>& samples, int angular, int levels,
                                  const ChannelOptions<Real>& opts = {}) {
    if (levels < 1) {
        throw domain_error("solve_channel: levels must be >= 1");
    }
    ChannelResult<Real> out;
    const auto& grid = samples.grid;
    if (eq == Equation::Schrodinger) {
        const auto op = assemble_schrodinger(grid, samples, angular);
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(levels), grid.size());
        const auto res = tridiag_smallest<Real>(op, k, opts.schrodinger_tol);
        const std::vector<int> none;
        out.spectrum = label_by_branch<Real>(eq, angular, levels, res.eigenvalues, res.residual_norms, none);
        return out;
    }

    const auto op = assemble_dirac(grid, samples, angular);
    const std::size_t want = 2 * static_cast<std::size_t>(levels) + 1;
    const auto res = shift_invert_bound_states<Real>(op, want, opts.dirac_tol, opts.dirac);
    std::vector<Real> e(res.edge_offsets.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = tilde_from_edge_offset(res.edge_offsets[i]);
    const auto orbitals = dirac_orbitals<Real>(res, angular);
    out.spectrum = label_by_branch<Real>(eq, angular, levels, e, res.residual_norms, orbitals);
    for (const auto& d : res.diagnostics) out.spectrum.diagnostics.push_back(d);

    for (const auto& level : out.spectrum.levels) {
        std::size_t col = 0;
        while (col < e.size() && e[col] != level.e_tilde) ++col;
        out.oscillation.push_back(oscillation_energy<Real>(res.eigenvectors->col(static_cast<Eigen::Index>(col)), false));
        if (!(level.residual <= opts.dirac_tol)) {
            std::ostringstream msg;
            msg.precision(3);
            msg << "n=" << level.label.n << " " << level.label.angular_text() << ": residual " << level.residual
                << " above " << opts.dirac_tol;
            out.spectrum.diagnostics.push_back(msg.str());
        }
    }
    return out;
}

/// Flag levels whose oscillation energy exceeds `factor` times that of the reference level
/// with the same label.
template <typename Real = double>
void flag_spurious(ChannelResult<Real>& result, const ChannelResult<Real>& reference, Real factor = Real(10)) {
    for (std::size_t i = 0; i < result.spectrum.levels.size() && i < result.oscillation.size(); ++i) {
        auto& level = result.spectrum.levels[i];
        for (std::size_t r = 0; r < reference.spectrum.levels.size() && r < reference.oscillation.size(); ++r) {
            if (reference.spectrum.levels[r].label == level.label && result.oscillation[i] > factor * reference.oscillation[r]) {
                level.oscillatory = true;
                result.spectrum.diagnostics.push_back("n=" + std::to_string(level.label.n) + " " + level.label.angular_text() +
                                                      ": oscillation energy above " + std::to_string(static_cast<int>(factor)) +
                                                      "x the Coulomb state");
            }
        }
    }
}

// ---------------------------------------------------------------------------------------
// Sweeps

template <typename Real = double>
struct QRange {
    Real start;
    Real end;
    Real step;
};

template <typename Real = double>
struct SweepConfig {
    Equation equation = Equation::Schrodinger;
    PotentialKind potential = PotentialKind::Coulomb;
    std::vector<int> angular;  // l or kappa values
    int levels = 3;
    Real rho_inf = 100;
    std::size_t grid_points = 20000;
    /// a_tilde = Q * a_tilde_B. An explicit list wins over a range.
    std::vector<Real> q_list;
    std::optional<QRange<Real>> q_range;
    QuadratureConfig<Real> quadrature{};
    ChannelOptions<Real> channel{};

    std::vector<Real> schedule() const {
        if (!q_list.empty()) return q_list;
        std::vector<Real> qs;
        if (q_range) {
            const auto& r = *q_range;
            const auto steps = static_cast<long long>(std::floor((r.end - r.start) / r.step * (1 + Real(1e-12)) + Real(1e-9)));
            for (long long i = 0; i <= steps; ++i) qs.push_back(r.start + Real(i) * r.step);
        }
        return qs;
    }

    /// Throws domain_error naming the offending field.
    void validate() const {
        if (levels < 1) throw domain_error("levels: must be >= 1");
        if (!(rho_inf > 0)) throw domain_error("rho_inf: must be positive");
        if (grid_points < 3) throw domain_error("N: must be >= 3");
        for (int a : angular) {
            if (equation == Equation::Schrodinger ? a < 0 : a < 1) {
                throw domain_error(equation == Equation::Schrodinger ? "angular: l must be >= 0" : "angular: kappa must be >= 1");
            }
        }
        if (q_range && q_list.empty()) {
            const auto& r = *q_range;
            if (!(r.step > 0) || !(r.end >= r.start)) throw domain_error("Q_range: need step > 0 and end >= start");
        }
        const auto qs = schedule();
        if (qs.empty()) throw domain_error("Q: schedule is empty");
        for (Real q : qs) {
            if (!(q > 0) || !std::isfinite(q)) throw domain_error("Q: every value must be positive and finite");
        }
        quadrature.validate();
    }
};

template <typename Real = double>
struct SweepRecord {
    Equation equation = Equation::Schrodinger;
    PotentialKind potential = PotentialKind::Coulomb;
    Real a_tilde = 0;
    Real Q = 0;
    LevelLabel label;
    Real e_tilde = 0;
    Real residual = 0;
    Real rho_inf = 0;
    std::size_t grid_points = 0;

    friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

template <typename Real = double>
struct SweepFailure {
    Real Q = 0;
    Real a_tilde = 0;
    int angular = 0;
    std::string reason;
};

template <typename Real = double>
struct SweepResult {
    std::vector<SweepRecord<Real>> records;
    std::vector<SweepFailure<Real>> failures;
    std::vector<std::string> diagnostics;
};

/// Worker count from BI_SPECTRA_THREADS (unset or 0: hardware concurrency).
inline unsigned sweep_threads() {
    unsigned n = 0;
    if (const char* env = std::getenv("BI_SPECTRA_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) n = static_cast<unsigned>(v);
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

/// Sort key shared by sweeps and record files: (Q, angular, n, orbital).
template <typename Real>
bool record_less(const SweepRecord<Real>& a, const SweepRecord<Real>& b) {
    return std::tuple(a.Q, a.label.angular, a.label.n, a.label.orbital.value_or(-1)) <
           std::tuple(b.Q, b.label.angular, b.label.n, b.label.orbital.value_or(-1));
}

/// Spectra for every (Q, channel) of the schedule. Schedule points run concurrently; a failed
/// channel is recorded and the sweep goes on. Records come back sorted by (Q, channel, n).
template <typename Real = double>
SweepResult<Real> run_sweep(const SweepConfig<Real>& cfg) {
    cfg.validate();
    SweepResult<Real> result;
    if (cfg.angular.empty()) return result;

    const RadialGrid<Real> grid(cfg.rho_inf, cfg.grid_points);
    const auto qs = cfg.schedule();
    std::mutex lock;

    // Coulomb spectra do not depend on Q; Dirac BI runs also use them to screen for spurious
    // modes.
    std::map<int, ChannelResult<Real>> coulomb;
    std::map<int, std::string> coulomb_failure;
    const bool need_coulomb = cfg.potential == PotentialKind::Coulomb || (cfg.equation == Equation::Dirac && cfg.channel.screen_spurious);
    if (need_coulomb) {
        const auto samples = sample_on_grid(PotentialSpec<Real>::coulomb(), grid, cfg.quadrature);
        for (int a : cfg.angular) {
            try {
                coulomb[a] = solve_channel<Real>(cfg.equation, samples, a, cfg.levels, cfg.channel);
            } catch (const std::exception& e) {
                coulomb_failure[a] = e.what();
            }
        }
    }

    auto emit = [&](Real q, Real a_tilde, int angular, const ChannelResult<Real>& ch) {
        std::lock_guard<std::mutex> guard(lock);
        for (const auto& level : ch.spectrum.levels) {
            result.records.push_back({cfg.equation, cfg.potential, a_tilde, q, level.label, level.e_tilde, level.residual, cfg.rho_inf, cfg.grid_points});
        }
        for (const auto& d : ch.spectrum.diagnostics) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "Q=" << q << " angular=" << angular << ": " << d;
            result.diagnostics.push_back(msg.str());
        }
    };
    auto fail = [&](Real q, Real a_tilde, int angular, const std::string& why) {
        std::lock_guard<std::mutex> guard(lock);
        result.failures.push_back({q, a_tilde, angular, why});
    };

    auto run_point = [&](Real q) {
        const Real a_tilde = q * born_a_tilde<Real>();
        if (cfg.potential == PotentialKind::Coulomb) {
            for (int a : cfg.angular) {
                if (coulomb_failure.count(a)) fail(q, a_tilde, a, coulomb_failure.at(a));
                else emit(q, a_tilde, a, coulomb.at(a));
            }
            return;
        }
        std::optional<PotentialSamples<Real>> samples;
        try {
            const PotentialSpec<Real> spec{cfg.potential, a_tilde};
            spec.validate();
            samples = sample_on_grid(spec, grid, cfg.quadrature);
        } catch (const std::exception& e) {
            for (int a : cfg.angular) fail(q, a_tilde, a, e.what());
            return;
        }
        for (int a : cfg.angular) {
            try {
                auto ch = solve_channel<Real>(cfg.equation, *samples, a, cfg.levels, cfg.channel);
                if (cfg.equation == Equation::Dirac && cfg.channel.screen_spurious && coulomb.count(a)) {
                    flag_spurious(ch, coulomb.at(a));
                }
                emit(q, a_tilde, a, ch);
            } catch (const std::exception& e) {
                fail(q, a_tilde, a, e.what());
            }
        }
    };

    const unsigned workers = std::min<unsigned>(sweep_threads(), static_cast<unsigned>(qs.size()));
    if (workers <= 1) {
        for (Real q : qs) run_point(q);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < qs.size(); i = next++) run_point(qs[i]);
            });
        }
        for (auto& t : pool) t.join();
    }

    std::sort(result.records.begin(), result.records.end(), record_less<Real>);
    std::sort(result.failures.begin(), result.failures.end(), [](const auto& a, const auto& b) { return std::tie(a.Q, a.angular) < std::tie(b.Q, b.angular); });
    std::sort(result.diagnostics.begin(), result.diagnostics.end());
    return result;
}

// ---------------------------------------------------------------------------------------
// Degeneracy splitting

template <typename Real = double>
struct SplittingPoint {
    Real Q = 0;
    Real a_tilde = 0;
    /// E~(l = kappa - 1) - E~(l = kappa); empty when a pair member is missing.
    std::optional<Real> signed_delta;
    std::optional<Real> delta() const {
        if (!signed_delta) return std::nullopt;
        return std::abs(*signed_delta);
    }
};

/// Splitting of the (n, l = kappa - 1) / (n, l = kappa) pair per schedule point. For Dirac
/// the pair is the two sublabels of cell (n, kappa); for Schrodinger it is the l = kappa - 1
/// and l = kappa records at the same n.
template <typename Real = double>
std::vector<SplittingPoint<Real>> degeneracy_splitting(const std::vector<SweepRecord<Real>>& records, int n, int kappa) {
    if (kappa < 1 || n <= kappa) {
        throw domain_error("degeneracy_splitting: requires 1 <= kappa < n");
    }
    struct Pair {
        Real a_tilde = 0;
        std::optional<Real> lower_l, upper_l;
    };
    std::map<Real, Pair> by_q;
    for (const auto& r : records) {
        if (r.label.n != n) continue;
        std::optional<int> l;
        if (r.equation == Equation::Dirac) {
            if (r.label.angular == kappa) l = r.label.orbital;
        } else if (r.label.angular == kappa - 1 || r.label.angular == kappa) {
            l = r.label.angular;
        }
        if (!l) continue;
        auto& p = by_q[r.Q];
        p.a_tilde = r.a_tilde;
        (*l == kappa - 1 ? p.lower_l : p.upper_l) = r.e_tilde;
    }
    std::vector<SplittingPoint<Real>> out;
    for (const auto& [q, p] : by_q) {
        SplittingPoint<Real> pt{q, p.a_tilde, std::nullopt};
        if (p.lower_l && p.upper_l) pt.signed_delta = *p.lower_l - *p.upper_l;
        out.push_back(pt);
    }
    return out;
}

// ---------------------------------------------------------------------------------------
// Persistence

enum class RecordFormat { CSV, JSON };

inline RecordFormat parse_record_format(const std::string& name) {
    if (name == "csv") return RecordFormat::CSV;
    if (name == "json") return RecordFormat::JSON;
    throw domain_error("unknown format '" + name + "' (expected csv or json)");
}

inline constexpr const char* record_csv_header = "equation,potential,a_tilde,Q,angular,n,E_tilde,residual,rho_inf,N";

namespace detail {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline double parse_double(const std::string& text, const std::string& what) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
        throw io_error("bad " + what + " value '" + text + "'");
    }
    return v;
}

}  // namespace detail

template <typename Real = double>
std::string records_to_csv(const std::vector<SweepRecord<Real>>& records) {
    std::string out = std::string(record_csv_header) + "\n";
    for (const auto& r : records) {
        out += to_string(r.equation) + "," + std::string(to_string(r.potential)) + "," + detail::format_g17(r.a_tilde) + "," +
               detail::format_g17(r.Q) + "," + r.label.angular_text() + "," + std::to_string(r.label.n) + "," +
               detail::format_g17(r.e_tilde) + "," + detail::format_g17(r.residual) + "," + detail::format_g17(r.rho_inf) + "," +
               std::to_string(r.grid_points) + "\n";
    }
    return out;
}

template <typename Real = double>
nlohmann::json records_to_json(const std::vector<SweepRecord<Real>>& records) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : records) {
        rows.push_back({{"equation", to_string(r.equation)},
                        {"potential", std::string(to_string(r.potential))},
                        {"a_tilde", static_cast<double>(r.a_tilde)},
                        {"Q", static_cast<double>(r.Q)},
                        {"angular", r.label.angular_text()},
                        {"n", r.label.n},
                        {"E_tilde", static_cast<double>(r.e_tilde)},
                        {"residual", static_cast<double>(r.residual)},
                        {"rho_inf", static_cast<double>(r.rho_inf)},
                        {"N", r.grid_points}});
    }
    return rows;
}

template <typename Real = double>
SweepRecord<Real> record_from_fields(const std::string& equation, const std::string& potential, Real a_tilde, Real q, const std::string& angular,
                                     int n, Real e_tilde, Real residual, Real rho_inf, std::size_t grid_points) {
    SweepRecord<Real> r;
    r.equation = parse_equation(equation);
    r.potential = parse_potential_kind(potential);
    r.a_tilde = a_tilde;
    r.Q = q;
    r.label = parse_level_label(r.equation, n, angular);
    r.e_tilde = e_tilde;
    r.residual = residual;
    r.rho_inf = rho_inf;
    r.grid_points = grid_points;
    return r;
}

template <typename Real = double>
std::vector<SweepRecord<Real>> records_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != record_csv_header) {
        throw io_error("CSV header mismatch: expected '" + std::string(record_csv_header) + "'");
    }
    std::vector<SweepRecord<Real>> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto c = detail::split_csv_line(line);
        if (c.size() != 10) {
            throw io_error("CSV row " + std::to_string(row) + ": expected 10 columns, got " + std::to_string(c.size()));
        }
        try {
            out.push_back(record_from_fields<Real>(c[0], c[1], detail::parse_double(c[2], "a_tilde"), detail::parse_double(c[3], "Q"), c[4],
                                                   std::stoi(c[5]), detail::parse_double(c[6], "E_tilde"),
                                                   detail::parse_double(c[7], "residual"), detail::parse_double(c[8], "rho_inf"),
                                                   static_cast<std::size_t>(std::stoull(c[9]))));
        } catch (const std::exception& e) {
            throw io_error("CSV row " + std::to_string(row) + ": " + e.what());
        }
    }
    return out;
}

template <typename Real = double>
std::vector<SweepRecord<Real>> records_from_json(const nlohmann::json& rows) {
    std::vector<SweepRecord<Real>> out;
    try {
        for (const auto& j : rows) {
            out.push_back(record_from_fields<Real>(j.at("equation").get<std::string>(), j.at("potential").get<std::string>(),
                                                   j.at("a_tilde").get<double>(), j.at("Q").get<double>(), j.at("angular").get<std::string>(),
                                                   j.at("n").get<int>(), j.at("E_tilde").get<double>(), j.at("residual").get<double>(),
                                                   j.at("rho_inf").get<double>(), j.at("N").get<std::size_t>()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("JSON records: ") + e.what());
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error("cannot open '" + path + "' for writing: " + std::strerror(errno));
    }
    out << text;
    out.flush();
    if (!out) {
        throw io_error("write to '" + path + "' failed: " + std::strerror(errno));
    }
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open '" + path + "' for reading: " + std::strerror(errno));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

template <typename Real = double>
void write_records(const std::vector<SweepRecord<Real>>& records, const std::string& path, RecordFormat format) {
    write_text_file(path, format == RecordFormat::CSV ? records_to_csv(records) : records_to_json(records).dump(2) + "\n");
}

template <typename Real = double>
std::vector<SweepRecord<Real>> read_records(const std::string& path, RecordFormat format) {
    const std::string text = read_text_file(path);
    if (format == RecordFormat::CSV) return records_from_csv<Real>(text);
    try {
        return records_from_json<Real>(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
        throw io_error("'" + path + "': " + e.what());
    }
}

}  // namespace bispectra
