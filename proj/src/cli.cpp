#include "nafem/cli.hpp"

#include "nafem/analytic.hpp"
#include "nafem/assembly.hpp"
#include "nafem/errors.hpp"
#include "nafem/mesh.hpp"
#include "nafem/nonlinearity.hpp"
#include "nafem/projections.hpp"
#include "nafem/report.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

namespace nafem {

namespace {

struct FlagSpec {
    const char* flag;
    const char* key;
    const char* help;
};

// --dt precedes --dt-rule so an explicit rule wins over the one implied by --dt.
constexpr FlagSpec kFlags[] = {
    {"--dim", "dim", "spatial dimension {1|2}"},
    {"--levels", "levels", "cells per side, comma separated and increasing"},
    {"--field", "field", "catalog field: constant, drifting, anisotropic, advection, reaction"},
    {"--bc", "bc", "boundary condition {dirichlet|robin}"},
    {"--alpha0", "alpha0", "Robin coefficient"},
    {"--nonlinearity", "nonlinearity",
     "zero, linear, bounded_ratio, allen_cahn, cubic or poly:a0,a1,..."},
    {"--beta", "beta", "initial-data regularity in (0,2]"},
    {"--eps", "eps", "regularity margin of the generated data"},
    {"--gamma", "lemma_gamma", "data regularity of the lemma study in [0,2]"},
    {"--t-eval", "t_eval", "evaluation time for --teval-rule fixed"},
    {"--teval-rule", "teval_rule", "evaluation time rule {fixed|h|hsq}"},
    {"--tau", "tau", "start time of the lemma study and smoothing probe"},
    {"--t", "t", "end time of the lemma study; time of the spectrum"},
    {"--T", "T", "horizon"},
    {"--dt", "dt", "fixed time step (implies dt_rule = fixed)"},
    {"--dt-rule", "dt_rule", "time step rule {auto|hsq|fixed}"},
    {"--seed", "seed", "seed of the random data signs"},
    {"--out", "out", "output path (default: standard output)"},
    {"--format", "format", "output format {csv|json}"},
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_real(std::string_view key, std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size() ||
        !std::isfinite(value)) {
        throw ConfigError(std::string(key) + ": expected a finite real number, got '" +
                          std::string(text) + "'");
    }
    return value;
}

template <typename Int>
Int parse_integer(std::string_view key, std::string_view text) {
    text = trim(text);
    Int value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(text) +
                          "'");
    }
    return value;
}

std::vector<int> parse_levels(std::string_view text) {
    std::vector<int> levels;
    while (true) {
        const std::size_t comma = text.find(',');
        levels.push_back(parse_integer<int>("levels", text.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return levels;
}

bool is_expression_key(std::string_view key) {
    static const char* keys[] = {"q11", "q12", "q21", "q22", "q1", "q2", "q0"};
    return std::any_of(std::begin(keys), std::end(keys),
                       [&](const char* k) { return key == k; });
}

std::ostream& pick_stream(const std::string& path, std::ofstream& file, std::ostream& fallback) {
    if (path.empty()) return fallback;
    file.open(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open '" + path + "' for writing");
    return file;
}

// Shared subcommand options: every flag binds to a string, applied after parsing.
struct FlagValues {
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::string config_path;
    CLI::Option* config_option = nullptr;

    void attach(CLI::App* app) {
        config_option =
            app->add_option("--config", config_path, "flat key = value config file");
        for (const FlagSpec& f : kFlags) {
            options[f.key] = app->add_option(f.flag, values[f.key], f.help);
        }
    }

};

}  // namespace

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view raw) {
    const std::string_view value = trim(raw);
    if (key == "dim") {
        c.dim = parse_integer<int>(key, value);
    } else if (key == "levels") {
        c.levels = parse_levels(value);
    } else if (key == "field") {
        c.field = std::string(value);
        c.expressions.clear();
    } else if (key == "bc") {
        if (value == "dirichlet") {
            c.bc.kind = BoundarySpec::Kind::Dirichlet;
        } else if (value == "robin") {
            c.bc.kind = BoundarySpec::Kind::Robin;
        } else {
            throw ConfigError("bc: expected dirichlet or robin, got '" + std::string(value) + "'");
        }
    } else if (key == "alpha0") {
        c.bc.alpha0 = parse_real(key, value);
    } else if (key == "nonlinearity") {
        c.nonlinearity = std::string(value);
    } else if (key == "beta") {
        c.beta = parse_real(key, value);
    } else if (key == "eps") {
        c.eps = parse_real(key, value);
    } else if (key == "lemma_gamma" || key == "gamma") {
        c.lemma_gamma = parse_real(key, value);
    } else if (key == "t_eval") {
        c.t_eval = parse_real(key, value);
    } else if (key == "teval_rule") {
        c.teval_rule = parse_teval_rule(value);
    } else if (key == "dt_rule") {
        c.dt_rule = parse_dt_rule(value);
    } else if (key == "dt") {
        c.dt = parse_real(key, value);
        c.dt_rule = DtRule::Fixed;
    } else if (key == "tau") {
        c.tau = parse_real(key, value);
    } else if (key == "t") {
        c.t = parse_real(key, value);
    } else if (key == "T") {
        c.horizon = parse_real(key, value);
    } else if (key == "reference_level") {
        c.reference_level = parse_integer<int>(key, value);
    } else if (key == "probe_tau_min") {
        c.probe_tau_min = parse_real(key, value);
    } else if (key == "probe_tau_max") {
        c.probe_tau_max = parse_real(key, value);
    } else if (key == "probe_points") {
        c.probe_points = parse_integer<int>(key, value);
    } else if (key == "seed") {
        c.seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "out") {
        c.out = std::string(value);
    } else if (key == "format") {
        c.format = parse_output_format(value);
    } else if (is_expression_key(key)) {
        c.expressions[std::string(key)] = std::string(value);
    } else {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
}

void apply_config_text(ExperimentConfig& config, std::string_view text) {
    int line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string_view key = trim(line.substr(0, eq));
        try {
            apply_setting(config, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

namespace {

void build_app(CLI::App& app, std::string& kind, FlagValues& study_flags, FlagValues& verify_flags,
               FlagValues& spectrum_flags) {
    app.require_subcommand(1, 1);
    CLI::App* study = app.add_subcommand("study", "run a convergence study");
    study->add_option("kind", kind, "manufactured | nonsmooth | lemma | smoothing")->required();
    study_flags.attach(study);
    CLI::App* verify = app.add_subcommand("verify", "run the property-check battery");
    verify_flags.attach(verify);
    CLI::App* spectrum =
        app.add_subcommand("spectrum", "eigenvalues of -A_h(t) on the finest level");
    spectrum_flags.attach(spectrum);
}

}  // namespace

std::string help_text() {
    CLI::App app{"Finite element convergence studies for semilinear parabolic problems", "nafem"};
    std::string kind;
    FlagValues a, b, c;
    build_app(app, kind, a, b, c);
    return app.get_subcommand("study")->help();
}

CliInvocation parse_cli(const std::vector<std::string>& args) {
    CLI::App app{"Finite element convergence studies for semilinear parabolic problems", "nafem"};
    std::string kind;
    FlagValues study_flags, verify_flags, spectrum_flags;
    build_app(app, kind, study_flags, verify_flags, spectrum_flags);

    CliInvocation inv;
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        inv.help = true;
        inv.help_text = app.help();
        for (CLI::App* sub : app.get_subcommands()) {
            inv.help_text = sub->help();
        }
        return inv;
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }

    FlagValues* flags = nullptr;
    if (app.got_subcommand("study")) {
        inv.command = Command::Study;
        flags = &study_flags;
        inv.config.study = parse_study_kind(kind);
    } else if (app.got_subcommand("verify")) {
        inv.command = Command::Verify;
        flags = &verify_flags;
    } else {
        inv.command = Command::Spectrum;
        flags = &spectrum_flags;
    }

    ExperimentConfig& config = inv.config;
    bool levels_set = false;
    if (flags->config_option->count() > 0) {
        std::ifstream in(flags->config_path, std::ios::binary);
        if (!in) {
            throw ConfigError("cannot read config file '" + flags->config_path + "'");
        }
        std::ostringstream text;
        text << in.rdbuf();
        config.levels.clear();
        apply_config_text(config, text.str());
        levels_set = !config.levels.empty();
        if (!levels_set) config.levels = ExperimentConfig{}.levels;
    }
    for (const FlagSpec& f : kFlags) {
        if (flags->options.at(f.key)->count() > 0) {
            apply_setting(config, f.key, flags->values.at(f.key));
            if (std::string_view(f.key) == "levels") levels_set = true;
        }
    }
    if (inv.command == Command::Study && config.study == StudyKind::Smoothing && !levels_set) {
        config.levels = {48};
    }
    config.validate();
    return inv;
}

std::vector<VerifyCheck> run_verify_battery(const ExperimentConfig& config) {
    config.validate();
    std::vector<VerifyCheck> checks;
    auto record = [&](std::string name, bool ok, const std::string& detail) {
        checks.push_back({std::move(name), ok, detail});
    };
    auto guarded = [&](const std::string& name, auto&& body) {
        try {
            body();
        } catch (const Error& e) {
            record(name, false, e.what());
        }
    };
    const int dim = config.dim;
    const int n_small = std::min(config.levels.front(), dim == 1 ? 32 : 8);

    // coefficients
    for (const std::string& name : catalog_field_names()) {
        guarded("ellipticity/" + name, [&] {
            const CoefficientField f = catalog_field(name, dim, config.horizon);
            const SampleGrid g = default_sample_grid(dim, config.horizon);
            const double c = check_ellipticity(f, g.times, g.points);
            const bool ok = c > 0.0 && c >= f.ellipticity_c - 1e-12;
            record("ellipticity/" + name, ok,
                   "sampled min " + format_number(c) + ", documented " +
                       format_number(f.ellipticity_c));
        });
        guarded("holder/" + name, [&] {
            const CoefficientField f = catalog_field(name, dim, config.horizon);
            const SampleGrid g = default_sample_grid(dim, config.horizon, dim == 1 ? 33 : 9);
            const double c2 = sampled_holder_constant(f, g.times, g.points);
            const bool ok = c2 <= f.holder_c2 * (1.0 + 1e-6) + 1e-9;
            record("holder/" + name, ok,
                   "sampled " + format_number(c2) + ", declared " + format_number(f.holder_c2));
        });
    }

    // exact matrices
    guarded("mass/1d-entries", [&] {
        const int n = 16;
        const double h = 1.0 / n;
        const SparseMatrix m = assemble_mass(uniform_interval_mesh(n), BoundarySpec::dirichlet());
        const SparseMatrix s = assemble_operator(uniform_interval_mesh(n),
                                                 catalog_field("constant", 1), 0.0,
                                                 BoundarySpec::dirichlet());
        double worst = 0.0;
        for (int i = 0; i < m.rows(); ++i) {
            for (int j = std::max(0, i - 1); j <= std::min<int>(i + 1, m.rows() - 1); ++j) {
                const double me = i == j ? 2.0 * h / 3.0 : h / 6.0;
                const double se = i == j ? 2.0 / h : -1.0 / h;
                worst = std::max({worst, std::abs(m.coeff(i, j) - me), std::abs(s.coeff(i, j) - se) * h});
            }
        }
        record("mass/1d-entries", worst <= 1e-12, "max deviation " + format_number(worst));
    });
    guarded("mass/2d-sum", [&] {
        const SparseMatrix m = assemble_mass(structured_square_mesh(8), BoundarySpec::robin(0.0));
        const double sum = m.sum();
        record("mass/2d-sum", std::abs(sum - 1.0) <= 1e-12, "sum " + format_number(sum));
    });

    // projections
    const CoefficientField field = config.make_field();
    const auto mesh = dim == 1 ? uniform_interval_mesh(n_small) : structured_square_mesh(n_small);
    guarded("l2-projection/idempotent", [&] {
        const auto space = make_space(mesh, config.bc);
        const StateVector p = l2_project(*space, sine_mode(dim).value, 0.0);
        const StateVector pp = l2_project(*space, *space, p);
        const double rel = (pp.values - p.values).norm() / p.values.norm();
        record("l2-projection/idempotent", rel <= 1e-9, "relative change " + format_number(rel));
    });
    guarded("ritz/reproduces-vh", [&] {
        const auto space = make_space(mesh, config.bc);
        const AssembledSystem system(space, field);
        std::mt19937_64 rng(config.seed);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        Vector chi(space->num_dofs());
        for (Eigen::Index k = 0; k < chi.size(); ++k) chi(k) = unit(rng);
        const StateVector r = ritz_project(system, 0.5 * config.horizon, make_state(*space, chi));
        const double rel = (r.values - chi).norm() / chi.norm();
        record("ritz/reproduces-vh", rel <= 1e-8, "relative change " + format_number(rel));
    });
    guarded("fractional/identities", [&] {
        const auto space = make_space(mesh, config.bc);
        const AssembledSystem system(space, field);
        const SpectralBasis basis = SpectralBasis::compute(system, 0.0);
        std::mt19937_64 rng(config.seed);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        Vector v(space->num_dofs());
        for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = unit(rng);
        const StateVector sv = make_state(*space, v);
        const SparseMatrix& m = space->mass();
        const Vector direct = solve_spd(m, system.stiffness_at(0.0) * v, 1e-12);
        const StateVector half = fractional_apply(basis, 0.5, fractional_apply(basis, 0.5, sv));
        const StateVector one = fractional_apply(basis, 1.0, sv);
        const StateVector back = fractional_apply(basis, -1.0, one);
        const double scale = m_norm(m, direct);
        const double e1 = m_norm(m, half.values - direct) / scale;
        const double e2 = m_norm(m, one.values - direct) / scale;
        const double e3 = m_norm(m, back.values - v) / m_norm(m, v);
        const double worst = std::max({e1, e2, e3});
        record("fractional/identities", worst <= 1e-8, "max relative defect " + format_number(worst));
    });

    // nonlinearities
    std::vector<double> samples;
    for (int i = -100; i <= 100; ++i) samples.push_back(0.1 * i);
    for (const char* name : {"zero", "linear", "bounded_ratio", "allen_cahn", "cubic"}) {
        guarded(std::string("growth/") + name, [&] {
            const GrowthReport r = verify_growth_bounds(NonlinearSource::from_name(name), samples);
            std::string detail = r.c1_class ? "class c1=" + std::to_string(*r.c1_class)
                                            : std::string("no bounded class");
            detail += ", L1=" + format_number(r.l1);
            for (const std::string& f : r.failures) detail += "; " + f;
            bool ok = r.passed;
            if (std::string_view(name) == "allen_cahn") ok = ok && r.c1_class == 2;
            record(std::string("growth/") + name, ok, detail);
        });
    }

    // temporal-error domination on the manufactured study
    guarded("temporal/halving-dt", [&] {
        ExperimentConfig base = config;
        base.study = StudyKind::Manufactured;
        base.bc = BoundarySpec::dirichlet();
        double worst = 0.0;
        for (int n : config.levels) {
            ExperimentConfig one = base;
            one.levels = {n};
            const double h = (dim == 1 ? uniform_interval_mesh(n) : structured_square_mesh(n)).h();
            one.dt_rule = DtRule::Fixed;
            one.dt = base.step_for(h);
            const ErrorTable coarse = run_manufactured_study(one);
            one.dt /= 2.0;
            const ErrorTable fine = run_manufactured_study(one);
            if (coarse.aborted || fine.aborted) {
                throw NumericalError(coarse.aborted.value_or(fine.aborted.value_or("")));
            }
            const double e0 = coarse.rows.front().error_l2;
            const double e1 = fine.rows.front().error_l2;
            worst = std::max(worst, std::abs(e1 - e0) / e0);
        }
        record("temporal/halving-dt", worst < 0.05, "max relative shift " + format_number(worst));
    });
    return checks;
}

int run(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
    if (inv.help) {
        out << inv.help_text;
        return 0;
    }
    const ExperimentConfig& config = inv.config;
    switch (inv.command) {
    case Command::Study: {
        if (config.study == StudyKind::Smoothing) {
            const SmoothingTable table = run_smoothing_probe(config);
            std::ofstream file;
            pick_stream(config.out, file, out) << render(table, config.format);
            return 0;
        }
        ErrorTable table;
        switch (config.study) {
        case StudyKind::Manufactured: table = run_manufactured_study(config); break;
        case StudyKind::Nonsmooth: table = run_nonsmooth_study(config); break;
        default: table = run_lemma_study(config); break;
        }
        if (config.out.empty()) {
            out << render(table, config.format);
        } else {
            emit_report(table, config.format, config.out);
        }
        if (table.aborted) {
            err << "error: " << *table.aborted << '\n';
            return 3;
        }
        return 0;
    }
    case Command::Verify: {
        const std::vector<VerifyCheck> checks = run_verify_battery(config);
        std::ofstream file;
        std::ostream& sink = pick_stream(config.out, file, out);
        bool all = true;
        for (const VerifyCheck& c : checks) {
            sink << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << '\n';
            all = all && c.passed;
        }
        return all ? 0 : 3;
    }
    case Command::Spectrum: {
        const int n = config.levels.back();
        const auto mesh = config.dim == 1 ? uniform_interval_mesh(n) : structured_square_mesh(n);
        const AssembledSystem system(make_space(mesh, config.bc), config.make_field());
        const SpectralBasis basis = SpectralBasis::compute(system, config.t);
        std::ofstream file;
        std::ostream& sink = pick_stream(config.out, file, out);
        sink << "k,lambda\n";
        for (Eigen::Index k = 0; k < basis.size(); ++k) {
            sink << k << ',' << format_number(basis.eigenvalues()(k)) << '\n';
        }
        return 0;
    }
    }
    return 0;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return run(parse_cli(args), out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace nafem
