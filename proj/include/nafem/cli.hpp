#pragma once

#include "nafem/experiments.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace nafem {

enum class Command { Study, Verify, Spectrum };

struct CliInvocation {
    Command command = Command::Study;
    ExperimentConfig config;
    bool help = false;  ///< --help was given; `help_text` holds the page
    std::string help_text;
};

/// Applies one `key = value` setting. Keys are the config-file keys (dim, levels, field,
/// bc, alpha0, nonlinearity, beta, eps, lemma_gamma, t_eval, teval_rule, dt_rule, dt, tau,
/// t, T, reference_level, probe_tau_min, probe_tau_max, probe_points, seed, out, format)
/// and the expression keys q11, q12, q21, q22, q1, q2, q0.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Flat `key = value` text, `#` starts a comment. Errors name the line.
void apply_config_text(ExperimentConfig& config, std::string_view text);

/// Merges defaults <- config file <- flags and validates the result.
CliInvocation parse_cli(const std::vector<std::string>& args);

/// Help page of the `study` subcommand, which lists every flag.
std::string help_text();

struct VerifyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Property battery: ellipticity, Hoelder samples, exact matrices, projection identities,
/// fractional powers, growth bounds, temporal-error domination.
std::vector<VerifyCheck> run_verify_battery(const ExperimentConfig& config);

/// Dispatches a parsed invocation. Returns the process exit code.
int run(const CliInvocation& invocation, std::ostream& out, std::ostream& err);

/// parse_cli + run with exit codes: 0 ok, 2 configuration error, 3 numerical or I/O failure.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nafem
