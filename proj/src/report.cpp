#include "nafem/report.hpp"

#include "nafem/errors.hpp"

#include "json.hpp"

#include <array>
#include <charconv>
#include <fstream>

namespace nafem {

namespace {

using nlohmann::json;

json config_echo(const ExperimentConfig& c) {
    json j;
    j["study"] = std::string(to_string(c.study));
    j["dim"] = c.dim;
    j["levels"] = c.levels;
    j["field"] = c.field;
    if (!c.expressions.empty()) {
        j["expressions"] = c.expressions;
    }
    j["bc"] = c.bc.is_dirichlet() ? "dirichlet" : "robin";
    if (!c.bc.is_dirichlet()) {
        j["alpha0"] = c.bc.alpha0;
    }
    j["nonlinearity"] = c.nonlinearity;
    j["beta"] = c.beta;
    j["eps"] = c.eps;
    j["lemma_gamma"] = c.lemma_gamma;
    j["teval_rule"] = std::string(to_string(c.teval_rule));
    j["t_eval"] = c.t_eval;
    j["dt_rule"] = std::string(to_string(c.dt_rule));
    j["dt"] = c.dt;
    j["tau"] = c.tau;
    j["t"] = c.t;
    j["T"] = c.horizon;
    j["reference_level"] = c.reference_level ? json(*c.reference_level) : json(nullptr);
    j["probe_tau_min"] = c.probe_tau_min;
    j["probe_tau_max"] = c.probe_tau_max;
    j["probe_points"] = c.probe_points;
    j["seed"] = c.seed;
    return j;
}

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string format_number(double value) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

std::string render_csv(const ErrorTable& table) {
    std::string out = "level,h,dt,t_eval,error_l2,eoc\n";
    for (const ErrorRow& r : table.rows) {
        out += std::to_string(r.level) + ',' + format_number(r.h) + ',' + format_number(r.dt) +
               ',' + format_number(r.t_eval) + ',' + format_number(r.error_l2) + ',' +
               (r.eoc ? format_number(*r.eoc) : std::string()) + '\n';
    }
    return out;
}

std::string render_csv(const SmoothingTable& table) {
    std::string out = "tau,norm,in_fit\n";
    for (const SmoothingRow& r : table.rows) {
        out += format_number(r.tau) + ',' + format_number(r.norm) + ',' + (r.in_fit ? "1" : "0") +
               '\n';
    }
    return out;
}

std::string render_json(const ErrorTable& table) {
    json j;
    j["config"] = config_echo(table.config);
    j["rows"] = json::array();
    for (const ErrorRow& r : table.rows) {
        j["rows"].push_back({{"level", r.level},
                             {"h", r.h},
                             {"dt", r.dt},
                             {"t_eval", r.t_eval},
                             {"error_l2", r.error_l2},
                             {"eoc", optional_number(r.eoc)}});
    }
    if (!table.sweep.empty()) {
        j["sweep"] = json::array();
        for (const SweepRow& r : table.sweep) {
            j["sweep"].push_back({{"elapsed", r.elapsed},
                                  {"error_l2", r.error_l2},
                                  {"ratio", optional_number(r.ratio)}});
        }
    }
    j["aborted"] = table.aborted ? json(*table.aborted) : json(nullptr);
    return j.dump(2) + "\n";
}

std::string render_json(const SmoothingTable& table) {
    json j;
    j["config"] = config_echo(table.config);
    j["level"] = table.level;
    j["start"] = table.start;
    j["lambda_min"] = table.lambda_min;
    j["alpha"] = table.alpha;
    j["rows"] = json::array();
    for (const SmoothingRow& r : table.rows) {
        j["rows"].push_back({{"tau", r.tau}, {"norm", r.norm}, {"in_fit", r.in_fit}});
    }
    return j.dump(2) + "\n";
}

std::string render(const ErrorTable& table, OutputFormat format) {
    return format == OutputFormat::Csv ? render_csv(table) : render_json(table);
}

std::string render(const SmoothingTable& table, OutputFormat format) {
    return format == OutputFormat::Csv ? render_csv(table) : render_json(table);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << text;
    out.flush();
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

void emit_report(const ErrorTable& table, OutputFormat format, const std::string& path) {
    write_text_file(path, render(table, format));
}

void emit_report(const SmoothingTable& table, OutputFormat format, const std::string& path) {
    write_text_file(path, render(table, format));
}

}  // namespace nafem
