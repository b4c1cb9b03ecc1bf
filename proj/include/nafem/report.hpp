#pragma once

#include "nafem/experiments.hpp"

#include <string>

namespace nafem {

/// Shortest decimal that round-trips to the same double; locale independent.
std::string format_number(double value);

/// Header `level,h,dt,t_eval,error_l2,eoc`, one line per row, trailing newline.
std::string render_csv(const ErrorTable& table);
/// Header `tau,norm,in_fit`.
std::string render_csv(const SmoothingTable& table);

/// Rows, sweep and a config echo (including the seed).
std::string render_json(const ErrorTable& table);
std::string render_json(const SmoothingTable& table);

std::string render(const ErrorTable& table, OutputFormat format);
std::string render(const SmoothingTable& table, OutputFormat format);

/// Writes `text` to `path`. Throws IoError if the file cannot be written.
void write_text_file(const std::string& path, const std::string& text);

void emit_report(const ErrorTable& table, OutputFormat format, const std::string& path);
void emit_report(const SmoothingTable& table, OutputFormat format, const std::string& path);

}  // namespace nafem
