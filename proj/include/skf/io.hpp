#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skf/basis.hpp"
#include "skf/scenarios.hpp"
#include "skf/selection.hpp"

namespace skf {

/// Stream file layout:
///   # seed=<u64> snr_db=<x> noise_var=<x> target=<i> n_states=<n> n_derivatives=<m>
///   t,<state names...>,d<state name>...,y
/// Values are written with 17 significant digits so a read reproduces the
/// stream bit for bit.
void write_stream_csv(std::ostream& out, const GeneratedStream& gen);
void write_stream_csv(const std::filesystem::path& path, const GeneratedStream& gen);
GeneratedStream read_stream_csv(std::istream& in);
GeneratedStream read_stream_csv(const std::filesystem::path& path);

/// Column-major numeric table written as CSV. Non-finite cells are written
/// as nan/inf, absent ones (NaN by convention) as empty cells.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
};

void write_csv(std::ostream& out, const Table& table, const std::string& comment = {});
void write_csv(const std::filesystem::path& path, const Table& table, const std::string& comment = {});

/// Identified equation: every nonzero coefficient keyed by its exponent
/// vector, plus a readable term name.
nlohmann::json model_report(const MonomialLibrary& lib, const Vector& coefficients,
                            const std::vector<std::string>& names = {});

nlohmann::json library_json(const MonomialLibrary& lib);

/// {kind, candidates: [...], avg_scores: [...], best: {index, value}}.
/// Infinite scores (aborted candidates) become null.
nlohmann::json bank_json(const BankResult& bank);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace skf
