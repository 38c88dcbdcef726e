#include "skf/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace skf {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

void write_cell(std::ostream& out, double v) {
  if (std::isnan(v)) return;
  if (std::isinf(v)) {
    out << (v > 0 ? "inf" : "-inf");
    return;
  }
  out << v;
}

double parse_double(const std::string& s, long line) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::runtime_error("stream csv line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void write_stream_csv(std::ostream& out, const GeneratedStream& gen) {
  const auto n = static_cast<Eigen::Index>(gen.size());
  const Eigen::Index ns = gen.states.cols();
  const Eigen::Index nd = gen.derivatives.cols();
  if (gen.states.rows() != n || gen.derivatives.rows() != n || gen.y.size() != n ||
      gen.names.size() != static_cast<std::size_t>(ns))
    throw std::invalid_argument("write_stream_csv: inconsistent stream");
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "# seed=" << gen.seed << " snr_db=";
  write_cell(out, gen.snr_db);
  out << " noise_var=" << gen.noise_var << " target=" << gen.target << " n_states=" << ns << " n_derivatives=" << nd
      << "\n";
  out << "t";
  for (const auto& name : gen.names) out << "," << name;
  for (Eigen::Index j = 0; j < nd; ++j) out << ",d" << gen.names[static_cast<std::size_t>(j)];
  out << ",y\n";
  for (Eigen::Index r = 0; r < n; ++r) {
    out << gen.times[static_cast<std::size_t>(r)];
    for (Eigen::Index j = 0; j < ns; ++j) out << "," << gen.states(r, j);
    for (Eigen::Index j = 0; j < nd; ++j) out << "," << gen.derivatives(r, j);
    out << "," << gen.y(r) << "\n";
  }
  out.precision(old);
}

void write_stream_csv(const std::filesystem::path& path, const GeneratedStream& gen) {
  auto out = open_out(path);
  write_stream_csv(out, gen);
  if (!out) throw std::runtime_error("error writing " + path.string());
}

GeneratedStream read_stream_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw std::runtime_error("stream csv: missing '# seed=...' header line");
  std::map<std::string, std::string> meta;
  for (const auto& tok : split(line.substr(2), ' ')) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) meta[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  for (const char* key : {"seed", "snr_db", "noise_var", "target", "n_states", "n_derivatives"})
    if (!meta.contains(key)) throw std::runtime_error(std::string("stream csv: header lacks ") + key);

  GeneratedStream g;
  g.seed = std::stoull(meta["seed"]);
  g.snr_db = parse_double(meta["snr_db"], 1);
  g.noise_var = parse_double(meta["noise_var"], 1);
  g.target = std::stoi(meta["target"]);
  const long ns = std::stol(meta["n_states"]);
  const long nd = std::stol(meta["n_derivatives"]);
  if (ns < 1 || nd < 0) throw std::runtime_error("stream csv: bad column counts");

  if (!std::getline(in, line)) throw std::runtime_error("stream csv: missing column header");
  const auto header = split(line, ',');
  if (static_cast<long>(header.size()) != 2 + ns + nd || header.front() != "t" || header.back() != "y")
    throw std::runtime_error("stream csv: column header does not match n_states/n_derivatives");
  g.names.assign(header.begin() + 1, header.begin() + 1 + ns);

  std::vector<std::vector<double>> rows;
  long lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw std::runtime_error("stream csv line " + std::to_string(lineno) + ": expected " +
                               std::to_string(header.size()) + " columns");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c, lineno));
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  g.times.resize(rows.size());
  g.states.resize(n, ns);
  g.derivatives.resize(n, nd);
  g.y.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    g.times[static_cast<std::size_t>(r)] = row[0];
    for (long j = 0; j < ns; ++j) g.states(r, j) = row[static_cast<std::size_t>(1 + j)];
    for (long j = 0; j < nd; ++j) g.derivatives(r, j) = row[static_cast<std::size_t>(1 + ns + j)];
    g.y(r) = row.back();
  }
  return g;
}

GeneratedStream read_stream_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_stream_csv(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void Table::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("Table::add_row: wrong number of cells");
  rows.push_back(std::move(row));
}

void write_csv(std::ostream& out, const Table& table, const std::string& comment) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  if (!comment.empty()) out << "# " << comment << "\n";
  for (std::size_t j = 0; j < table.columns.size(); ++j) out << (j ? "," : "") << table.columns[j];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ",";
      write_cell(out, row[j]);
    }
    out << "\n";
  }
  out.precision(old);
}

void write_csv(const std::filesystem::path& path, const Table& table, const std::string& comment) {
  auto out = open_out(path);
  write_csv(out, table, comment);
  if (!out) throw std::runtime_error("error writing " + path.string());
}

json library_json(const MonomialLibrary& lib) {
  return {{"n_vars", lib.n_vars()},
          {"max_degree", lib.max_degree()},
          {"include_constant", lib.include_constant()},
          {"size", lib.size()},
          {"exponents", lib.exponents()}};
}

json model_report(const MonomialLibrary& lib, const Vector& coefficients, const std::vector<std::string>& names) {
  if (static_cast<std::size_t>(coefficients.size()) != lib.size())
    throw std::invalid_argument("model_report: coefficient vector does not match the library");
  json terms = json::array();
  for (std::size_t j = 0; j < lib.size(); ++j) {
    const double c = coefficients(static_cast<Eigen::Index>(j));
    if (c == 0.0) continue;
    terms.push_back({{"exponents", lib[j]}, {"term", lib.term_name(j, names)}, {"coefficient", c}});
  }
  return {{"library", library_json(lib)}, {"support_size", terms.size()}, {"terms", terms}};
}

json bank_json(const BankResult& bank) {
  json candidates = json::array();
  json scores = json::array();
  for (const auto& c : bank.candidates) {
    candidates.push_back({{"value", c.value},
                          {"avg_score", finite_or_null(c.avg_score)},
                          {"avg_raw", finite_or_null(c.scores.avg_raw())},
                          {"avg_sparse", finite_or_null(c.scores.avg_sparse())},
                          {"avg_weighted", finite_or_null(c.scores.avg_weighted())},
                          {"aborted", c.aborted},
                          {"error", c.error},
                          {"support_size", c.final_sparse.coefficients.size() -
                                               static_cast<Eigen::Index>(c.final_sparse.zero_set.size())}});
    scores.push_back(finite_or_null(c.avg_score));
  }
  return {{"kind", to_string(bank.kind)},
          {"candidates", candidates},
          {"avg_scores", scores},
          {"best", {{"index", bank.best_index}, {"value", bank.best_value}}}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("error writing " + path.string());
}

}  // namespace skf
