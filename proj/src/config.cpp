#include "skf/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "skf/basis.hpp"
#include "skf/selection.hpp"

namespace skf {

using nlohmann::json;

namespace {

// Line of every key, keyed by its JSON pointer ("/scenario/dt").
using LineMap = std::map<std::string, int>;

// Forward iterator over the config text that counts consumed newlines, so
// the SAX callbacks below know which line the parser has reached.
class LineCountingIterator {
 public:
  using iterator_category = std::forward_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  LineCountingIterator() = default;
  LineCountingIterator(const char* p, int* line) : p_(p), line_(line) {}
  reference operator*() const { return *p_; }
  LineCountingIterator& operator++() {
    if (*p_ == '\n') ++*line_;
    ++p_;
    return *this;
  }
  LineCountingIterator operator++(int) {
    auto old = *this;
    ++*this;
    return old;
  }
  friend bool operator==(const LineCountingIterator& a, const LineCountingIterator& b) { return a.p_ == b.p_; }

 private:
  const char* p_ = nullptr;
  int* line_ = nullptr;
};

// Records key lines and rejects duplicate keys; builds no DOM.
class KeyLocator : public nlohmann::json_sax<json> {
 public:
  KeyLocator(const int* line, LineMap* lines) : line_(line), lines_(lines) {}

  bool null() override { return value(); }
  bool boolean(bool) override { return value(); }
  bool number_integer(number_integer_t) override { return value(); }
  bool number_unsigned(number_unsigned_t) override { return value(); }
  bool number_float(number_float_t, const string_t&) override { return value(); }
  bool string(string_t&) override { return value(); }
  bool binary(binary_t&) override { return value(); }

  bool start_object(std::size_t) override {
    open(true);
    return true;
  }
  bool key(string_t& k) override {
    Frame& f = stack_.back();
    if (!f.keys.insert(k).second) {
      duplicate_ = "duplicate field '" + k + "'";
      duplicate_line_ = *line_;
      return false;
    }
    f.key = k;
    (*lines_)[path() + "/" + k] = *line_;
    return true;
  }
  bool end_object() override { return close(); }
  bool start_array(std::size_t) override {
    open(false);
    return true;
  }
  bool end_array() override { return close(); }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override { return false; }

  const std::string& duplicate() const { return duplicate_; }
  int duplicate_line() const { return duplicate_line_; }

 private:
  struct Frame {
    bool object = true;
    std::string key;
    std::size_t index = 0;
    std::set<std::string> keys;
  };

  // Pointer of the innermost open container.
  std::string path() const {
    std::string p;
    for (std::size_t i = 0; i + 1 < stack_.size(); ++i)
      p += "/" + (stack_[i].object ? stack_[i].key : std::to_string(stack_[i].index));
    return p;
  }
  void open(bool object) {
    if (!stack_.empty()) element();
    stack_.push_back({object, {}, 0, {}});
  }
  bool close() {
    stack_.pop_back();
    if (!stack_.empty() && !stack_.back().object) ++stack_.back().index;
    return true;
  }
  void element() {
    const Frame& f = stack_.back();
    if (!f.object) (*lines_)[path() + "/" + std::to_string(f.index)] = *line_;
  }
  bool value() {
    if (!stack_.empty()) {
      element();
      if (!stack_.back().object) ++stack_.back().index;
    }
    return true;
  }

  const int* line_;
  LineMap* lines_;
  std::vector<Frame> stack_;
  std::string duplicate_;
  int duplicate_line_ = 0;
};

int line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Typed access to one JSON object; every key must be consumed by finish().
class Fields {
 public:
  Fields(const json& obj, std::string path, const LineMap& lines) : obj_(obj), path_(std::move(path)), lines_(lines) {
    if (!obj.is_object()) fail("'" + display() + "' must be an object", path_);
  }

  bool has(const char* key) const { return obj_.contains(key); }

  const json* raw(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string child(const char* key) const { return path_ + "/" + key; }

  void get(const char* key, double& out) {
    if (const json* v = raw(key)) out = as_double(*v, child(key));
  }
  void get(const char* key, int& out) {
    if (const json* v = raw(key)) {
      if (!v->is_number_integer()) fail("'" + name(key) + "' must be an integer", child(key));
      const auto x = v->get<long long>();
      if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        fail("'" + name(key) + "' is out of range", child(key));
      out = static_cast<int>(x);
    }
  }
  void get(const char* key, std::uint64_t& out) {
    if (const json* v = raw(key)) {
      if (!v->is_number_unsigned()) fail("'" + name(key) + "' must be a non-negative integer", child(key));
      out = v->get<std::uint64_t>();
    }
  }
  void get(const char* key, bool& out) {
    if (const json* v = raw(key)) {
      if (!v->is_boolean()) fail("'" + name(key) + "' must be true or false", child(key));
      out = v->get<bool>();
    }
  }
  void get(const char* key, std::string& out) {
    if (const json* v = raw(key)) {
      if (!v->is_string()) fail("'" + name(key) + "' must be a string", child(key));
      out = v->get<std::string>();
    }
  }
  void get(const char* key, std::vector<double>& out) {
    if (const json* v = raw(key)) {
      if (!v->is_array()) fail("'" + name(key) + "' must be an array of numbers", child(key));
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) out.push_back(as_double((*v)[i], child(key) + "/" + std::to_string(i)));
    }
  }
  template <class Int>
  void get_integers(const char* key, std::vector<Int>& out, bool non_negative) {
    if (const json* v = raw(key)) {
      if (!v->is_array()) fail("'" + name(key) + "' must be an array of integers", child(key));
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const json& e = (*v)[i];
        const std::string p = child(key) + "/" + std::to_string(i);
        if (!e.is_number_integer() || (non_negative && e.get<long long>() < 0))
          fail("'" + name(key) + "' entries must be " + (non_negative ? "non-negative " : "") + "integers", p);
        out.push_back(static_cast<Int>(e.get<long long>()));
      }
    }
  }
  void get(const char* key, std::array<double, 3>& out) {
    if (const json* v = raw(key)) {
      if (!v->is_array() || v->size() != 3) fail("'" + name(key) + "' must be an array of 3 numbers", child(key));
      for (std::size_t i = 0; i < 3; ++i) out[i] = as_double((*v)[i], child(key) + "/" + std::to_string(i));
    }
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.contains(it.key())) fail("unknown field '" + name(it.key().c_str()) + "'", child(it.key().c_str()));
    }
  }

  [[noreturn]] void fail(const std::string& what, const std::string& pointer) const {
    auto it = lines_.find(pointer);
    throw ConfigError(what, it == lines_.end() ? 0 : it->second);
  }

  std::string name(const char* key) const {
    const std::string d = display();
    return d.empty() ? key : d + "." + key;
  }

 private:
  std::string display() const {
    std::string d = path_;
    std::replace(d.begin(), d.end(), '/', '.');
    return d.empty() ? d : d.substr(1);
  }

  double as_double(const json& v, const std::string& pointer) const {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    }
    fail("'" + pointer.substr(1) + "' must be a number", pointer);
  }

  const json& obj_;
  std::string path_;
  const LineMap& lines_;
  std::set<std::string> seen_;
};

SwitchHandling switch_handling_from(const std::string& s, Fields& f, const char* key) {
  if (s == "exact_reset") return SwitchHandling::exact_reset;
  if (s == "large_gamma") return SwitchHandling::large_gamma;
  f.fail("'" + f.name(key) + "' must be \"exact_reset\" or \"large_gamma\"", f.child(key));
}

std::string to_string(SwitchHandling h) { return h == SwitchHandling::exact_reset ? "exact_reset" : "large_gamma"; }

TimeFunction read_time_function(const json& v, const std::string& path, const LineMap& lines) {
  Fields f(v, path, lines);
  std::string kind = "constant";
  f.get("kind", kind);
  TimeFunction out;
  if (kind == "constant") {
    double value = 10.0;
    f.get("value", value);
    out = TimeFunction::constant(value);
  } else if (kind == "ramp") {
    out.kind = TimeFunction::Kind::ramp;
    f.get("t_start", out.t_start);
    f.get("t_end", out.t_end);
    f.get("v0", out.v0);
    f.get("v1", out.v1);
  } else if (kind == "step") {
    out.kind = TimeFunction::Kind::step;
    f.get("t_switch", out.t_start);
    f.get("v0", out.v0);
    f.get("v1", out.v1);
  } else {
    f.fail("'" + f.name("kind") + "' must be constant, ramp or step", f.child("kind"));
  }
  f.finish();
  try {
    out.validate();
  } catch (const std::invalid_argument& e) {
    f.fail(e.what(), path);
  }
  return out;
}

json time_function_json(const TimeFunction& tf) {
  switch (tf.kind) {
    case TimeFunction::Kind::constant:
      return {{"kind", "constant"}, {"value", tf.v0}};
    case TimeFunction::Kind::ramp:
      return {{"kind", "ramp"}, {"t_start", tf.t_start}, {"t_end", tf.t_end}, {"v0", tf.v0}, {"v1", tf.v1}};
    case TimeFunction::Kind::step:
      return {{"kind", "step"}, {"t_switch", tf.t_start}, {"v0", tf.v0}, {"v1", tf.v1}};
  }
  return {};
}

json number_or_inf(double v) { return std::isinf(v) && v > 0 ? json("inf") : json(v); }

void read_scenario(const json& v, const LineMap& lines, ScenarioConfig& s) {
  Fields f(v, "/scenario", lines);
  std::string kind = s.kind == ScenarioKind::lorenz ? "lorenz" : "aircraft";
  f.get("kind", kind);
  if (kind == "lorenz") {
    s.kind = ScenarioKind::lorenz;
  } else if (kind == "aircraft") {
    s.kind = ScenarioKind::aircraft;
  } else {
    f.fail("'scenario.kind' must be lorenz or aircraft", f.child("kind"));
  }
  f.get("dt", s.dt);
  f.get("horizon", s.horizon);
  f.get("snr_db", s.snr_db);
  f.get("x0", s.x0);
  if (const json* sg = f.raw("sigma")) s.sigma = read_time_function(*sg, f.child("sigma"), lines);
  f.get("rho", s.rho);
  f.get("beta", s.beta);
  f.get("target", s.target);
  f.get("omega_x0", s.omega_x0);
  if (const json* c = f.raw("coefficients")) {
    Fields g(*c, f.child("coefficients"), lines);
    g.get("c1", s.coefficients.c1);
    g.get("c2", s.coefficients.c2);
    g.get("other", s.coefficients.other);
    g.finish();
  }
  if (const json* e = f.raw("excitation")) {
    Fields g(*e, f.child("excitation"), lines);
    ExcitationConfig& x = s.excitation;
    g.get("speed_mean", x.speed_mean);
    g.get("speed_spread", x.speed_spread);
    g.get("speed_tau", x.speed_tau);
    g.get("speed_smooth", x.speed_smooth);
    g.get("speed_min", x.speed_min);
    g.get("speed_max", x.speed_max);
    g.get("delta_std", x.delta_std);
    g.get("delta_tau", x.delta_tau);
    g.get("delta_smooth", x.delta_smooth);
    g.get("delta_sine_amp", x.delta_sine_amp);
    g.get("delta_sine_period", x.delta_sine_period);
    g.get("rate_std", x.rate_std);
    g.get("rate_tau", x.rate_tau);
    g.get("rate_smooth", x.rate_smooth);
    g.finish();
  }
  if (const json* d = f.raw("derivative")) {
    Fields g(*d, f.child("derivative"), lines);
    g.get("window_len", s.derivative.window_len);
    g.get("poly_degree", s.derivative.poly_degree);
    g.get("stride", s.derivative.stride);
    g.finish();
  }
  f.finish();
}

void read_filter(const json& v, const LineMap& lines, FilterConfig& fc) {
  Fields f(v, "/filter", lines);
  std::string prior = fc.prior == PriorKind::noninformative ? "noninformative" : "diffuse";
  f.get("prior", prior);
  if (prior == "noninformative") {
    fc.prior = PriorKind::noninformative;
  } else if (prior == "diffuse") {
    fc.prior = PriorKind::diffuse;
  } else {
    f.fail("'filter.prior' must be noninformative or diffuse", f.child("prior"));
  }
  f.get("gamma", fc.gamma);
  if (const json* nv = f.raw("noise_var")) {
    if (nv->is_null()) {
      fc.noise_var.reset();
    } else {
      double x = 0.0;
      f.get("noise_var", x);
      fc.noise_var = x;
    }
  }
  f.get("rank_tol", fc.rank_tol);
  f.get_integers("drift_indices", fc.drift_indices, true);
  f.get("process_variance", fc.process_variance);
  f.get_integers("switch_instants", fc.switch_instants, false);
  if (f.has("switch_handling")) {
    std::string h;
    f.get("switch_handling", h);
    fc.switch_handling = switch_handling_from(h, f, "switch_handling");
  }
  f.get("sparsify_max_iter", fc.sparsify_max_iter);
  f.finish();
}

void read_selection(const json& v, const LineMap& lines, SelectionConfig& s) {
  Fields f(v, "/selection", lines);
  f.get("lambda", s.lambda);
  f.get("lambda_grid", s.lambda_grid);
  f.get("q_grid", s.q_grid);
  f.get("switch_grid", s.switch_grid);
  if (f.has("switch_score")) {
    std::string k;
    f.get("switch_score", k);
    try {
      s.switch_score = score_kind_from_string(k);
    } catch (const std::invalid_argument&) {
      f.fail("'" + f.name("switch_score") + "' must be \"automatic\", \"raw\", \"sparse\" or \"weighted\"",
             f.child("switch_score"));
    }
  }
  f.finish();
}

RunConfig from_json(const json& root, const LineMap& lines) {
  Fields f(root, "", lines);
  RunConfig cfg;
  if (!f.has("schema_version")) throw ConfigError("missing field 'schema_version'", 1);
  f.get("schema_version", cfg.schema_version);
  if (cfg.schema_version != kConfigSchemaVersion)
    f.fail("unsupported schema_version " + std::to_string(cfg.schema_version) + " (expected " +
               std::to_string(kConfigSchemaVersion) + ")",
           "/schema_version");
  f.get("name", cfg.name);
  f.get("seed", cfg.seed);
  f.get("output_dir", cfg.output_dir);
  if (const json* s = f.raw("scenario")) read_scenario(*s, lines, cfg.scenario);
  if (const json* l = f.raw("library")) {
    Fields g(*l, "/library", lines);
    g.get("max_degree", cfg.library.max_degree);
    g.get("include_constant", cfg.library.include_constant);
    g.finish();
  }
  if (const json* fl = f.raw("filter")) read_filter(*fl, lines, cfg.filter);
  if (const json* s = f.raw("selection")) read_selection(*s, lines, cfg.selection);
  f.finish();

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    if (e.line() != 0 || e.field().empty()) throw;
    // Point at the offending key, or failing that at its enclosing section.
    std::string pointer = "/" + e.field();
    std::replace(pointer.begin(), pointer.end(), '.', '/');
    while (!pointer.empty() && !lines.contains(pointer)) pointer.erase(pointer.rfind('/'));
    throw ConfigError(e.what(), pointer.empty() ? 0 : lines.at(pointer), e.field());
  }
  return cfg;
}

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw ConfigError(field + ": " + why, 0, field);
}

void require_grid(const std::vector<double>& values, CandidateKind kind, const char* field) {
  if (values.empty()) return;
  try {
    CandidateGrid{kind, values}.validate();
  } catch (const std::invalid_argument& e) {
    invalid(field, e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  if (schema_version != kConfigSchemaVersion) invalid("schema_version", "unsupported version");
  const ScenarioConfig& s = scenario;
  if (!(s.dt > 0.0) || !std::isfinite(s.dt)) invalid("scenario.dt", "must be > 0");
  if (!(s.horizon > 0.0) || !std::isfinite(s.horizon)) invalid("scenario.horizon", "must be > 0");
  if (std::round(s.horizon / s.dt) < 1.0) invalid("scenario.horizon", "shorter than one sample");
  if (std::isnan(s.snr_db) || (std::isinf(s.snr_db) && s.snr_db < 0)) invalid("scenario.snr_db", "must be finite or inf");
  if (s.kind == ScenarioKind::lorenz) {
    for (double x : s.x0)
      if (!std::isfinite(x)) invalid("scenario.x0", "must be finite");
    try {
      s.sigma.validate();
    } catch (const std::invalid_argument& e) {
      invalid("scenario.sigma", e.what());
    }
    if (s.sigma.kind == TimeFunction::Kind::step && !(s.sigma.t_start > 0.0 && s.sigma.t_start < s.horizon))
      invalid("scenario.sigma", "step instant must lie inside the horizon");
    if (!std::isfinite(s.rho) || !std::isfinite(s.beta)) invalid("scenario.rho", "rho and beta must be finite");
    if (s.target < 0 || s.target > 2) invalid("scenario.target", "must be 0, 1 or 2");
  } else {
    if (!std::isfinite(s.coefficients.c1) || !std::isfinite(s.coefficients.c2))
      invalid("scenario.coefficients", "must be finite");
    const ExcitationConfig& x = s.excitation;
    if (!(x.speed_mean > 0.0) || !(x.speed_min > 0.0) || !(x.speed_max > x.speed_min))
      invalid("scenario.excitation", "speed bounds must satisfy 0 < speed_min < speed_max and speed_mean > 0");
    if (!(x.speed_tau > 0.0) || !(x.delta_tau > 0.0) || !(x.rate_tau > 0.0))
      invalid("scenario.excitation", "time constants must be > 0");
    if (x.speed_spread < 0.0 || x.delta_std < 0.0 || x.rate_std < 0.0 || x.delta_sine_amp < 0.0)
      invalid("scenario.excitation", "spreads and amplitudes must be >= 0");
    if (!(x.delta_sine_period > 0.0)) invalid("scenario.excitation", "delta_sine_period must be > 0");
    const DerivativeConfig& d = s.derivative;
    if (!(d.window_len > 0.0) || d.poly_degree < 1 || !(d.stride > 0.0))
      invalid("scenario.derivative", "window_len and stride must be > 0, poly_degree >= 1");
    if (2 * static_cast<long>(std::floor(d.window_len / (2.0 * s.dt) + 1e-9)) + 1 < d.poly_degree + 1)
      invalid("scenario.derivative", "window holds fewer samples than the polynomial needs");
    if (d.window_len >= s.horizon) invalid("scenario.derivative", "window longer than the horizon");
  }

  if (library.max_degree < 1 || library.max_degree > 8) invalid("library.max_degree", "must lie in 1..8");
  const std::size_t n_vars = s.kind == ScenarioKind::lorenz ? 3 : 5;
  const std::size_t p = enumerate_monomials(n_vars, library.max_degree, library.include_constant).size();

  const FilterConfig& f = filter;
  if (!(f.gamma > 0.0) || !std::isfinite(f.gamma)) invalid("filter.gamma", "must be > 0");
  if (f.noise_var && (!(*f.noise_var > 0.0) || !std::isfinite(*f.noise_var)))
    invalid("filter.noise_var", "must be > 0");
  if (!(f.rank_tol > 0.0 && f.rank_tol < 1.0)) invalid("filter.rank_tol", "must lie in (0, 1)");
  for (std::size_t i : f.drift_indices)
    if (i >= p) invalid("filter.drift_indices", "index " + std::to_string(i) + " exceeds the library size");
  if (!(f.process_variance >= 0.0) || !std::isfinite(f.process_variance))
    invalid("filter.process_variance", "must be >= 0");
  if (f.sparsify_max_iter < 1) invalid("filter.sparsify_max_iter", "must be >= 1");

  const SelectionConfig& sel = selection;
  if (!(sel.lambda >= 0.0) || !std::isfinite(sel.lambda)) invalid("selection.lambda", "must be >= 0");
  require_grid(sel.lambda_grid, CandidateKind::lambda, "selection.lambda_grid");
  require_grid(sel.q_grid, CandidateKind::process_variance, "selection.q_grid");
  require_grid(sel.switch_grid, CandidateKind::switch_instant, "selection.switch_grid");
}

RunConfig parse_config(std::string_view text) {
  LineMap lines;
  int line = 1;
  KeyLocator locator(&line, &lines);
  const LineCountingIterator first(text.data(), &line);
  const LineCountingIterator last(text.data() + text.size(), &line);
  const bool ok = json::sax_parse(first, last, &locator);
  if (!locator.duplicate().empty()) throw ConfigError(locator.duplicate(), locator.duplicate_line());

  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what(), line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  if (!ok) throw ConfigError("malformed JSON");
  return from_json(root, lines);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json to_json(const RunConfig& cfg) {
  const ScenarioConfig& s = cfg.scenario;
  json scenario = {{"kind", s.kind == ScenarioKind::lorenz ? "lorenz" : "aircraft"},
                   {"dt", s.dt},
                   {"horizon", s.horizon},
                   {"snr_db", number_or_inf(s.snr_db)}};
  if (s.kind == ScenarioKind::lorenz) {
    scenario["x0"] = s.x0;
    scenario["sigma"] = time_function_json(s.sigma);
    scenario["rho"] = s.rho;
    scenario["beta"] = s.beta;
    scenario["target"] = s.target;
  } else {
    const ExcitationConfig& x = s.excitation;
    scenario["omega_x0"] = s.omega_x0;
    scenario["coefficients"] = {{"c1", s.coefficients.c1}, {"c2", s.coefficients.c2}, {"other", s.coefficients.other}};
    scenario["excitation"] = {{"speed_mean", x.speed_mean},       {"speed_spread", x.speed_spread},
                              {"speed_tau", x.speed_tau},         {"speed_smooth", x.speed_smooth},
                              {"speed_min", x.speed_min},         {"speed_max", x.speed_max},
                              {"delta_std", x.delta_std},         {"delta_tau", x.delta_tau},
                              {"delta_smooth", x.delta_smooth},   {"delta_sine_amp", x.delta_sine_amp},
                              {"delta_sine_period", x.delta_sine_period}, {"rate_std", x.rate_std},
                              {"rate_tau", x.rate_tau},           {"rate_smooth", x.rate_smooth}};
    scenario["derivative"] = {{"window_len", s.derivative.window_len},
                              {"poly_degree", s.derivative.poly_degree},
                              {"stride", s.derivative.stride}};
  }
  const FilterConfig& f = cfg.filter;
  json filter = {{"prior", f.prior == PriorKind::noninformative ? "noninformative" : "diffuse"},
                 {"gamma", f.gamma},
                 {"noise_var", f.noise_var ? json(*f.noise_var) : json(nullptr)},
                 {"rank_tol", f.rank_tol},
                 {"drift_indices", f.drift_indices},
                 {"process_variance", f.process_variance},
                 {"switch_instants", f.switch_instants},
                 {"switch_handling", to_string(f.switch_handling)},
                 {"sparsify_max_iter", f.sparsify_max_iter}};
  return {{"schema_version", cfg.schema_version},
          {"name", cfg.name},
          {"seed", cfg.seed},
          {"output_dir", cfg.output_dir},
          {"scenario", scenario},
          {"library", {{"max_degree", cfg.library.max_degree}, {"include_constant", cfg.library.include_constant}}},
          {"filter", filter},
          {"selection",
           {{"lambda", cfg.selection.lambda},
            {"lambda_grid", cfg.selection.lambda_grid},
            {"q_grid", cfg.selection.q_grid},
            {"switch_grid", cfg.selection.switch_grid},
            {"switch_score", to_string(cfg.selection.switch_score)}}}};
}

std::string dump_config(const RunConfig& cfg) {
  // max_digits10 keeps doubles exact through a round trip.
  return to_json(cfg).dump(2) + "\n";
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"lorenz-invariant", "lorenz-smooth", "lorenz-switch", "aircraft"};
  return names;
}

RunConfig default_config(std::string_view experiment) {
  RunConfig cfg;
  cfg.name = std::string(experiment);
  auto lambdas = [](double step, int count) {
    std::vector<double> g;
    for (int k = 1; k <= count; ++k) g.push_back(step * k);
    return g;
  };
  if (experiment == "lorenz-invariant") {
    cfg.scenario.horizon = 20.0;
    cfg.selection.lambda_grid = lambdas(0.05, 20);
  } else if (experiment == "lorenz-switch") {
    cfg.scenario.horizon = 20.0;
    cfg.scenario.sigma = TimeFunction::step(6.0, 20.0, 10.0);
    cfg.selection.lambda_grid = lambdas(0.05, 20);
    cfg.selection.switch_grid = lambdas(50.0, 40);
    cfg.selection.switch_score = ScoreKind::weighted;
    cfg.scenario.x0 = {1.88, 3.44, 10.24};
  } else if (experiment == "lorenz-smooth") {
    cfg.scenario.horizon = 100.0;
    cfg.scenario.sigma = TimeFunction::ramp(3.0, 100.0, 20.0, 10.0);
    cfg.scenario.x0 = {1.88, 3.44, 10.24};
    cfg.filter.drift_indices = {0, 1, 2};  // x1, x2, x3
    cfg.selection.lambda_grid = lambdas(0.05, 20);
    for (int e = -9; e <= -1; ++e) cfg.selection.q_grid.push_back(std::pow(10.0, e));
  } else if (experiment == "aircraft") {
    cfg.scenario.kind = ScenarioKind::aircraft;
    cfg.scenario.horizon = 100.0;
    cfg.scenario.snr_db = 20.0;
    cfg.library.max_degree = 3;
    cfg.selection.lambda = 5e-4;
    cfg.selection.lambda_grid = lambdas(5e-5, 30);
  } else {
    throw ConfigError("unknown experiment '" + std::string(experiment) +
                      "' (expected lorenz-invariant, lorenz-smooth, lorenz-switch or aircraft)");
  }
  return cfg;
}

}  // namespace skf
