#include "feshbach/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "feshbach/error.hpp"

namespace feshbach::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool to_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size() && std::isfinite(out);
}

double number(std::string_view s, const std::string& what) {
  double v = 0.0;
  if (!to_double(trim(s), v)) fail(ErrorKind::Config, "invalid number '" + std::string(s) + "' for " + what);
  return v;
}

long long integer(std::string_view s, const std::string& what) {
  s = trim(s);
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    fail(ErrorKind::Config, "invalid integer '" + std::string(s) + "' for " + what);
  return v;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

radial::Potential parse_potential(std::string_view text) {
  text = trim(text);
  if (text == "zero" || text == "none" || text == "0") return radial::Potential::zero();
  radial::Potential p;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto plus = text.find('+', start);
    // A '+' inside a number exponent (1e+3) is not a separator.
    while (plus != std::string_view::npos && plus > 0 && (text[plus - 1] == 'e' || text[plus - 1] == 'E')) {
      plus = text.find('+', plus + 1);
    }
    std::string_view term = trim(text.substr(start, plus == std::string_view::npos ? std::string_view::npos : plus - start));
    double coef = 1.0;
    if (const auto star = term.find('*'); star != std::string_view::npos) {
      coef = number(term.substr(0, star), "potential coefficient");
      term = trim(term.substr(star + 1));
    }
    const auto tok = split_ws(term);
    if (tok.size() < 3 || tok.size() > 4)
      fail(ErrorKind::Config, "potential term '" + std::string(term) + "' must read: family strength range [sign]");
    const double strength = number(tok[1], "potential strength");
    const double range = number(tok[2], "potential range");
    radial::PotentialSpec spec;
    try {
      if (tok[0] == "square_barrier") {
        spec = radial::PotentialSpec::square_barrier(strength, range);
      } else {
        spec.family = radial::parse_family(tok[0]);
        spec.strength = strength;
        spec.range = range;
        spec.sign = spec.family == radial::PotentialFamily::SquareWell ||
                            spec.family == radial::PotentialFamily::PoschlTeller
                        ? radial::PotentialSign::Attractive
                        : radial::PotentialSign::Repulsive;
      }
      if (tok.size() == 4) spec.sign = radial::parse_sign(tok[3]);
      spec.validate();
    } catch (const Error& e) {
      fail(ErrorKind::Config, e.what());
    }
    p.add(coef, spec);
    if (plus == std::string_view::npos) break;
    start = plus + 1;
  }
  return p;
}

std::string format_potential(const radial::Potential& p) {
  if (p.is_zero() && p.terms().empty()) return "zero";
  std::string out;
  for (const auto& t : p.terms()) {
    if (!out.empty()) out += " + ";
    if (t.coefficient != 1.0) out += fmt(t.coefficient) + " * ";
    out += std::string(radial::to_string(t.spec.family)) + " " + fmt(t.spec.strength) + " " + fmt(t.spec.range) + " " +
           std::string(radial::to_string(t.spec.sign));
  }
  return out;
}

RunConfig parse_config(std::string_view text) {
  static const std::set<std::string> model_keys{"v", "u", "w", "w2", "beta", "lambda", "seed", "output"};
  static const std::set<std::string> grid_keys{"r_max", "n", "rule"};
  static const std::set<std::string> scan_keys{"min", "max", "points", "k0", "richardson_terms", "k_count"};
  static const std::set<std::string> field_keys{"slope", "offset", "b_min", "b_max", "samples"};
  RunConfig cfg;
  cfg.text = std::string(text);
  cfg.V = radial::PotentialSpec::square_barrier(4.0, 1.0);
  cfg.U = radial::PotentialSpec::square_well(4.0, 1.0);
  cfg.W1 = radial::PotentialSpec::gaussian(4.0, 1.0);
  std::string section;
  std::set<std::string> seen_sections, seen_keys;
  bool have_field_section = false;
  FieldConfig field;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = " (line " + std::to_string(line_no) + ")";
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorKind::Config, "malformed section header" + where);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "model" && section != "grid" && section != "scan" && section != "field")
        fail(ErrorKind::Config, "unknown section '" + section + "'" + where);
      if (!seen_sections.insert(section).second) fail(ErrorKind::Config, "duplicate section '" + section + "'" + where);
      if (section == "field") have_field_section = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(ErrorKind::Config, "expected key = value" + where);
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (section.empty()) fail(ErrorKind::Config, "key '" + key + "' outside any section" + where);
    const auto& allowed = section == "model" ? model_keys
                          : section == "grid" ? grid_keys
                          : section == "scan" ? scan_keys
                                              : field_keys;
    if (!allowed.count(key)) fail(ErrorKind::Config, "unknown key '" + key + "'" + where);
    if (!seen_keys.insert(section + "." + key).second) fail(ErrorKind::Config, "duplicate key '" + key + "'" + where);
    if (value.empty()) fail(ErrorKind::Config, "empty value for key '" + key + "'" + where);
    const std::string what = "key '" + key + "'" + where;
    try {
      if (section == "model") {
        if (key == "v") cfg.V = parse_potential(value);
        else if (key == "u") cfg.U = parse_potential(value);
        else if (key == "w") cfg.W1 = parse_potential(value);
        else if (key == "w2") cfg.W2 = parse_potential(value);
        else if (key == "beta") cfg.beta = number(value, what);
        else if (key == "lambda") cfg.lambda = number(value, what);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(integer(value, what));
        else if (key == "output") cfg.output = std::string(value);
      } else if (section == "grid") {
        if (key == "r_max") cfg.grid.r_max = number(value, what);
        else if (key == "n") {
          const long long n = integer(value, what);
          if (n < 16) fail(ErrorKind::Config, "grid size n must be at least 16" + where);
          cfg.grid.n = static_cast<std::size_t>(n);
        } else if (key == "rule") {
          try {
            cfg.grid.rule = radial::parse_rule(value);
          } catch (const Error& e) {
            fail(ErrorKind::Config, std::string(e.what()) + where);
          }
        }
      } else if (section == "scan") {
        if (key == "min") cfg.sweep.min = number(value, what);
        else if (key == "max") cfg.sweep.max = number(value, what);
        else if (key == "points") cfg.sweep.points = static_cast<int>(integer(value, what));
        else if (key == "k0") cfg.k0 = number(value, what);
        else if (key == "richardson_terms") cfg.richardson_terms = static_cast<int>(integer(value, what));
        else if (key == "k_count") cfg.k_count = static_cast<int>(integer(value, what));
      } else {
        if (key == "slope") field.slope = number(value, what);
        else if (key == "offset") field.offset = number(value, what);
        else if (key == "b_min") field.B_min = number(value, what);
        else if (key == "b_max") field.B_max = number(value, what);
        else if (key == "samples") field.samples = static_cast<int>(integer(value, what));
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Config && std::string(e.what()).find("(line") != std::string::npos) throw;
      fail(ErrorKind::Config, std::string(e.what()) + where);
    }
  }
  if (!seen_sections.count("model")) fail(ErrorKind::Config, "missing [model] section");
  // Validation.
  if (!(cfg.grid.r_max > 0.0)) fail(ErrorKind::Config, "grid r_max must be positive");
  if (!(cfg.sweep.min > 0.0)) fail(ErrorKind::Config, "sweep min must be positive");
  if (cfg.sweep.max && !(*cfg.sweep.max > cfg.sweep.min)) fail(ErrorKind::Config, "sweep requires min < max");
  if (cfg.sweep.points < 2) fail(ErrorKind::Config, "sweep needs at least two points");
  if (!(cfg.k0 > 0.0)) fail(ErrorKind::Config, "k0 must be positive");
  if (cfg.richardson_terms < 0) fail(ErrorKind::Config, "richardson_terms must be non-negative");
  if (cfg.k_count < 5) fail(ErrorKind::Config, "k_count must be at least 5");
  if (cfg.lambda && !(*cfg.lambda > 0.0)) fail(ErrorKind::Config, "lambda must be positive");
  if (have_field_section) {
    if (!(field.B_max > field.B_min)) fail(ErrorKind::Config, "field range requires b_min < b_max");
    if (field.slope == 0.0) fail(ErrorKind::Config, "field slope must be nonzero");
    if (field.samples < 8) fail(ErrorKind::Config, "field samples must be at least 8");
    cfg.field = field;
  }
  cfg.W = cfg.W1;
  if (cfg.beta != 0.0)
    for (const auto& t : cfg.W2.terms()) cfg.W.add(cfg.beta * t.coefficient, t.spec);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Config, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace feshbach::cli
