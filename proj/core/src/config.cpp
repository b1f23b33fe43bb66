#include "pdesgd/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pdesgd {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw std::runtime_error("config line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) fail(line, "malformed number '" + v + "'");
    return d;
  } catch (const std::invalid_argument&) {
    fail(line, "malformed number '" + v + "'");
  } catch (const std::out_of_range&) {
    fail(line, "number out of range '" + v + "'");
  }
}

long long parse_int(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    long long d = std::stoll(v, &pos);
    if (pos != v.size()) fail(line, "malformed integer '" + v + "'");
    return d;
  } catch (const std::invalid_argument&) {
    fail(line, "malformed integer '" + v + "'");
  } catch (const std::out_of_range&) {
    fail(line, "integer out of range '" + v + "'");
  }
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail(line, "expected true/false, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& v, int line) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<int>(parse_int(item, line)));
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  ExperimentConfig cfg;
  cfg.iterations_list.clear();
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = s.substr(1, s.size() - 2);
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));

    auto unknown = [&]() {
      fail(line, "unknown key '" + key + "' in section [" + section + "]");
    };

    if (section == "problem") {
      if (key == "variant") {
        if (val == "strongly_convex") cfg.variant = ProblemVariant::StronglyConvex;
        else if (val == "convex_averaging") cfg.variant = ProblemVariant::ConvexAveraging;
        else fail(line, "unknown variant '" + val + "'");
      } else if (key == "lambda") cfg.lambda = parse_double(val, line);
      else unknown();
    } else if (section == "field") {
      if (key == "family") {
        if (val != "cosine" && val != "lognormal" && val != "piecewise")
          fail(line, "unknown family '" + val + "'");
        cfg.family = val;
      }
      else if (key == "a0") cfg.a0 = parse_double(val, line);
      else if (key == "m") cfg.m = static_cast<int>(parse_int(val, line));
      else if (key == "l") cfg.l = parse_double(val, line);
      else if (key == "l1") cfg.l1 = parse_double(val, line);
      else if (key == "l2") cfg.l2 = parse_double(val, line);
      else if (key == "sigma") cfg.sigma = parse_double(val, line);
      else if (key == "trunc") cfg.trunc = parse_double(val, line);
      else if (key == "upper_lo") cfg.upper_lo = parse_double(val, line);
      else if (key == "upper_hi") cfg.upper_hi = parse_double(val, line);
      else if (key == "lower_lo") cfg.lower_lo = parse_double(val, line);
      else if (key == "lower_hi") cfg.lower_hi = parse_double(val, line);
      else if (key == "s") cfg.sobolev_s = parse_double(val, line);
      else if (key == "t") cfg.holder_t = parse_double(val, line);
      else if (key == "a_min") cfg.a_min = parse_double(val, line);
      else unknown();
    } else if (section == "step") {
      if (key == "rule") {
        if (val == "strongly_convex") cfg.rule = StepRuleKind::StronglyConvex;
        else if (val == "constant") cfg.rule = StepRuleKind::Constant;
        else if (val == "variable") cfg.rule = StepRuleKind::Variable;
        else fail(line, "unknown rule '" + val + "'");
      } else if (key == "theta") cfg.theta = parse_double(val, line);
      else if (key == "K") cfg.bias_k = parse_double(val, line);
      else if (key == "nu") {
        if (val == "auto") { cfg.nu_auto = true; cfg.nu = 0.0; }
        else { cfg.nu_auto = false; cfg.nu = parse_double(val, line); }
      } else unknown();
    } else if (section == "mesh") {
      if (key == "refine") cfg.refine = parse_bool(val, line);
      else if (key == "c") cfg.c = parse_double(val, line);
      else if (key == "p") {
        if (val == "auto") { cfg.p_auto = true; cfg.p = 1.0; }
        else { cfg.p_auto = false; cfg.p = parse_double(val, line); }
      } else if (key == "initial_level") cfg.initial_level = static_cast<int>(parse_int(val, line));
      else if (key == "max_level") cfg.max_level = static_cast<int>(parse_int(val, line));
      else unknown();
    } else if (section == "run") {
      if (key == "iterations") cfg.iterations = static_cast<int>(parse_int(val, line));
      else if (key == "alpha") cfg.alpha = parse_double(val, line);
      else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(val, line));
      else if (key == "out") cfg.out = val;
      else unknown();
    } else if (section == "mc") {
      if (key == "samples") cfg.samples = static_cast<int>(parse_int(val, line));
      else if (key == "checkpoints") cfg.checkpoints = static_cast<int>(parse_int(val, line));
      else unknown();
    } else if (section == "sweep") {
      if (key == "iterations_list") cfg.iterations_list = parse_int_list(val, line);
      else if (key == "rule_constant") cfg.rule_constant = parse_bool(val, line);
      else if (key == "rule_variable") cfg.rule_variable = parse_bool(val, line);
      else if (key == "seeds") cfg.seeds = static_cast<int>(parse_int(val, line));
      else unknown();
    } else if (section == "reference") {
      if (key == "path") cfg.reference_path = val;
      else unknown();
    } else if (section == "compare") {
      if (key == "run") cfg.compare_run = val;
      else unknown();
    } else {
      fail(line, "unknown section [" + section + "]");
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return parse(in);
}

void ExperimentConfig::emit(std::ostream& os) const {
  os << "[problem]\n";
  os << "variant = "
     << (variant == ProblemVariant::StronglyConvex ? "strongly_convex"
                                                   : "convex_averaging")
     << "\n";
  os << "lambda = " << fmt(lambda) << "\n\n";

  os << "[field]\n";
  os << "family = " << family << "\n";
  os << "a0 = " << fmt(a0) << "\n";
  os << "m = " << m << "\n";
  os << "l = " << fmt(l) << "\n";
  os << "l1 = " << fmt(l1) << "\n";
  os << "l2 = " << fmt(l2) << "\n";
  os << "sigma = " << fmt(sigma) << "\n";
  os << "trunc = " << fmt(trunc) << "\n";
  os << "upper_lo = " << fmt(upper_lo) << "\n";
  os << "upper_hi = " << fmt(upper_hi) << "\n";
  os << "lower_lo = " << fmt(lower_lo) << "\n";
  os << "lower_hi = " << fmt(lower_hi) << "\n";
  os << "s = " << fmt(sobolev_s) << "\n";
  os << "t = " << fmt(holder_t) << "\n";
  os << "a_min = " << fmt(a_min) << "\n\n";

  os << "[step]\n";
  os << "rule = "
     << (rule == StepRuleKind::StronglyConvex
             ? "strongly_convex"
             : rule == StepRuleKind::Constant ? "constant" : "variable")
     << "\n";
  os << "theta = " << fmt(theta) << "\n";
  os << "K = " << fmt(bias_k) << "\n";
  os << "nu = " << (nu_auto ? std::string("auto") : fmt(nu)) << "\n\n";

  os << "[mesh]\n";
  os << "refine = " << (refine ? "true" : "false") << "\n";
  os << "c = " << fmt(c) << "\n";
  os << "p = " << (p_auto ? std::string("auto") : fmt(p)) << "\n";
  os << "initial_level = " << initial_level << "\n";
  os << "max_level = " << max_level << "\n\n";

  os << "[run]\n";
  os << "iterations = " << iterations << "\n";
  os << "alpha = " << fmt(alpha) << "\n";
  os << "seed = " << seed << "\n";
  os << "out = " << out << "\n\n";

  os << "[mc]\n";
  os << "samples = " << samples << "\n";
  os << "checkpoints = " << checkpoints << "\n\n";

  os << "[sweep]\n";
  os << "iterations_list = ";
  for (std::size_t i = 0; i < iterations_list.size(); ++i)
    os << (i ? "," : "") << iterations_list[i];
  os << "\n";
  os << "rule_constant = " << (rule_constant ? "true" : "false") << "\n";
  os << "rule_variable = " << (rule_variable ? "true" : "false") << "\n";
  os << "seeds = " << seeds << "\n\n";

  os << "[reference]\n";
  os << "path = " << reference_path << "\n\n";

  os << "[compare]\n";
  os << "run = " << compare_run << "\n";
}

std::string ExperimentConfig::emit_string() const {
  std::ostringstream os;
  emit(os);
  return os.str();
}

}  // namespace pdesgd
