#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pdesgd {

enum class ProblemVariant { StronglyConvex, ConvexAveraging };
enum class StepRuleKind { StronglyConvex, Constant, Variable };

// Flat sectioned key-value experiment configuration. Parsing is strict:
// unknown sections or keys and malformed values are reported with their line
// number. emit() writes the canonical form; emit -> parse -> emit is the
// identity.
struct ExperimentConfig {
  // [problem]
  ProblemVariant variant = ProblemVariant::StronglyConvex;
  double lambda = 0.1;

  // [field]
  std::string family = "cosine";  // cosine | lognormal | piecewise
  double a0 = 5.0;
  int m = 20;
  double l = 0.5;    // cosine correlation length
  double l1 = 1.0;   // lognormal correlation lengths
  double l2 = 1.0;
  double sigma = 0.1;
  double trunc = 100.0;
  double upper_lo = 3.0, upper_hi = 4.0;   // piecewise blocks
  double lower_lo = 1.0, lower_hi = 2.0;
  double sobolev_s = 1.0;
  double holder_t = 1.0;
  double a_min = 1.0;  // recorded lower field bound feeding the M bound

  // [step]
  StepRuleKind rule = StepRuleKind::StronglyConvex;
  double theta = 6.0;
  double bias_k = 5.0;       // K
  bool nu_auto = true;       // nu = derive_nu(theta, K, lambda) when true
  double nu = 0.0;

  // [mesh]
  bool refine = true;
  double c = 17.5;
  bool p_auto = true;        // p = min(2 s, t, 1) when true
  double p = 1.0;
  int initial_level = 0;
  int max_level = -1;

  // [run]
  int iterations = 100;
  double alpha = 0.5;
  std::uint64_t seed = 1;
  std::string out = "out";

  // [mc]
  int samples = 1000;
  int checkpoints = 0;

  // [sweep]
  std::vector<int> iterations_list;
  bool rule_constant = true;
  bool rule_variable = true;
  int seeds = 5;

  // [reference]
  std::string reference_path;
  // [compare]
  std::string compare_run;

  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig parse_file(const std::string& path);
  void emit(std::ostream& out) const;
  std::string emit_string() const;
};

}  // namespace pdesgd
