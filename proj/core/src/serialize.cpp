#include "stochlq/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "stochlq/errors.hpp"

namespace stochlq {
namespace {

nlohmann::json parse_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ParseError(std::string("cannot open ") + what + " " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace

nlohmann::json real_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double real_from_json(const nlohmann::json& j, const char* name) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ParseError(std::string(name) + ": expected a number");
}

nlohmann::json to_json(const StabilityCertificate& c) {
  return {{"verdict", to_string(c.verdict)},
          {"hurwitz_abscissa", real_to_json(c.hurwitz_abscissa)},
          {"ms_abscissa", real_to_json(c.ms_abscissa)},
          {"margin", real_to_json(c.margin)}};
}

nlohmann::json to_json(const ThetaSolution& s) {
  return {{"Theta", matrix_to_json(s.Theta)},
          {"residual_fixed_point", real_to_json(s.residual_eq4)},
          {"residual_gramian", real_to_json(s.residual_gramian)},
          {"method", to_string(s.method)},
          {"iterations", s.iterations}};
}

nlohmann::json to_json(const FrequencyReport& r) {
  return {{"verdict", to_string(r.verdict)},
          {"delta_hat", real_to_json(r.delta_hat)},
          {"min_observed", real_to_json(r.min_observed)},
          {"lambda_argmin", real_to_json(r.lambda_argmin)},
          {"lambda_max", real_to_json(r.lambda_max)},
          {"grid_points", r.grid_points},
          {"tail_bound", real_to_json(r.tail_bound)},
          {"tol", real_to_json(r.tol)}};
}

nlohmann::json to_json(const FeedbackLaw& law) {
  return {{"P", matrix_to_json(law.P)},
          {"h", matrix_to_json(law.h)},
          {"A_cl", matrix_to_json(law.A_cl)},
          {"riccati_residual", real_to_json(law.riccati_residual)},
          {"closed_loop_abscissa", real_to_json(law.closed_loop_abscissa)}};
}

nlohmann::json to_json(const CostBreakdown& c) {
  return {{"total", real_to_json(c.total)},
          {"quadratic", real_to_json(c.quadratic)},
          {"cross", real_to_json(c.cross)},
          {"rho", real_to_json(c.constant_rho)},
          {"horizon", real_to_json(c.horizon)},
          {"truncation_error_bound", real_to_json(c.truncation_error_bound)}};
}

nlohmann::json to_json(const CostEstimate& e) {
  return {{"mean_cost", real_to_json(e.mean_cost)},
          {"std_error", real_to_json(e.std_error)},
          {"paths", e.paths},
          {"dt", real_to_json(e.dt)},
          {"warnings", e.warnings}};
}

FeedbackLaw feedback_law_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("law file must be a JSON object");
  try {
    FeedbackLaw law;
    law.P = matrix_from_json(doc.at("P"), "P");
    law.h = matrix_from_json(doc.at("h"), "h");
    law.A_cl = matrix_from_json(doc.at("A_cl"), "A_cl");
    law.riccati_residual = real_from_json(doc.at("riccati_residual"), "riccati_residual");
    law.closed_loop_abscissa = real_from_json(doc.at("closed_loop_abscissa"), "closed_loop_abscissa");
    const auto n = law.P.rows();
    if (law.P.cols() != n || law.h.rows() != n || law.A_cl.rows() != n || law.A_cl.cols() != n) {
      throw DimensionError("law file: inconsistent shapes of P, h, A_cl");
    }
    return law;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid law document: ") + e.what());
  }
}

void save_feedback_law(const FeedbackLaw& law, const std::filesystem::path& path) {
  write_json(to_json(law), path);
}

FeedbackLaw load_feedback_law(const std::filesystem::path& path) {
  return feedback_law_from_json(parse_file(path, "law file"));
}

ControlSignal load_sampled_control(const std::filesystem::path& path) {
  const auto doc = parse_file(path, "control file");
  try {
    return sampled_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid control document: ") + e.what());
  }
}

void write_json(const nlohmann::json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace stochlq
