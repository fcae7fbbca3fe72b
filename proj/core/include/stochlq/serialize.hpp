#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "stochlq/evaluate.hpp"
#include "stochlq/frequency.hpp"
#include "stochlq/lqr.hpp"
#include "stochlq/montecarlo.hpp"
#include "stochlq/stability.hpp"
#include "stochlq/theta.hpp"

namespace stochlq {

/// Reals are written exactly (shortest round-trip form). Infinities become
/// the strings "inf" / "-inf" and NaN becomes "nan", since JSON has no
/// literal for them.
nlohmann::json real_to_json(double v);
double real_from_json(const nlohmann::json& j, const char* name);

nlohmann::json to_json(const StabilityCertificate& c);
nlohmann::json to_json(const ThetaSolution& s);  // Θ and residuals; X is omitted
nlohmann::json to_json(const FrequencyReport& r);
nlohmann::json to_json(const FeedbackLaw& law);
nlohmann::json to_json(const CostBreakdown& c);
nlohmann::json to_json(const CostEstimate& e);  // per-path costs are omitted

/// law.json: {"P", "h", "A_cl", "riccati_residual", "closed_loop_abscissa"}.
FeedbackLaw feedback_law_from_json(const nlohmann::json& doc);
void save_feedback_law(const FeedbackLaw& law, const std::filesystem::path& path);
/// Throws ParseError on malformed files.
FeedbackLaw load_feedback_law(const std::filesystem::path& path);

/// Sampled control file as described in control.hpp. Throws ParseError.
ControlSignal load_sampled_control(const std::filesystem::path& path);

/// Pretty-printed with a trailing newline. Byte-identical for equal documents.
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

}  // namespace stochlq
