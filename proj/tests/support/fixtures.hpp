#pragma once

#include <cmath>

#include "stochlq/model.hpp"

namespace fixture {

using stochlq::MatrixXd;
using stochlq::VectorXd;

inline MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

/// dx = (−αx + bu)dt + c·x dw.
inline stochlq::SystemModel scalar_system(double alpha, double c, double b = 1.0) {
  return stochlq::SystemModel(scalar(-alpha), scalar(b), {scalar(c)});
}

inline stochlq::CostModel scalar_cost(double G, double Gamma) { return stochlq::CostModel(scalar(G), scalar(Gamma)); }

inline stochlq::InitialState scalar_init(double a) {
  return stochlq::InitialState::deterministic(VectorXd::Constant(1, a));
}

}  // namespace fixture
