#include "stochlq/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "stochlq/errors.hpp"
#include "stochlq/model.hpp"

namespace stochlq {

namespace {

VectorXd interpolate(const SampledControl& s, double t) {
  const auto& ts = s.times;
  if (t < 0.0 || t > ts.back()) return VectorXd::Zero(s.values.front().size());
  if (ts.size() == 1) return s.values.front();
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  if (it == ts.end()) return s.values.back();
  const auto k = static_cast<std::size_t>(it - ts.begin()) - 1;
  const double w = (t - ts[k]) / (ts[k + 1] - ts[k]);
  return (1.0 - w) * s.values[k] + w * s.values[k + 1];
}

}  // namespace

ControlSignal ControlSignal::zero(Eigen::Index m) {
  if (m < 1) throw DimensionError("control dimension must be >= 1");
  return ControlSignal(m);
}

ControlSignal ControlSignal::feedback(MatrixXd h, MatrixXd A_cl, VectorXd y0) {
  const auto n = A_cl.rows();
  if (A_cl.cols() != n || h.rows() != n || y0.size() != n || h.cols() < 1) {
    throw DimensionError("feedback control: h must be n x m, A_cl n x n, y0 length n");
  }
  ControlSignal u(h.cols());
  u.terms_.emplace_back(FeedbackControl{std::move(h), std::move(A_cl), std::move(y0)});
  return u;
}

ControlSignal ControlSignal::sampled(std::vector<double> times, std::vector<VectorXd> values) {
  if (times.empty() || times.size() != values.size()) {
    throw DimensionError("sampled control: times and values must be non-empty and of equal length");
  }
  if (times.front() != 0.0) throw InvariantError("sampled control: grid must start at t = 0");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k])) throw InvariantError("sampled control: non-finite time");
    if (k > 0 && !(times[k] > times[k - 1])) {
      throw InvariantError("sampled control: grid must be strictly increasing");
    }
    if (values[k].size() != values.front().size() || values[k].size() < 1) {
      throw DimensionError("sampled control: all values must have the same dimension m >= 1");
    }
    if (!values[k].allFinite()) throw InvariantError("sampled control: non-finite value");
  }
  ControlSignal u(values.front().size());
  u.terms_.emplace_back(SampledControl{std::move(times), std::move(values)});
  return u;
}

VectorXd ControlSignal::value(double t) const {
  VectorXd u = VectorXd::Zero(m_);
  for (const auto& term : terms_) {
    if (const auto* fb = std::get_if<FeedbackControl>(&term)) {
      if (t >= 0.0) u += fb->h.transpose() * ((fb->A_cl * t).exp() * fb->y0);
    } else {
      u += interpolate(std::get<SampledControl>(term), t);
    }
  }
  return u;
}

VectorXd ControlSignal::sampled_value(double t) const {
  VectorXd u = VectorXd::Zero(m_);
  for (const auto& term : terms_) {
    if (const auto* s = std::get_if<SampledControl>(&term)) u += interpolate(*s, t);
  }
  return u;
}

std::vector<VectorXd> ControlSignal::sample_grid(double dt, std::size_t steps) const {
  std::vector<VectorXd> out(steps + 1, VectorXd::Zero(m_));
  for (const auto& term : terms_) {
    if (const auto* fb = std::get_if<FeedbackControl>(&term)) {
      const MatrixXd step = (fb->A_cl * dt).exp();
      VectorXd y = fb->y0;
      for (std::size_t k = 0; k <= steps; ++k) {
        out[k] += fb->h.transpose() * y;
        y = step * y;
      }
    } else {
      const auto& s = std::get<SampledControl>(term);
      for (std::size_t k = 0; k <= steps; ++k) {
        out[k] += interpolate(s, static_cast<double>(k) * dt);
      }
    }
  }
  return out;
}

std::vector<double> ControlSignal::breakpoints() const {
  std::vector<double> pts;
  for (const auto& term : terms_) {
    if (const auto* s = std::get_if<SampledControl>(&term)) {
      pts.insert(pts.end(), s->times.begin() + 1, s->times.end());
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

ControlSignal ControlSignal::operator+(const ControlSignal& other) const {
  if (other.m_ != m_) throw DimensionError("cannot add controls of different dimension");
  ControlSignal sum = *this;
  sum.terms_.insert(sum.terms_.end(), other.terms_.begin(), other.terms_.end());
  return sum;
}

ControlSignal ControlSignal::scaled(double factor) const {
  ControlSignal out = *this;
  for (auto& term : out.terms_) {
    if (auto* fb = std::get_if<FeedbackControl>(&term)) {
      fb->h *= factor;
    } else {
      for (auto& v : std::get<SampledControl>(term).values) v *= factor;
    }
  }
  return out;
}

ControlSignal sampled_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("times") || !doc.contains("values")) {
    throw ParseError("control file must be an object with 'times' and 'values'");
  }
  const auto& jt = doc.at("times");
  const auto& jv = doc.at("values");
  if (!jt.is_array() || !jv.is_array()) throw ParseError("control file: times/values must be arrays");
  std::vector<double> times;
  for (const auto& t : jt) {
    if (!t.is_number()) throw ParseError("control file: non-numeric time");
    times.push_back(t.get<double>());
  }
  std::vector<VectorXd> values;
  for (const auto& v : jv) values.push_back(vector_from_json(v, "values"));
  return ControlSignal::sampled(std::move(times), std::move(values));
}

nlohmann::json sampled_to_json(const SampledControl& s) {
  nlohmann::json values = nlohmann::json::array();
  for (const auto& v : s.values) values.push_back(vector_to_json(v));
  return {{"times", s.times}, {"values", std::move(values)}};
}

}  // namespace stochlq
