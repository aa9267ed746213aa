#pragma once

// JSON views of PoNQ files and metric reports (requires nlohmann/json).

#include <cmath>

#include <nlohmann/json.hpp>

#include "ponq/error.hpp"
#include "ponq/metrics.hpp"
#include "ponq/ponq_io.hpp"

namespace ponq {

namespace detail {

inline nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

// Non-finite values have no JSON literal; they are written as null.
inline nlohmann::json number_json(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace detail

inline nlohmann::json to_json(const PoNQFile& file) {
  nlohmann::json j;
  j["version"] = kPoNQVersion;
  j["normalized"] = file.normalized();
  j["open_surface"] = file.open_surface();
  auto& arr = j["elements"] = nlohmann::json::array();
  for (const auto& e : file.elements) {
    const auto& A = e.q.A;
    arr.push_back({{"p", detail::vec_json(e.p)},
                   {"n", detail::vec_json(e.n)},
                   {"v_star", detail::vec_json(e.v_star)},
                   {"A", {A(0, 0), A(0, 1), A(0, 2), A(1, 1), A(1, 2), A(2, 2)}},
                   {"b", detail::vec_json(e.q.b)},
                   {"c", e.q.c},
                   {"sample_count", e.sample_count}});
  }
  return j;
}

inline nlohmann::json to_json(const MetricsReport& r) {
  return {{"cd", detail::number_json(r.cd)},
          {"f1", detail::number_json(r.f1)},
          {"nc", detail::number_json(r.nc)},
          {"ecd", detail::number_json(r.ecd)},
          {"ef1", detail::number_json(r.ef1)},
          {"watertight", r.watertight},
          {"self_intersection_free", r.self_intersection_free},
          {"vertex_count", r.vertex_count},
          {"face_count", r.face_count}};
}

inline nlohmann::json error_json(const Error& e) {
  return {{"error", std::string(to_string(e.code()))}, {"code", static_cast<int>(e.code())}, {"message", e.what()}};
}

}  // namespace ponq
