#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bregman/errors.hpp"
#include "bregman/experiment.hpp"

namespace bregman {

/// Instance parameters stored next to a reference solution.
struct ReferenceProvenance {
  std::uint64_t seed = 0;
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  double lam = 0.0;
};

inline nlohmann::json reference_to_json(const ReferenceSolution& ref, const ReferenceProvenance& prov) {
  const auto as_array = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"x_star", as_array(ref.x_star)},
          {"z_star", as_array(ref.z_star)},
          {"psi_star", ref.psi_star},
          {"kkt_residual", ref.kkt_residual},
          {"seed", prov.seed},
          {"m", prov.m},
          {"n", prov.n},
          {"lam", prov.lam}};
}

inline ReferenceSolution reference_from_json(const nlohmann::json& j, ReferenceProvenance* prov = nullptr) {
  const auto as_vector = [](const nlohmann::json& a) {
    const auto v = a.get<std::vector<double>>();
    return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  ReferenceSolution ref;
  try {
    ref.x_star = as_vector(j.at("x_star"));
    ref.z_star = as_vector(j.at("z_star"));
    ref.psi_star = j.at("psi_star").get<double>();
    ref.kkt_residual = j.at("kkt_residual").get<double>();
    if (prov) {
      prov->seed = j.at("seed").get<std::uint64_t>();
      prov->m = j.at("m").get<Eigen::Index>();
      prov->n = j.at("n").get<Eigen::Index>();
      prov->lam = j.at("lam").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("reference file: ") + e.what());
  }
  return ref;
}

inline void save_reference(const std::string& path, const ReferenceSolution& ref,
                           const ReferenceProvenance& prov) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open output file '" + path + "'");
  os << reference_to_json(ref, prov).dump(2) << '\n';
  if (!os.flush()) throw ConfigError("failed writing '" + path + "'");
}

inline ReferenceSolution load_reference(const std::string& path, ReferenceProvenance* prov = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open reference file '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("reference file '" + path + "': " + e.what());
  }
  return reference_from_json(j, prov);
}

}  // namespace bregman
