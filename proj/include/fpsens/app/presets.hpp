#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "fpsens/app/config.hpp"

namespace fpsens::app {

/// Linear oscillator under band-limited white noise; cases 1-4 differ in the
/// displacement threshold.
inline json example1_preset(int which) {
  static constexpr double thresholds[] = {0.013, 0.016, 0.018, 0.020};
  if (which < 1 || which > 4) throw std::invalid_argument("preset example1: case must be 1..4");
  return {
      {"model", {{"type", "sdof"}, {"omega_n_rad_s", 4.0 * std::numbers::pi}, {"zeta_n", 0.05}}},
      {"excitation",
       {{"type", "white_noise_spectral"},
        {"S_m2_s3", 5.5e-4},
        {"omega_min_rad_s", 0.0},
        {"omega_max_rad_s", 25.0 * std::numbers::pi},
        {"q", 500}}},
      {"grid", {{"dt_s", 0.02}, {"T_s", 20.0}}},
      {"thresholds", {{"c_m", thresholds[which - 1]}, {"symmetric", true}}},
      {"parameters", {"omega_n", "zeta_n"}},
      {"estimator", {{"method", "sdm"}, {"tol", 0.1}, {"n_max", 10000}, {"seed", 0}, {"fd_rel_step", 1e-3}}},
  };
}

/// 20-story shear frame with a viscoelastic damper in every story under a
/// modulated Kanai-Tajimi ground acceleration; cases 1-3 differ in S0.
/// Stiffness and damper coefficients are in N/m and N·s/m.
inline json example2_preset(int which) {
  static constexpr double intensities[] = {0.010, 0.008, 0.007};
  if (which < 1 || which > 3) throw std::invalid_argument("preset example2: case must be 1..3");
  constexpr int stories = 20;
  json dampers = json::array();
  json params = json::array();
  for (int s = 0; s < stories; ++s) dampers.push_back({{"k_ve_N_m", 3.0e6}, {"c_ve_N_s_m", 2.5e6}});
  for (int s = 1; s <= stories; ++s) params.push_back("k_ve_" + std::to_string(s));
  for (int s = 1; s <= stories; ++s) params.push_back("c_ve_" + std::to_string(s));
  return {
      {"model",
       {{"type", "shear_building"},
        {"masses_kg", std::vector<double>(stories, 3.0e3)},
        {"stiffnesses_N_m", std::vector<double>(stories, 3.0e7)},
        {"rayleigh", {{"mode_a", 1}, {"mode_b", 20}, {"zeta", 0.05}}},
        {"dampers", dampers},
        {"brace_cos", 0.8}}},
      {"excitation",
       {{"type", "modulated_correlation"},
        {"S0_m2_s3", intensities[which - 1]},
        {"omega_g_rad_s", 14.0},
        {"zeta_g", 0.6},
        {"t_a_s", 8.0},
        {"t_b_s", 20.0},
        {"t_c_s", 30.0},
        {"lambda_1_s", 0.1572},
        {"eig_clip", 1e-12}}},
      {"grid", {{"dt_s", 0.02}, {"T_s", 30.0}}},
      {"thresholds", {{"c_m", 0.006}, {"symmetric", true}}},
      {"parameters", params},
      {"estimator", {{"method", "sdm"}, {"tol", 0.1}, {"n_max", 10000}, {"seed", 0}, {"fd_rel_step", 1e-3}}},
  };
}

/// Four one-sided planar limit states g_k = c_k - θ a_k·x; θ scales every
/// response amplitude.
inline json planar_toy_preset() {
  return {
      {"model",
       {{"type", "hyperplanes"},
        {"coefficients", {{-2.0, 1.0}, {-1.0, 3.0}, {6.0, 7.0}, {2.0, -1.0}}},
        {"theta", 1.0},
        {"parameter", "theta"}}},
      {"thresholds", {{"c_m", {12.0, 18.0, 36.0, 10.0}}, {"symmetric", false}}},
      {"parameters", {"theta"}},
      {"estimator", {{"method", "sdm"}, {"tol", 0.1}, {"n_max", 10000}, {"seed", 0}, {"fd_rel_step", 1e-3}}},
  };
}

inline json preset(const std::string& name, int which) {
  if (name == "example1") return example1_preset(which);
  if (name == "example2") return example2_preset(which);
  if (name == "planar_toy") {
    if (which != 1) throw std::invalid_argument("preset planar_toy: only case 1 exists");
    return planar_toy_preset();
  }
  throw std::invalid_argument("unknown preset '" + name + "' (expected example1, example2 or planar_toy)");
}

}  // namespace fpsens::app
