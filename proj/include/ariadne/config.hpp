#pragma once

#include <string>

#include "ariadne/explore_env.hpp"
#include "ariadne/nets.hpp"
#include "ariadne/sac.hpp"

namespace ariadne {

struct RunConfig {
  std::string scale = "desk";
  EnvConfig env;
  nn::NetConfig net;
  SacConfig sac;
  int eval_budget = 1024;

  void sync_lattice_fields();  // map-generator corridor grid := lattice grid
};

// Full-scale preset: 640x480 maps, d_s=80, 900-node lattice, k=20, d=128,
// 8 heads, batch 256, lr 1e-5 (roughly a day of training on a GPU-class box).
RunConfig paper_config();

// Desk preset: halves the map dimensions (320x240, d_s=40, 225-node lattice,
// k=10) and scales the network and optimizer so training plus evaluation fits
// in CPU hours: d=64, 4 heads, batch 64, lr 3e-4.
RunConfig desk_config();

RunConfig config_for_scale(const std::string& scale);

// JSON round trip; load applies the file as an overlay on `base`.
std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json_file(const std::string& path, RunConfig base);
RunConfig config_from_json(const std::string& json_text, RunConfig base);

}  // namespace ariadne
