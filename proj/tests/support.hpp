#pragma once

#include <map>
#include <string>

#include "starkecho/analysis.hpp"

namespace testing {

// Preset runs are shared between test cases; each costs a full ensemble propagation.
inline const starkecho::TraceSet& preset_run(const std::string& name) {
  static std::map<std::string, starkecho::TraceSet> cache;
  auto it = cache.find(name);
  if (it == cache.end()) {
    const auto seq = starkecho::preset(name);
    it = cache.emplace(name, starkecho::Simulation::from(seq).run(seq, true)).first;
  }
  return it->second;
}

}  // namespace testing
