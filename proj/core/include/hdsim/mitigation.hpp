#pragma once

#include <span>

#include "hdsim/fleet.hpp"

namespace hdsim {

/// How the fleet blunts compromises that got past the signal game.
enum class Mitigation {
  HoneyAbsorb,     // honey drones soak attacks; nothing further to do
  Ids,             // each compromise cancelled with probability detect_prob
  ContainerDrone,  // compromises become zombies: alive, unproductive
  None,
};

[[nodiscard]] const char* to_string(Mitigation m);

/// Adjusts an outcome resolved against raw vulnerability.
[[nodiscard]] AttackOutcome mitigate(Mitigation mitigation, double detect_prob, AttackOutcome outcome,
                                     std::span<const DroneRecord> fleet, Rng& rng);

}  // namespace hdsim
