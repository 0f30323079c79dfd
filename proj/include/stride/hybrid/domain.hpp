#pragma once

#include <vector>

#include "stride/common.hpp"
#include "stride/rbd/model.hpp"

namespace stride::hybrid {

/// Active contacts implied by a domain label.
inline rbd::ContactSet contact_set(Domain d) {
  switch (d) {
    case Domain::SspLeft: return {rbd::Foot::Left};
    case Domain::SspRight: return {rbd::Foot::Right};
    case Domain::Dsp: return {rbd::Foot::Left, rbd::Foot::Right};
    case Domain::Flight: return {};
  }
  return {};
}

enum class GuardId {
  SwingTouchdown,   // swing/landing foot height falls through zero
  StanceForceZero,  // stance normal force falls through zero
};

enum class ResetId {
  Identity,       // take-off
  ImpactTouching  // plastic impact at the touching foot
};

struct Transition {
  Domain from;
  Domain to;
  GuardId guard;
  ResetId reset;
};

/// The registered transition graph: running alternates SSP -> FLT (take-off,
/// identity reset) and FLT -> SSP (impact at landing foot); standing adds
/// SSP <-> DSP touchdown/unloading edges.
inline const std::vector<Transition>& transitions() {
  static const std::vector<Transition> table = {
      {Domain::SspLeft, Domain::Flight, GuardId::StanceForceZero, ResetId::Identity},
      {Domain::SspRight, Domain::Flight, GuardId::StanceForceZero, ResetId::Identity},
      {Domain::Flight, Domain::SspLeft, GuardId::SwingTouchdown, ResetId::ImpactTouching},
      {Domain::Flight, Domain::SspRight, GuardId::SwingTouchdown, ResetId::ImpactTouching},
      {Domain::SspLeft, Domain::Dsp, GuardId::SwingTouchdown, ResetId::ImpactTouching},
      {Domain::SspRight, Domain::Dsp, GuardId::SwingTouchdown, ResetId::ImpactTouching},
      {Domain::Dsp, Domain::SspLeft, GuardId::StanceForceZero, ResetId::Identity},
      {Domain::Dsp, Domain::SspRight, GuardId::StanceForceZero, ResetId::Identity},
  };
  return table;
}

inline bool transition_registered(Domain from, Domain to) {
  for (const Transition& t : transitions())
    if (t.from == from && t.to == to) return true;
  return false;
}

}  // namespace stride::hybrid
