#pragma once

#include "minikind/framework.hpp"

namespace minikind {

// Property-directed reachability for a single property. The checker spawns
// one of these per property; each owns a session and runs IC3 directly over
// the theory, with model-derived concrete predecessor states and unsat-core
// driven clause generalization.
//
// A state here is the pair (init flag, values of the pre-referenced
// variables) feeding a step: queries unroll exactly one step, frames and
// cubes talk about the step's prestate, and a cube's primed version reads the
// step's computed values.
class PdrEngine : public Engine {
 public:
  explicit PdrEngine(std::string property) : Engine("pdr"), property_(std::move(property)) {}
  void run(Framework& fw) override;

 private:
  std::string property_;
};

}  // namespace minikind
