#pragma once

#include "minikind/framework.hpp"

namespace minikind {

// The inductive step of k-induction over windows of increasing length,
// strengthened by whatever invariants the other engines prove. A success is
// only InductiveOnly: the director upgrades it to Valid once BMC clears the
// matching base depth.
class KindEngine : public Engine {
 public:
  KindEngine() : Engine("kind") {}
  void run(Framework& fw) override;
};

}  // namespace minikind
