#pragma once

#include "minikind/framework.hpp"

namespace minikind {

// Bounded model checking: unrolls the system step by step, looking for
// counterexamples and clearing base cases for k-induction. Because every
// unresolved property is checked at every depth in increasing order, any
// counterexample it reports has minimal length.
class BmcEngine : public Engine {
 public:
  BmcEngine() : Engine("bmc") {}
  void run(Framework& fw) override;
};

}  // namespace minikind
