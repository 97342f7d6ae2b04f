#include "minikind/engine_bmc.hpp"

#include <algorithm>

#include "minikind/engine_support.hpp"

namespace minikind {

void BmcEngine::run(Framework& fw) {
  const TransitionSystem& ts = fw.ts();
  SessionPtr session = fw.make_session(*this, "");

  std::vector<std::string> open;
  for (const auto& [name, term] : ts.properties) open.push_back(name);

  for (int k = 0; k <= fw.config().bmc_max_depth && !open.empty(); k++) {
    assert_step(*session, ts, k);
    std::vector<std::string> names = trace_query_names(*session, ts, k);

    for (auto it = open.begin(); it != open.end();) {
      const std::string prop = *it;
      fw.checkpoint(*this);
      if (fw.resolved(prop)) {
        it = open.erase(it);
        continue;
      }
      CheckResult r = session->check({{"bad", mk_not(*ts.property(prop)), k}}, names);
      fw.note_checks(*this, 1);
      if (r.sat()) {
        Message msg;
        msg.kind = Message::Kind::Falsified;
        msg.engine = name();
        msg.property = prop;
        msg.trace = trace_from_model(ts, r.model, k);
        fw.broadcast(*this, msg);
        it = open.erase(it);
        continue;
      }
      if (r.unknown()) {
        // No base-case guarantee is possible past this point; bow out rather
        // than emit BaseStep claims the solver did not back.
        fw.broadcast(*this, {Message::Kind::Done, name()});
        return;
      }
      ++it;
    }
    // Reaching here means every surviving property came back Unsat at depth
    // k, so the base case is clean through k.
    Message base;
    base.kind = Message::Kind::BaseStep;
    base.engine = name();
    base.k = k;
    fw.broadcast(*this, base);
  }

  fw.broadcast(*this, {Message::Kind::Done, name()});
}

}  // namespace minikind
