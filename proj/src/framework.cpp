#include "minikind/framework.hpp"

#include <cctype>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <mutex>
#include <random>
#include <set>
#include <thread>

namespace minikind {

namespace {
using Clock = std::chrono::steady_clock;

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}
}  // namespace

struct Framework::Impl {
  const TransitionSystem& ts;
  RunConfig cfg;
  std::vector<std::unique_ptr<Engine>> engines;
  std::map<const Engine*, int> index_of;

  // Everything below is guarded by `mu`. Engines run one at a time (token
  // `current`), so contention is only at handoff points.
  std::mutex mu;
  std::condition_variable cv;
  std::mt19937_64 rng;
  std::uint64_t vnow = 0;
  std::vector<std::uint64_t> wake_at;
  std::vector<bool> finished;
  int current = -1;
  bool cancel_all = false;
  bool deadline_hit = false;
  Clock::time_point deadline;
  Clock::time_point t0;

  std::vector<std::deque<Message>> inboxes;
  std::set<TermRef, TermLess> seen_invariants;
  std::map<std::string, bool> engine_done;

  struct PropState {
    PropertyResult result;
    bool resolved = false;
    bool inductive_pending = false;
    int inductive_k = 0;
    std::vector<TermRef> inductive_invs;
    std::string inductive_engine;
    std::optional<Message> held_cex;  // --minimal-cex: PDR trace awaiting confirmation
  };
  std::vector<std::string> prop_order;
  std::map<std::string, PropState> props;
  int base_depth = -1;
  size_t resolved_count = 0;

  RunStats stats;

  Impl(const TransitionSystem& ts_, RunConfig cfg_) : ts(ts_), cfg(std::move(cfg_)) {}

  // --- scheduler ---

  std::uint64_t jitter() {
    return 1 + rng() % static_cast<std::uint64_t>(std::max(cfg.sched_spread, 1));
  }

  // Pick the next engine to run; -1 when none remain.
  int next_ready() const {
    int best = -1;
    for (size_t i = 0; i < engines.size(); i++) {
      if (finished[i]) continue;
      if (best < 0 || wake_at[i] < wake_at[best]) best = static_cast<int>(i);
    }
    return best;
  }

  void hand_over_locked() {
    current = next_ready();
    if (current >= 0) vnow = wake_at[current];
    cv.notify_all();
  }

  void checkpoint(int i) {
    std::unique_lock<std::mutex> l(mu);
    if (cancel_all) throw Cancelled{};
    if (Clock::now() >= deadline) {
      deadline_hit = true;
      cancel_all = true;
      cv.notify_all();
      throw Cancelled{};
    }
    if (resolved_count == prop_order.size()) {
      cancel_all = true;
      cv.notify_all();
      throw Cancelled{};
    }
    wake_at[i] = vnow + jitter();
    hand_over_locked();
    cv.wait(l, [&] { return current == i || cancel_all; });
    if (cancel_all) throw Cancelled{};
  }

  void finish(int i) {
    std::unique_lock<std::mutex> l(mu);
    finished[i] = true;
    if (!engine_done[engines[i]->name()]) {
      Message done;
      done.kind = Message::Kind::Done;
      done.engine = engines[i]->name();
      director(done, i);
    }
    if (current == i) hand_over_locked();
    cv.notify_all();
  }

  void thread_main(int i) {
    bool go;
    {
      std::unique_lock<std::mutex> l(mu);
      cv.wait(l, [&] { return current == i || cancel_all; });
      go = !cancel_all;
    }
    try {
      if (go) engines[i]->run(*owner);
    } catch (const Cancelled&) {
      // normal shutdown path
    } catch (const std::exception& e) {
      std::unique_lock<std::mutex> l(mu);
      stats.engine_errors.push_back(engines[i]->name() + ": " + e.what());
    }
    finish(i);
  }

  Framework* owner = nullptr;

  // --- director (caller holds mu) ---

  long elapsed_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
  }

  void resolve_valid(const std::string& p, const std::string& engine, int k,
                     std::vector<TermRef> invs) {
    PropState& ps = props.at(p);
    if (ps.resolved) return;
    ps.resolved = true;
    ps.inductive_pending = false;
    ps.result.verdict = PropertyResult::Verdict::Valid;
    ps.result.engine = engine;
    ps.result.k = k;
    ps.result.invariants = std::move(invs);
    ps.result.time_ms = elapsed_ms();
    resolved_count++;
  }

  void resolve_falsified(const std::string& p, const Message& msg, const std::string& note) {
    PropState& ps = props.at(p);
    if (ps.resolved) return;
    ps.resolved = true;
    ps.inductive_pending = false;
    ps.held_cex.reset();
    ps.result.verdict = PropertyResult::Verdict::Falsified;
    ps.result.engine = msg.engine;
    ps.result.trace = msg.trace;
    ps.result.cex_note = note;
    ps.result.time_ms = elapsed_ms();
    resolved_count++;
  }

  void check_induction_gates() {
    for (const auto& name : prop_order) {
      PropState& ps = props.at(name);
      if (!ps.resolved && ps.inductive_pending && base_depth >= ps.inductive_k - 1)
        resolve_valid(name, ps.inductive_engine, ps.inductive_k, ps.inductive_invs);
    }
  }

  void release_held_cexs(const std::string& note) {
    for (const auto& name : prop_order) {
      PropState& ps = props.at(name);
      if (!ps.resolved && ps.held_cex) resolve_falsified(name, *ps.held_cex, note);
    }
  }

  bool bmc_alive() const {
    if (!cfg.enable_bmc) return false;
    auto it = engine_done.find("bmc");
    return it == engine_done.end() || !it->second;
  }

  PropState& prop_state(const Message& msg) {
    auto it = props.find(msg.property);
    if (it == props.end())
      throw ProtocolError("engine " + msg.engine + " sent a message for unknown property '" +
                          msg.property + "'");
    return it->second;
  }

  // Returns true when the message should be forwarded to the other engines.
  bool director(const Message& msg, int sender) {
    (void)sender;
    stats.messages++;
    switch (msg.kind) {
      case Message::Kind::Invariants:
        return true;  // dedup happened in broadcast()
      case Message::Kind::BaseStep: {
        if (msg.k > base_depth) base_depth = msg.k;
        check_induction_gates();
        // a held counterexample of length n is minimal once depth n-1 is clean
        for (const auto& name : prop_order) {
          PropState& ps = props.at(name);
          if (!ps.resolved && ps.held_cex &&
              base_depth >= static_cast<int>(ps.held_cex->trace.length()) - 1)
            resolve_falsified(name, *ps.held_cex, "");
        }
        return true;
      }
      case Message::Kind::Valid: {
        PropState& ps = prop_state(msg);
        if (ps.resolved) return false;  // first writer wins
        resolve_valid(msg.property, msg.engine, msg.k, msg.invariants);
        return true;
      }
      case Message::Kind::Falsified: {
        PropState& ps = prop_state(msg);
        if (ps.resolved) return false;
        std::string complaint = replay_trace(ts, msg.trace, msg.property);
        if (!complaint.empty())
          throw ProtocolError("engine " + msg.engine + " sent a bogus trace for '" +
                              msg.property + "': " + complaint);
        if (cfg.minimal_cex && msg.engine != "bmc") {
          if (bmc_alive()) {
            // Hold until BMC either confirms minimality or finds a shorter one.
            if (!ps.held_cex || msg.trace.length() < ps.held_cex->trace.length())
              ps.held_cex = msg;
            return false;
          }
          resolve_falsified(msg.property, msg,
                            "counterexample length not confirmed minimal: no depth search available");
          return true;
        }
        resolve_falsified(msg.property, msg, "");
        return true;
      }
      case Message::Kind::InductiveOnly: {
        PropState& ps = prop_state(msg);
        if (ps.resolved) return false;
        if (base_depth >= msg.k - 1) {
          resolve_valid(msg.property, msg.engine, msg.k, msg.invariants);
        } else if (!ps.inductive_pending) {
          ps.inductive_pending = true;
          ps.inductive_k = msg.k;
          ps.inductive_invs = msg.invariants;
          ps.inductive_engine = msg.engine;
        }
        return true;
      }
      case Message::Kind::Done: {
        engine_done[msg.engine] = true;
        if (msg.engine == "bmc" && cfg.minimal_cex)
          release_held_cexs("counterexample length not confirmed minimal: depth search ended first");
        return true;
      }
    }
    return false;
  }

  void deliver(const Message& msg, int sender) {
    for (size_t i = 0; i < inboxes.size(); i++)
      if (static_cast<int>(i) != sender && !finished[i]) inboxes[i].push_back(msg);
  }
};

Framework::Framework(const TransitionSystem& ts, RunConfig cfg)
    : impl_(std::make_unique<Impl>(ts, std::move(cfg))) {
  impl_->owner = this;
}

Framework::~Framework() = default;

void Framework::add_engine(std::unique_ptr<Engine> engine) {
  impl_->index_of[engine.get()] = static_cast<int>(impl_->engines.size());
  impl_->engines.push_back(std::move(engine));
}

const TransitionSystem& Framework::ts() const { return impl_->ts; }
const RunConfig& Framework::config() const { return impl_->cfg; }

void Framework::checkpoint(Engine& who) { impl_->checkpoint(impl_->index_of.at(&who)); }

void Framework::broadcast(Engine& who, Message msg) {
  Impl& im = *impl_;
  int sender = im.index_of.at(&who);
  std::unique_lock<std::mutex> l(im.mu);
  if (msg.kind == Message::Kind::Invariants) {
    // Deduplicate by structural equality across the whole run.
    std::vector<TermRef> fresh;
    for (const auto& t : msg.invariants)
      if (im.seen_invariants.insert(t).second) fresh.push_back(t);
    if (fresh.empty()) return;
    im.stats.invariants_broadcast += static_cast<long>(fresh.size());
    msg.invariants = std::move(fresh);
  }
  if (im.director(msg, sender)) im.deliver(msg, sender);
  if (im.resolved_count == im.prop_order.size()) {
    im.cancel_all = true;
    im.cv.notify_all();
  }
}

std::vector<Message> Framework::take_inbox(Engine& who) {
  Impl& im = *impl_;
  int i = im.index_of.at(&who);
  std::unique_lock<std::mutex> l(im.mu);
  std::vector<Message> out(im.inboxes[i].begin(), im.inboxes[i].end());
  im.inboxes[i].clear();
  return out;
}

bool Framework::resolved(const std::string& property) const {
  Impl& im = *impl_;
  std::unique_lock<std::mutex> l(im.mu);
  auto it = im.props.find(property);
  return it != im.props.end() && it->second.resolved;
}

bool Framework::all_resolved() const {
  Impl& im = *impl_;
  std::unique_lock<std::mutex> l(im.mu);
  return im.resolved_count == im.prop_order.size();
}

SessionPtr Framework::make_session(Engine& who, const std::string& tag) {
  Impl& im = *impl_;
  std::string transcript;
  if (!im.cfg.dump_smt_dir.empty()) {
    std::filesystem::create_directories(im.cfg.dump_smt_dir);
    transcript = im.cfg.dump_smt_dir + "/" + sanitize(who.name()) +
                 (tag.empty() ? "" : "-" + sanitize(tag)) + ".smt2";
  }
  return std::make_unique<Session>(im.cfg.solver, im.ts, transcript);
}

void Framework::note_checks(Engine& who, long nchecks) {
  Impl& im = *impl_;
  std::unique_lock<std::mutex> l(im.mu);
  im.stats.check_sat_calls += nchecks;
  im.stats.checks_per_engine[who.name()] += nchecks;
}

RunOutcome Framework::run() {
  Impl& im = *impl_;
  if (im.engines.empty()) throw ConfigError("no engines enabled");
  if (im.ts.properties.empty()) throw ConfigError("the model declares no properties");

  im.rng.seed(im.cfg.seed);
  im.vnow = 0;
  im.wake_at.assign(im.engines.size(), 0);
  im.finished.assign(im.engines.size(), false);
  im.inboxes.assign(im.engines.size(), {});
  for (size_t i = 0; i < im.engines.size(); i++) im.wake_at[i] = im.jitter();
  for (const auto& [name, term] : im.ts.properties) {
    im.prop_order.push_back(name);
    im.props[name].result.name = name;
  }
  im.t0 = Clock::now();
  im.deadline = im.t0 + std::chrono::milliseconds(im.cfg.timeout_ms);

  std::vector<std::thread> threads;
  {
    std::unique_lock<std::mutex> l(im.mu);
    im.current = im.next_ready();
  }
  for (size_t i = 0; i < im.engines.size(); i++)
    threads.emplace_back([&im, i] { im.thread_main(static_cast<int>(i)); });
  for (auto& t : threads) t.join();

  // Wrap up: anything still open becomes Unknown (or a released held trace).
  RunOutcome out;
  for (const auto& name : im.prop_order) {
    Impl::PropState& ps = im.props.at(name);
    if (!ps.resolved && ps.held_cex)
      im.resolve_falsified(name, *ps.held_cex,
                           "counterexample length not confirmed minimal: run ended first");
    if (!ps.resolved) {
      ps.result.verdict = PropertyResult::Verdict::Unknown;
      ps.result.time_ms = im.elapsed_ms();
      if (im.deadline_hit)
        ps.result.unknown_reason = "timeout";
      else if (ps.inductive_pending && !im.cfg.enable_bmc)
        ps.result.unknown_reason = "no-base-engine";
      else
        ps.result.unknown_reason = "exhausted";
    }
    out.results.push_back(ps.result);
  }
  out.stats = im.stats;
  return out;
}

}  // namespace minikind
