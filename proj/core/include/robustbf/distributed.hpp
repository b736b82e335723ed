#pragma once

#include <string>
#include <vector>

#include "robustbf/conic.hpp"
#include "robustbf/instance.hpp"
#include "robustbf/maxmin.hpp"

namespace robustbf {

/// Cell-m max-min design with the other cells fixed through their covariances W_n = Phi_n Phi_n^H
/// (entry m of covariances is ignored).
struct LocalUpdate {
  double a = 0.0;
  CMatrix precoder;
  BisectionTrace trace;
};
LocalUpdate local_maxmin_update(const NetworkInstance& inst, int m, const std::vector<CMatrix>& covariances,
                                const BisectionOptions& opts = {});

enum class MessageKind { broadcast_w, error, update, beta_exchange };

const char* to_string(MessageKind k);

/// One simulated inter-BS message. to = -1 is a broadcast.
struct Message {
  MessageKind kind = MessageKind::update;
  int from = 0;
  int to = -1;
  int round = 0;
  CMatrix w;        // broadcast_w
  int user = -1;    // beta_exchange: the copy is of beta^user_{cell, other}
  int cell = -1;
  int other = -1;
  double value = 0.0;
};

/// Totally ordered message log; serialises to JSON lines.
struct EventLog {
  std::vector<Message> messages;

  std::string to_jsonl() const;
  static EventLog from_jsonl(const std::string& text);
};

struct Algorithm2Result {
  PrecoderSet precoders;
  EventLog log;
  std::vector<double> committed_min;  // network min of the certified SINR bound, initial then after each commit
  int rounds = 0;
  int commits = 0;
};

/// Round-robin unilateral updates with veto. A proposal commits when the proposing cell improves
/// its own min bound by more than delta (relative) and no other cell's min bound decreases.
Algorithm2Result run_algorithm2(const NetworkInstance& inst, const BisectionOptions& opts = {}, int max_rounds = 100);

/// Every cell proposes each round; the admissible proposal with the largest network min commits.
Algorithm2Result run_algorithm2_greedy(const NetworkInstance& inst, const BisectionOptions& opts = {},
                                       int max_rounds = 100);

struct DualOptions {
  double mu = 2.0;           // step mu / sqrt(iteration) when diminishing, else constant
  bool diminishing = false;
  // Adds mu * (beta - previous mean)^2 per copy, which turns the iteration into consensus ADMM.
  // Off, with mu = 0.1 and diminishing steps, gives the plain subgradient method.
  bool proximal = true;
  double margin = 0.01;      // power and leakage fraction held back while iterating, spent on certification
  int max_iters = 200;
  double consensus_tol = 1e-3;
  int average_after = 100;   // force the copies to their mean at this iteration; <= 0 disables
  bool record_messages = false;
  SolverOptions solver;
};

/// Consensus multipliers and the two copies of every coupling variable beta^k_{m,n} (k of cell m,
/// interference from BS n), indexed by channel_index(m, n, k); entries with m == n are unused.
struct DualState {
  std::vector<double> lambda;
  std::vector<double> beta_victim;  // copy held by BS m
  std::vector<double> beta_source;  // copy held by BS n
  double mu = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool averaged = false;
};

struct DualCheck {
  bool feasible = false;
  int culprit = -1;  // first cell whose subproblem failed
  PrecoderSet precoders;
  DualState state;
  EventLog log;
};

/// Feasibility of the common target a by dual decomposition over the coupling variables.
DualCheck dual_feasibility_check(const NetworkInstance& inst, double a, const DualOptions& opts = {});

/// Bisection on a with dual_feasibility_check as the oracle.
MaxMinResult distributed_maxmin(const NetworkInstance& inst, const BisectionOptions& opts = {},
                                const DualOptions& dual = {});

}  // namespace robustbf
