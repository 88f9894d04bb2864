#pragma once

#include <string>
#include <string_view>

#include "hwnet/control.hpp"
#include "hwnet/min_cost_flow.hpp"
#include "hwnet/statics.hpp"

namespace hwnet {

struct Allocation {
  IntVec z;  // per edge
};

IntVec queue_lengths(const Topology& topo, const IntVec& x, const IntVec& z);
IntVec idle_servers(const Topology& topo, const IntVec& servers, const IntVec& z);
// Balance, nonnegativity and per-edge work conservation.
bool is_admissible(const Topology& topo, const IntVec& x, const IntVec& servers, const IntVec& z);
// min(total queue, total idle) in customer units.
long theta_count(const Topology& topo, const IntVec& x, const IntVec& servers, const IntVec& z);

// Keeps flow solver buffers alive between calls.
class SwcSolver {
 public:
  explicit SwcSolver(const Topology& topo) : topo_(&topo) {}
  // Maximizes total service; among maximizers minimizes the L1 distance to
  // prev (a greedy start that favours less flexible classes when absent).
  Allocation solve(const IntVec& x, const IntVec& servers, const Allocation* prev);

 private:
  const Topology* topo_;
  MinCostFlow flow_;
};

Allocation max_service_allocation(const Topology& topo, const IntVec& x, const IntVec& servers,
                                  const Allocation* prev = nullptr);

// Diffusion-scale conversions relative to the centering of `d`.
Vec scale_state(const ScaleData& d, const IntVec& x);
Vec scale_allocation(const ScaleData& d, const IntVec& z);
IntVec unscale_state(const ScaleData& d, const Vec& x_hat);
IntVec unscale_allocation(const ScaleData& d, const Vec& z_hat);

double theta_hat(const Topology& topo, const ScaleData& d, const Vec& x_hat, const Vec& z_hat);
double theta_star(const Topology& topo, const ScaleData& d, const Vec& x_hat);

enum class PolicyKind { Swc, StaticPriorityN, Lqfslb, ConstantControl };
enum class TieBreak { MinDeviation, Fresh };

struct PolicySpec {
  PolicyKind kind = PolicyKind::Swc;
  TieBreak tie_break = TieBreak::MinDeviation;
  ControlPoint control;  // ConstantControl only
};

// swc | swc-fresh | priority-n | lqfs-lb | constant:<uc>/<us>
PolicySpec parse_policy(std::string_view text, const Topology& topo);
std::string describe(const PolicySpec& spec);

struct Event {
  enum class Kind { Arrival, Departure };
  Kind kind = Kind::Arrival;
  int cls = 0;
  int edge = -1;  // departures only
};

// State-based evaluation; prev may be null.
Allocation apply_policy(const PolicySpec& spec, const StaticData& s, const ScaleData& d,
                        const IntVec& x, const Allocation* prev);

// Event-driven evaluation used by the simulator.
class PolicyRunner {
 public:
  PolicyRunner(const PolicySpec& spec, const StaticData& s, const ScaleData& d);

  void initial(const IntVec& x, IntVec& z);
  // x is the post-event state and z the allocation before the event; z is updated in place.
  void after_event(const IntVec& x, IntVec& z, const Event& ev);

 private:
  PolicySpec spec_;
  const StaticData* s_;
  const ScaleData* d_;
  SwcSolver swc_;
  Allocation scratch_;
};

}  // namespace hwnet
