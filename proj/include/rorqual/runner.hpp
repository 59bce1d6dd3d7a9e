#pragma once

#include <memory>
#include <ostream>

#include "rorqual/metrics.hpp"
#include "rorqual/simnet.hpp"

namespace rorqual {

// Cross-peer safety checks evaluated after quiescence over correct peers.
// Crashed peers are excluded from liveness-flavored checks (dag equality)
// but still participate in the safety ones (consistency, delivery prefixes).
struct InvariantReport {
    std::uint64_t containment_violations = 0;
    bool dag_equal = true;        // all live correct peers hold the same DAG
    bool dag_equal_checked = false;
    bool stores_consistent = true;  // one digest per (signing key, id)
    bool deliveries_prefix = true;  // total orders are prefix-compatible
    bool bytes_reconciled = true;
    std::vector<std::string> alarms;  // from correct peers; must stay empty

    bool ok() const {
        return containment_violations == 0 && dag_equal &&
               stores_consistent && deliveries_prefix && bytes_reconciled &&
               alarms.empty();
    }
};

struct RunResult {
    Simulation::RunStats stats;
    RunMetrics metrics;
    InvariantReport invariants;
};

// Builds the PKI and the peer set for a scenario, owns the simulation, and
// computes metrics + invariants after the run. Kept alive so callers can
// inspect per-peer state (DAGs, deliveries) afterwards.
class Runner {
  public:
    explicit Runner(ScenarioConfig cfg, bool enable_trace = false);

    Simulation& sim() { return *sim_; }
    const ScenarioConfig& config() const { return sim_->config(); }

    // a peer that is neither Byzantine nor crashed by the end of the run
    bool live_correct(PeerId p) const;
    bool correct(PeerId p) const { return !sim_->is_byzantine(p); }

    RunResult run(bool check_dag_equality = true);

  private:
    RunMetrics compute_metrics(const Simulation::RunStats& stats) const;
    InvariantReport check_invariants(bool check_dag_equality) const;

    std::unique_ptr<Simulation> sim_;
};

// artifact writers
void write_trace(std::ostream& os, const std::vector<TraceRecord>& trace);
void write_deliveries(std::ostream& os,
                      const std::vector<DeliveryRecord>& deliveries);

}  // namespace rorqual
