#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rorqual/scenario.hpp"
#include "rorqual/vertex.hpp"

namespace rorqual {

struct TraceRecord {
    SimTime time;
    char kind;  // 's' send, 'd' deliver
    PeerId from;
    PeerId to;
    std::string msg_type;
    std::size_t bytes;
};

struct DeliveryRecord {  // bullshark a_deliver output
    std::uint64_t seq;
    Round round;
    PeerId source;
    Digest block_digest;
};

// Per-run event log the simulation and peers write into; RunMetrics is
// computed from it after quiescence.
class MetricsCollector {
  public:
    struct VertexStats {
        SimTime send_time = -1.0;
        bool byzantine_source = false;
        std::map<PeerId, SimTime> admissions;  // correct peers only
        std::optional<SimTime> first_cert;     // pull backend
        std::uint64_t bytes = 0;
    };

    void record_dispersal(VertexId id, SimTime t, bool byz);
    void record_admission(VertexId id, PeerId peer, SimTime t);
    void record_cert(VertexId id, SimTime t);
    void record_bytes(const std::optional<VertexId>& attribution,
                      std::size_t bytes);

    const std::map<VertexId, VertexStats>& vertices() const { return vertices_; }
    std::uint64_t total_bytes() const { return total_bytes_; }
    std::uint64_t setup_bytes() const { return setup_bytes_; }

  private:
    std::map<VertexId, VertexStats> vertices_;
    std::uint64_t total_bytes_ = 0;
    std::uint64_t setup_bytes_ = 0;
};

struct VertexLatency {
    VertexId id;
    SimTime send_time;
    bool byzantine_source;
    std::size_t correct_admissions;
    // admission at the (f+1)-th correct peer minus send time; unset until
    // f+1 correct peers admitted
    std::optional<double> latency_fplus1;
    // admission at the last correct peer (delivery to everyone)
    std::optional<double> latency_all;
    std::optional<double> cert_latency;
};

struct RunMetrics {
    std::vector<VertexLatency> latencies;
    std::map<PeerId, std::vector<double>> round_durations;  // correct peers
    std::map<PeerId, std::vector<SimTime>> dispersal_times;
    std::map<PeerId, std::uint64_t> commit_counts;
    std::uint64_t total_bytes = 0;
    std::uint64_t dispersed_vertices = 0;
    double bytes_per_vertex = 0.0;
    bool truncated = false;
    SimTime quiescence_time = 0.0;
    std::uint64_t events_processed = 0;

    void write_csv(std::ostream& os) const;
};

// least-squares slope of log(y) against log(x)
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace rorqual
