#pragma once

#include <map>
#include <set>

#include "rorqual/bullshark.hpp"
#include "rorqual/dag.hpp"
#include "rorqual/simnet.hpp"

namespace rorqual {

// Pull-broadcast baseline: sign-and-send vertices, voted availability
// certificates, cert-carrying strong edges, and cert-based pull recovery.
// Rounds advance strictly sequentially once n-f round-r sources are
// certified.
class PullPeer : public Peer {
  public:
    PullPeer(Simulation& sim, PeerId id, KeyPair nw_key,
             std::map<PeerId, PublicKey> nw_pub);

    void start() override;
    void on_message(const Envelope& env, PeerId from) override;

    const DagStore* dag() const override { return &dag_; }
    std::vector<StoredVertex> stored_vertices() const override;
    const std::vector<DeliveryRecord>* deliveries() const override {
        return &ordering_.deliveries();
    }
    std::uint64_t committed_leaders() const override {
        return ordering_.committed_leaders();
    }
    Round last_round() const override { return last_round_; }
    std::vector<std::string> alarms() const override { return alarms_; }

  private:
    struct RecordEntry {
        Vertex vertex;
        Signature sig;
    };

    void on_vertex(const PullVertexMsg& m, PeerId from);
    void on_vote(const PullVoteMsg& m);
    void on_pull_request(const PullRequestMsg& m, PeerId from);
    void on_pull_relay(const PullRelayMsg& m);

    bool store_record(const Vertex& v, const Signature& sig);
    void absorb_cert(const EdgeRef& e, const QuorumCert& cert);
    void maybe_cert(VertexId vid);
    void try_admit();
    bool admissible(const RecordEntry& rec, std::vector<VertexId>& missing);
    void admit(const Vertex& v);
    void start_pull(VertexId missing);
    void pull_tick(VertexId missing);
    void try_form();
    void disperse(Round target);

    void alarm(std::string what) { alarms_.push_back(std::move(what)); }

    Simulation& sim_;
    PeerId id_;
    std::uint16_t n_;
    std::uint16_t f_;
    const ScenarioConfig& cfg_;

    KeyPair nw_key_;
    std::map<PeerId, PublicKey> nw_pub_;

    DagStore dag_;
    Ordering ordering_;

    std::map<VertexId, RecordEntry> records_;
    std::map<VertexId, Digest> voted_;  // first digest wins
    std::map<VertexId, std::map<Digest, std::map<PeerId, Signature>>> votes_;
    std::map<VertexId, QuorumCert> certs_;
    // vertex digest + cert to attach to pull requests
    std::map<VertexId, std::pair<Digest, QuorumCert>> pull_certs_;
    std::set<VertexId> unadmitted_;
    std::set<VertexId> rejected_;
    std::set<VertexId> pulling_;

    Round last_round_ = 0;
    bool wait_ = true;
    std::vector<std::string> alarms_;
};

}  // namespace rorqual
