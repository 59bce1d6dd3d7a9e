#pragma once

#include <map>
#include <memory>
#include <set>

#include "rorqual/bullshark.hpp"
#include "rorqual/dag.hpp"
#include "rorqual/enclave.hpp"
#include "rorqual/simnet.hpp"

namespace rorqual {

// Normal-World Rorqual state machine: setup echo quorums, vertex/share/ack
// handling with DAG admission, pull recovery, timeouts and LDR accounting,
// and category-based parent choice. Owns the peer's Secure World (Enclave),
// DAG store, and Bullshark ordering state.
class RorqualPeer : public Peer {
  public:
    RorqualPeer(Simulation& sim, PeerId id, KeyPair nw_key,
                std::map<PeerId, PublicKey> nw_pub);

    void start() override;
    void on_message(const Envelope& env, PeerId from) override;
    void restart_enclave() override;

    const DagStore* dag() const override { return &dag_; }
    std::vector<StoredVertex> stored_vertices() const override;
    const std::vector<DeliveryRecord>* deliveries() const override {
        return &ordering_.deliveries();
    }
    std::uint64_t committed_leaders() const override {
        return ordering_.committed_leaders();
    }
    Round last_round() const override { return last_round_; }
    std::vector<Round> ldr_snapshot() const override { return ldr_; }
    std::vector<std::string> alarms() const override { return alarms_; }

    const Enclave& enclave() const { return *enclave_; }

  private:
    struct ShareSlot {
        bool have_digest = false;
        Digest vertex_digest;
        std::map<std::uint16_t, Bytes> shares;         // index -> data
        std::map<std::uint16_t, Signature> sw_sigs;    // index -> sigma_j
        std::map<PeerId, Signature> attest;            // relayer NW sigs
        std::optional<QuorumCert> cert;
        bool own_share_sent = false;
    };

    // setup
    void on_key(const KeyMsg& m, PeerId from);
    void on_echo(const EchoMsg& m);
    void on_key_request(const KeyRequestMsg& m, PeerId from);
    void on_key_reply(const KeyReplyMsg& m);
    void accept_key(PeerId subject, const PublicKey& pub, QuorumCert cert);
    void request_key(PeerId subject);

    // dispersal and recovery
    void on_vertex(const VertexMsg& m, PeerId from);
    void on_share(const ShareMsg& m);
    void on_request(const RequestMsg& m, PeerId from);
    void on_relay(const RelayMsg& m);
    void on_timeout_msg(const TimeoutMsg& m);

    // returns false if the record conflicts with an existing one
    bool store_record(const Vertex& v, const Signature& sw_sig,
                      const PublicKey& key);
    void try_admit();
    bool admissible(const VertexRecord& rec, std::vector<VertexId>& missing);
    void admit(const Vertex& v);
    void start_pull(VertexId missing);
    void pull_tick(VertexId missing);
    void timeout_scan(Round r);
    void ldr_bump(PeerId p, Round r);

    // formation (parent categories, weak edges, dispersal)
    void try_form();
    void form_now();
    std::vector<VertexId> eligible_parents(Round r, bool fast) const;
    std::size_t share_count(PeerId source, Round r) const;
    bool parent_shares_complete(const Vertex& v) const;
    void disperse(Round target, const std::vector<VertexId>& parents);

    void alarm(std::string what) { alarms_.push_back(std::move(what)); }

    Simulation& sim_;
    PeerId id_;
    std::uint16_t n_;
    std::uint16_t f_;
    const ScenarioConfig& cfg_;

    KeyPair nw_key_;
    std::map<PeerId, PublicKey> nw_pub_;
    std::unique_ptr<Enclave> enclave_;

    DagStore dag_;
    Ordering ordering_;

    // setup state
    std::map<PeerId, PublicKey> echoed_;   // at most one echoed key per peer
    std::map<PeerId, std::map<PeerId, Signature>> echo_sigs_;  // by subject
    std::map<PeerId, PublicKey> echo_key_;  // key the collected echoes cover
    std::map<PeerId, PublicKey> sw_keys_;   // accepted PUB_SK
    std::map<PeerId, QuorumCert> key_certs_;
    std::set<PeerId> key_requested_;

    // waiting for a key before processing
    std::map<PeerId, std::vector<VertexMsg>> keywait_vertices_;
    std::map<PeerId, std::vector<ShareMsg>> keywait_shares_;
    std::map<PeerId, std::vector<RelayMsg>> keywait_relays_;

    std::map<VertexId, VertexRecord> records_;  // V map
    std::map<VertexId, ShareSlot> slots_;       // H_SHARES + Sigma-Shares
    std::set<VertexId> acked_;
    std::set<VertexId> unadmitted_;
    std::set<VertexId> rejected_;
    std::set<VertexId> pulling_;
    std::vector<Round> max_record_round_;  // per source, for timeout scans

    std::map<std::pair<PeerId, Round>, std::map<PeerId, Signature>>
        timeout_sigs_;
    std::set<std::pair<PeerId, Round>> timeout_sent_;

    std::vector<Round> ldr_;
    Round last_round_ = 0;
    SimTime last_sent_ = -1e18;
    bool wait_ = true;  // wave gating flag
    bool slow_path_retry_armed_ = false;
    bool form_pending_ = false;

    std::vector<std::string> alarms_;
};

}  // namespace rorqual
