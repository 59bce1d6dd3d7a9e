#include "doctest.h"
#include "rorqual/messages.hpp"
#include "rorqual/scenario.hpp"

using namespace rorqual;

namespace {

Vertex sample_vertex() {
    Vertex v;
    v.round = 7;
    v.source = 3;
    v.block = {1, 2, 3, 4, 5};
    v.strong_edges.push_back({0, 6, digest(Bytes{9})});
    v.strong_edges.push_back({1, 6, digest(Bytes{8})});
    v.weak_edges.push_back({2, 4, digest(Bytes{7})});
    QuorumCert c;
    c.subject = digest(Bytes{7});
    c.threshold = 3;
    Entropy ent(1);
    KeyPair kp = KeyPair::generate(ent, KeyDomain::NormalWorld);
    c.signatures.push_back(kp.sign(Bytes{1}, 2));
    v.weak_certs.push_back(c);
    v.delay = 5;
    v.latency_scores = {0, 1, 2, 3};
    return v;
}

}  // namespace

TEST_CASE("vertex serialization round-trip") {
    Vertex v = sample_vertex();
    Bytes ser = v.serialize();
    ByteReader r(ser);
    Vertex back = Vertex::deserialize(r);
    CHECK(r.done());
    CHECK(back.serialize() == ser);
    CHECK(back.id() == v.id());
    CHECK(back.block == v.block);
    CHECK(back.strong_edges == v.strong_edges);
    CHECK(back.weak_edges == v.weak_edges);
    CHECK(back.delay == v.delay);
    CHECK(back.latency_scores == v.latency_scores);
    CHECK(back.digest() == v.digest());

    Vertex changed = v;
    changed.delay = 6;
    CHECK_FALSE(changed.digest() == v.digest());
}

TEST_CASE("truncated vertex bytes are rejected") {
    Bytes ser = sample_vertex().serialize();
    ser.resize(ser.size() / 2);
    ByteReader r(ser);
    CHECK_THROWS_AS(Vertex::deserialize(r), std::out_of_range);
}

TEST_CASE("envelope wire size and attribution") {
    Envelope e;
    e.sender = 2;
    VertexMsg vm;
    vm.vertex = sample_vertex();
    vm.share_index = 1;
    vm.share_data = {1, 2, 3};
    e.payload = vm;
    CHECK(e.wire_size() > 0);
    CHECK(std::string(e.type_name()) == "Vertex");
    REQUIRE(e.attribution().has_value());
    CHECK(*e.attribution() == VertexId{3, 7});

    Envelope k;
    k.payload = KeyMsg{};
    CHECK_FALSE(k.attribution().has_value());
}

TEST_CASE("scenario text round-trip") {
    ScenarioConfig cfg;
    cfg.n = 7;
    cfg.f = 2;
    cfg.delta_actual = 0.5;
    cfg.delta_bound = 1.0;
    cfg.gst = 10.0;
    cfg.duration = 42.0;
    cfg.deterministic_delays = true;
    cfg.backend = Backend::Pull;
    cfg.leader_gating = true;
    cfg.seed = 99;
    cfg.adversary.behavior = AdvBehavior::SelectiveOmission;
    cfg.adversary.byzantine = {0, 3};
    cfg.adversary.vertex_recipients = 3;
    cfg.adversary.stop_dispersing_at = 30.0;

    ScenarioConfig back = ScenarioConfig::parse_text(cfg.to_text());
    CHECK(back.to_text() == cfg.to_text());
    CHECK(back.n == 7);
    CHECK(back.backend == Backend::Pull);
    CHECK(back.adversary.byzantine == std::vector<PeerId>{0, 3});
    CHECK(back.adversary.vertex_recipients == 3);
}

TEST_CASE("scenario validation and parsing errors") {
    ScenarioConfig cfg;
    cfg.n = 6;  // violates n >= 3f + 1 for f = 2
    cfg.f = 2;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = ScenarioConfig{};
    cfg.delta_actual = 2.0;
    cfg.delta_bound = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    CHECK_THROWS_AS(ScenarioConfig::parse_text("nonsense_key = 1"),
                    std::invalid_argument);
    ScenarioConfig ok = ScenarioConfig::parse_text(
        "# comment\nn = 4\nf = 1\nbackend = pull\n");
    CHECK(ok.n == 4);
    CHECK(ok.backend == Backend::Pull);
}
