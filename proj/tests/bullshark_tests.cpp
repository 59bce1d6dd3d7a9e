#include "doctest.h"
#include "rorqual/bullshark.hpp"

using namespace rorqual;

namespace {

// builds round r vertices for the given sources with strong edges to every
// round r-1 vertex present, admits them, and feeds the ordering
void fill_round(DagStore& dag, Ordering& ord, Round r,
                const std::vector<PeerId>& sources) {
    for (PeerId p : sources) {
        Vertex v;
        v.source = p;
        v.round = r;
        v.block = {static_cast<std::uint8_t>(p),
                   static_cast<std::uint8_t>(r)};
        for (VertexId parent : dag.round_vertices(r - 1))
            v.strong_edges.push_back(
                {parent.source, parent.round, dag.get(parent)->digest()});
        REQUIRE(dag.insert(v));
        ord.on_admitted(*dag.get(v.id()));
    }
}

}  // namespace

TEST_CASE("steady-state commits on the full dag") {
    DagStore dag(4);
    Ordering ord(dag, 4, 1, 1);
    CHECK(ord.first_steady_leader(1) == 0);
    CHECK(ord.second_steady_leader(1) == 1);
    CHECK(ord.first_steady_leader(2) == 2);
    CHECK(ord.second_steady_leader(2) == 3);

    fill_round(dag, ord, 1, {0, 1, 2, 3});
    fill_round(dag, ord, 2, {0, 1, 2, 3});
    CHECK(ord.committed_leaders() == 0);

    // first round-3 vertex carries 4 >= 2f+1 votes for leader (0, 1)
    fill_round(dag, ord, 3, {2});
    CHECK(ord.committed_leaders() == 1);
    CHECK(ord.committed_round() == 1);
    REQUIRE(ord.deliveries().size() == 1);
    CHECK(ord.deliveries()[0].source == 0);
    CHECK(ord.deliveries()[0].round == 1);

    fill_round(dag, ord, 3, {0, 1, 3});
    fill_round(dag, ord, 4, {0, 1, 2, 3});
    CHECK(ord.committed_leaders() == 1);

    // first round-5 vertex types its vote and commits leader (1, 3)
    fill_round(dag, ord, 5, {3});
    CHECK(ord.committed_leaders() == 2);
    CHECK(ord.committed_round() == 3);
    // everything in (1, 3)'s history is now delivered, rounds ascending
    // (1, 3) covers all of rounds 1-2 and only itself in round 3; (0, 1)
    // was delivered already
    const auto& del = ord.deliveries();
    REQUIRE(del.size() == 9);
    for (std::size_t i = 1; i < del.size(); ++i) {
        CHECK(del[i].seq == i);
        CHECK(del[i].round >= del[i - 1].round);
    }
    CHECK(del.back().round == 3);
    CHECK(del.back().source == 1);
}

TEST_CASE("a missing leader is skipped and the order stays gap-free") {
    DagStore dag(4);
    Ordering ord(dag, 4, 1, 1);
    fill_round(dag, ord, 1, {1, 2, 3});  // leader (0, 1) never exists
    fill_round(dag, ord, 2, {0, 1, 2, 3});
    fill_round(dag, ord, 3, {0, 1, 2, 3});
    CHECK(ord.committed_leaders() == 0);  // nothing to commit in this slot
    fill_round(dag, ord, 4, {0, 1, 2, 3});
    fill_round(dag, ord, 5, {0});
    // second steady leader (1, 3) commits; its history includes rounds 1-2
    CHECK(ord.committed_leaders() == 1);
    CHECK(ord.committed_round() == 3);
    std::size_t round1 = 0, round2 = 0;
    for (const auto& d : ord.deliveries()) {
        if (d.round == 1) ++round1;
        if (d.round == 2) ++round2;
    }
    CHECK(round1 == 3);
    CHECK(round2 == 4);
}

TEST_CASE("delivery order is deterministic across admission orders") {
    auto run = [](const std::vector<PeerId>& order3) {
        DagStore dag(4);
        Ordering ord(dag, 4, 1, 7);
        fill_round(dag, ord, 1, {0, 1, 2, 3});
        fill_round(dag, ord, 2, {3, 1, 0, 2});
        fill_round(dag, ord, 3, order3);
        fill_round(dag, ord, 4, {0, 1, 2, 3});
        fill_round(dag, ord, 5, {2, 0});
        return ord.deliveries();
    };
    auto a = run({0, 1, 2, 3});
    auto b = run({3, 2, 1, 0});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].round == b[i].round);
        CHECK(a[i].source == b[i].source);
        CHECK(a[i].block_digest == b[i].block_digest);
    }
}

TEST_CASE("the fallback coin is deterministic in the seed") {
    DagStore dag(4);
    Ordering a(dag, 4, 1, 42), b(dag, 4, 1, 42), c(dag, 4, 1, 43);
    bool differs = false;
    for (std::uint32_t w = 1; w <= 8; ++w) {
        CHECK(a.fallback_leader(w) == b.fallback_leader(w));
        CHECK(a.fallback_leader(w) < 4);
        if (a.fallback_leader(w) != c.fallback_leader(w)) differs = true;
    }
    CHECK(differs);
}

TEST_CASE("wave conditions gate round advancement") {
    DagStore dag(4);
    Ordering ord(dag, 4, 1, 1);
    fill_round(dag, ord, 1, {1, 2, 3});
    CHECK_FALSE(ord.wave_condition(1, 4, 1));  // leader (0, 1) missing
    fill_round(dag, ord, 1, {0});
    CHECK(ord.wave_condition(1, 4, 1));

    fill_round(dag, ord, 2, {0, 1});
    CHECK_FALSE(ord.wave_condition(2, 4, 1));  // only 2 < n-f behind leader
    fill_round(dag, ord, 2, {2});
    CHECK(ord.wave_condition(2, 4, 1));

    fill_round(dag, ord, 3, {0, 2, 3});
    CHECK_FALSE(ord.wave_condition(3, 4, 1));  // second leader (1, 3) missing
    fill_round(dag, ord, 3, {1});
    CHECK(ord.wave_condition(3, 4, 1));
    fill_round(dag, ord, 4, {0, 1, 2});
    CHECK(ord.wave_condition(4, 4, 1));
}
