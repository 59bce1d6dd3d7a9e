#include "rorqual/dag.hpp"

#include <algorithm>

namespace rorqual {

DagStore::DagStore(std::uint16_t n) : n_(n) {
    for (PeerId p = 0; p < n; ++p) {
        auto g = genesis_vertex(p);
        Node node{g, {}, {}};
        nodes_.emplace(key(g.id()), std::move(node));
        rounds_[0].push_back(g.id());
    }
}

const Vertex* DagStore::get(VertexId id) const {
    auto it = nodes_.find(key(id));
    return it == nodes_.end() ? nullptr : &it->second.v;
}

void DagStore::merge(std::vector<std::uint64_t>& into,
                     const std::vector<std::uint64_t>& from) {
    if (from.size() > into.size()) into.resize(from.size(), 0);
    for (std::size_t i = 0; i < from.size(); ++i) into[i] |= from[i];
}

bool DagStore::insert(const Vertex& v) {
    if (contains(v.id())) return true;
    Node node{v, {}, {}};
    for (const auto& e : v.strong_edges) {
        auto it = nodes_.find(key(e.id()));
        if (it == nodes_.end()) {
            ++violations_;
            return false;
        }
        set_bit(node.anc, key(e.id()));
        set_bit(node.strong_anc, key(e.id()));
        merge(node.anc, it->second.anc);
        merge(node.strong_anc, it->second.strong_anc);
    }
    for (const auto& e : v.weak_edges) {
        auto it = nodes_.find(key(e.id()));
        if (it == nodes_.end()) {
            ++violations_;
            return false;
        }
        set_bit(node.anc, key(e.id()));
        merge(node.anc, it->second.anc);
    }
    rounds_[v.round].push_back(v.id());
    max_round_ = std::max(max_round_, v.round);
    nodes_.emplace(key(v.id()), std::move(node));
    return true;
}

bool DagStore::path(VertexId from, VertexId to) const {
    if (from == to) return contains(from);
    auto it = nodes_.find(key(from));
    if (it == nodes_.end() || !contains(to)) return false;
    return bit(it->second.anc, key(to));
}

bool DagStore::strong_path(VertexId from, VertexId to) const {
    if (from == to) return contains(from);
    auto it = nodes_.find(key(from));
    if (it == nodes_.end() || !contains(to)) return false;
    return bit(it->second.strong_anc, key(to));
}

std::vector<VertexId> DagStore::read_causal(VertexId id) const {
    std::vector<VertexId> out;
    auto it = nodes_.find(key(id));
    if (it == nodes_.end()) return out;
    const auto& anc = it->second.anc;
    for (std::size_t w = 0; w < anc.size(); ++w) {
        std::uint64_t word = anc[w];
        while (word) {
            auto b = static_cast<std::uint64_t>(__builtin_ctzll(word));
            word &= word - 1;
            std::uint64_t cid = w * 64 + b;
            out.push_back({static_cast<PeerId>(cid % n_),
                           static_cast<Round>(cid / n_)});
        }
    }
    return out;
}

const std::vector<VertexId>& DagStore::round_vertices(Round r) const {
    static const std::vector<VertexId> empty;
    auto it = rounds_.find(r);
    return it == rounds_.end() ? empty : it->second;
}

std::vector<std::pair<VertexId, Digest>> DagStore::contents() const {
    std::vector<std::pair<VertexId, Digest>> out;
    for (const auto& [r, ids] : rounds_) {
        if (r == 0) continue;
        for (auto id : ids) out.emplace_back(id, get(id)->digest());
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

void DagStore::export_edges(std::ostream& os) const {
    for (const auto& [r, ids] : rounds_) {
        for (auto id : ids) {
            const auto* v = get(id);
            for (const auto& e : v->strong_edges)
                os << id.source << ',' << id.round << " -> " << e.source << ','
                   << e.round << ",strong\n";
            for (const auto& e : v->weak_edges)
                os << id.source << ',' << id.round << " -> " << e.source << ','
                   << e.round << ",weak\n";
        }
    }
}

}  // namespace rorqual
