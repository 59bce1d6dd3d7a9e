#include "rorqual/metrics.hpp"

#include <cmath>

namespace rorqual {

void MetricsCollector::record_dispersal(VertexId id, SimTime t, bool byz) {
    auto& s = vertices_[id];
    if (s.send_time < 0.0) s.send_time = t;
    s.byzantine_source = byz;
}

void MetricsCollector::record_admission(VertexId id, PeerId peer, SimTime t) {
    auto& s = vertices_[id];
    s.admissions.emplace(peer, t);  // first admission wins
}

void MetricsCollector::record_cert(VertexId id, SimTime t) {
    auto& s = vertices_[id];
    if (!s.first_cert) s.first_cert = t;
}

void MetricsCollector::record_bytes(const std::optional<VertexId>& attribution,
                                    std::size_t bytes) {
    total_bytes_ += bytes;
    if (attribution)
        vertices_[*attribution].bytes += bytes;
    else
        setup_bytes_ += bytes;
}

void RunMetrics::write_csv(std::ostream& os) const {
    os << "source,round,send_time,byzantine,correct_admissions,"
          "latency_fplus1,latency_all,cert_latency\n";
    auto opt = [](const std::optional<double>& v) {
        return v ? std::to_string(*v) : std::string("");
    };
    for (const auto& l : latencies) {
        os << l.id.source << ',' << l.id.round << ',' << l.send_time << ','
           << (l.byzantine_source ? 1 : 0) << ',' << l.correct_admissions
           << ',' << opt(l.latency_fplus1) << ',' << opt(l.latency_all) << ','
           << opt(l.cert_latency) << '\n';
    }
}

double loglog_slope(const std::vector<double>& x,
                    const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope needs matched series, n >= 2");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double lx = std::log(x[i]);
        double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace rorqual
