// Command-line driver: single runs, seed/size sweeps, the backend
// comparison table, and a standalone invariant checker.

#include <fstream>
#include <iostream>
#include <numeric>

#include "CLI11.hpp"
#include "rorqual/dag.hpp"
#include "rorqual/runner.hpp"

namespace {

using namespace rorqual;

struct Overrides {
    std::string config_path;
    std::optional<int> n, f, seed, recipients;
    std::optional<double> delta, delta_bound, gst, duration, stop_at,
        crash_time;
    std::optional<std::string> backend, adversary, byzantine;
    std::optional<bool> gating, det;
};

void add_override_opts(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "scenario file (key = value)");
    cmd->add_option("--n", o.n, "number of peers");
    cmd->add_option("--f", o.f, "fault bound");
    cmd->add_option("--delta", o.delta, "actual post-GST delay bound");
    cmd->add_option("--delta-bound", o.delta_bound, "known bound Delta");
    cmd->add_option("--gst", o.gst, "global stabilization time");
    cmd->add_option("--duration", o.duration, "dispersal horizon");
    cmd->add_option("--seed", o.seed, "rng seed");
    cmd->add_option("--backend", o.backend, "rorqual | pull");
    cmd->add_option("--adversary", o.adversary,
                    "none | crash | omission | delayer | replayer");
    cmd->add_option("--byzantine", o.byzantine,
                    "comma-separated byzantine peer ids");
    cmd->add_option("--vertex-recipients", o.recipients,
                    "omission fan-out (-1 = n-2f)");
    cmd->add_option("--crash-time", o.crash_time, "crash adversary cut time");
    cmd->add_option("--stop-dispersing-at", o.stop_at,
                    "byzantine dispersal cutoff");
    cmd->add_flag("--leader-gating,!--no-leader-gating", o.gating,
                  "wave-condition round gating");
    cmd->add_flag("--deterministic-delays,!--random-delays", o.det,
                  "every post-GST delay exactly delta");
}

ScenarioConfig build_config(const Overrides& o) {
    ScenarioConfig cfg;
    if (!o.config_path.empty()) cfg = ScenarioConfig::parse_file(o.config_path);
    if (o.n) cfg.n = static_cast<std::uint16_t>(*o.n);
    if (o.f) cfg.f = static_cast<std::uint16_t>(*o.f);
    if (o.delta) cfg.delta_actual = *o.delta;
    if (o.delta_bound) cfg.delta_bound = *o.delta_bound;
    if (o.gst) cfg.gst = *o.gst;
    if (o.duration) cfg.duration = *o.duration;
    if (o.seed) cfg.seed = static_cast<std::uint64_t>(*o.seed);
    if (o.backend) cfg.backend = backend_from_string(*o.backend);
    if (o.adversary) cfg.adversary.behavior = behavior_from_string(*o.adversary);
    if (o.byzantine) {
        cfg.adversary.byzantine.clear();
        std::stringstream ss(*o.byzantine);
        std::string tok;
        while (std::getline(ss, tok, ','))
            cfg.adversary.byzantine.push_back(
                static_cast<PeerId>(std::stoul(tok)));
    }
    if (o.recipients) cfg.adversary.vertex_recipients = *o.recipients;
    if (o.crash_time) cfg.adversary.crash_time = *o.crash_time;
    if (o.stop_at) cfg.adversary.stop_dispersing_at = *o.stop_at;
    if (o.gating) cfg.leader_gating = *o.gating;
    if (o.det) cfg.deterministic_delays = *o.det;
    cfg.validate();
    return cfg;
}

double mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) /
           static_cast<double>(xs.size());
}

struct Summary {
    double mean_fplus1 = 0.0;
    double mean_all = 0.0;
    double mean_cert = 0.0;
    double mean_round = 0.0;
    std::uint64_t commits = 0;
    double bytes_per_vertex = 0.0;
    std::uint64_t vertices = 0;
};

Summary summarize(const RunResult& r) {
    Summary s;
    std::vector<double> l1, la, lc, rd;
    for (const auto& l : r.metrics.latencies) {
        if (l.byzantine_source) continue;
        if (l.latency_fplus1) l1.push_back(*l.latency_fplus1);
        if (l.latency_all) la.push_back(*l.latency_all);
        if (l.cert_latency) lc.push_back(*l.cert_latency);
    }
    for (const auto& [p, ds] : r.metrics.round_durations)
        rd.insert(rd.end(), ds.begin(), ds.end());
    s.mean_fplus1 = mean(l1);
    s.mean_all = mean(la);
    s.mean_cert = mean(lc);
    s.mean_round = mean(rd);
    for (const auto& [p, c] : r.metrics.commit_counts)
        s.commits = std::max(s.commits, c);
    s.bytes_per_vertex = r.metrics.bytes_per_vertex;
    s.vertices = r.metrics.dispersed_vertices;
    return s;
}

void print_invariants(const InvariantReport& inv) {
    auto line = [](const char* name, bool ok) {
        std::cout << "  " << name << ": " << (ok ? "ok" : "VIOLATED") << "\n";
    };
    line("containment", inv.containment_violations == 0);
    if (inv.dag_equal_checked) line("dag-equality", inv.dag_equal);
    line("store-consistency", inv.stores_consistent);
    line("delivery-prefix", inv.deliveries_prefix);
    line("byte-reconciliation", inv.bytes_reconciled);
    line("no-alarms", inv.alarms.empty());
    for (const auto& a : inv.alarms) std::cout << "    alarm: " << a << "\n";
}

int cmd_run(const Overrides& o, const std::string& out_prefix, bool trace,
            bool check_dag) {
    ScenarioConfig cfg = build_config(o);
    Runner runner(cfg, trace);
    RunResult r = runner.run(check_dag);
    Summary s = summarize(r);

    std::cout << "backend=" << to_string(cfg.backend)
              << " n=" << cfg.n << " f=" << cfg.f
              << " adversary=" << to_string(cfg.adversary.behavior)
              << " seed=" << cfg.seed << "\n"
              << "vertices=" << s.vertices
              << " commits=" << s.commits
              << " events=" << r.metrics.events_processed
              << " quiescence=" << r.metrics.quiescence_time
              << (r.metrics.truncated ? " TRUNCATED" : "") << "\n"
              << "latency(f+1)=" << s.mean_fplus1
              << " latency(all)=" << s.mean_all
              << " cert=" << s.mean_cert
              << " round=" << s.mean_round
              << " bytes/vertex=" << s.bytes_per_vertex << "\n";
    print_invariants(r.invariants);

    if (!out_prefix.empty()) {
        {
            std::ofstream f(out_prefix + "_vertices.csv");
            r.metrics.write_csv(f);
        }
        if (trace) {
            std::ofstream f(out_prefix + "_trace.csv");
            write_trace(f, runner.sim().trace());
        }
        for (PeerId p = 0; p < cfg.n; ++p) {
            if (!runner.live_correct(p)) continue;
            {
                std::ofstream f(out_prefix + "_dag.txt");
                runner.sim().peer(p).dag()->export_edges(f);
            }
            std::ofstream f(out_prefix + "_deliveries.csv");
            write_deliveries(f, *runner.sim().peer(p).deliveries());
            break;
        }
    }
    return r.invariants.ok() ? 0 : 1;
}

int cmd_sweep(const Overrides& o, int seeds, const std::string& sizes,
              const std::string& out, bool check_dag) {
    std::vector<int> ns;
    if (!sizes.empty()) {
        std::stringstream ss(sizes);
        std::string tok;
        while (std::getline(ss, tok, ',')) ns.push_back(std::stoi(tok));
    }
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out.empty()) {
        file.open(out);
        os = &file;
    }
    *os << "n,f,seed,backend,adversary,vertices,commits,latency_fplus1,"
           "latency_all,cert_latency,round_duration,bytes_per_vertex,"
           "invariants_ok\n";
    bool all_ok = true;
    ScenarioConfig base = build_config(o);
    if (ns.empty()) ns.push_back(base.n);
    for (int n : ns) {
        for (int s = 0; s < seeds; ++s) {
            ScenarioConfig cfg = base;
            cfg.n = static_cast<std::uint16_t>(n);
            cfg.f = static_cast<std::uint16_t>((n - 1) / 3);
            cfg.seed = base.seed + static_cast<std::uint64_t>(s);
            cfg.validate();
            Runner runner(cfg);
            RunResult r = runner.run(check_dag);
            Summary sm = summarize(r);
            bool ok = r.invariants.ok() && !r.metrics.truncated;
            all_ok = all_ok && ok;
            *os << cfg.n << ',' << cfg.f << ',' << cfg.seed << ','
                << to_string(cfg.backend) << ','
                << to_string(cfg.adversary.behavior) << ',' << sm.vertices
                << ',' << sm.commits << ',' << sm.mean_fplus1 << ','
                << sm.mean_all << ',' << sm.mean_cert << ',' << sm.mean_round
                << ',' << sm.bytes_per_vertex << ',' << (ok ? 1 : 0) << '\n';
        }
    }
    return all_ok ? 0 : 1;
}

int cmd_table1(const Overrides& o) {
    struct Row {
        const char* label;
        AdvBehavior behavior;
    };
    const Row rows[] = {{"fault-free", AdvBehavior::None},
                        {"crash", AdvBehavior::Crash},
                        {"omission", AdvBehavior::SelectiveOmission}};
    std::cout << "scenario      backend   latency(f+1)  latency(all)  "
                 "round     bytes/vertex  commits\n";
    bool all_ok = true;
    for (const auto& row : rows) {
        for (Backend b : {Backend::Rorqual, Backend::Pull}) {
            ScenarioConfig cfg = build_config(o);
            cfg.backend = b;
            cfg.adversary.behavior = row.behavior;
            if (row.behavior != AdvBehavior::None &&
                cfg.adversary.byzantine.empty())
                cfg.adversary.byzantine = {0};
            if (row.behavior == AdvBehavior::Crash &&
                cfg.adversary.crash_time == 0.0)
                cfg.adversary.crash_time = cfg.duration / 2.0;
            cfg.validate();
            Runner runner(cfg);
            RunResult r =
                runner.run(row.behavior != AdvBehavior::SelectiveOmission ||
                           cfg.adversary.vertex_recipients < 0);
            Summary s = summarize(r);
            all_ok = all_ok && r.invariants.ok();
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "%-13s %-9s %-13.3f %-13.3f %-9.3f %-13.1f %llu",
                          row.label, to_string(b).c_str(), s.mean_fplus1,
                          s.mean_all, s.mean_round, s.bytes_per_vertex,
                          static_cast<unsigned long long>(s.commits));
            std::cout << buf << "\n";
        }
    }
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic DAG-mempool simulator"};
    app.require_subcommand(1);

    Overrides o;
    std::string out_prefix, sweep_out, sizes;
    int seeds = 10;
    bool trace = false, no_dag_check = false;

    auto* run = app.add_subcommand("run", "single scenario run");
    add_override_opts(run, o);
    run->add_option("--out", out_prefix, "artifact file prefix");
    run->add_flag("--trace", trace, "record the message trace");
    run->add_flag("--no-dag-check", no_dag_check,
                  "skip the cross-peer DAG equality check");

    auto* sweep = app.add_subcommand("sweep", "seed / size sweep");
    add_override_opts(sweep, o);
    sweep->add_option("--seeds", seeds, "seeds per configuration");
    sweep->add_option("--sizes", sizes, "comma-separated n values");
    sweep->add_option("--out", sweep_out, "csv output path");
    sweep->add_flag("--no-dag-check", no_dag_check);

    auto* table = app.add_subcommand(
        "table1", "rorqual vs pull across fault scenarios");
    add_override_opts(table, o);

    auto* check = app.add_subcommand("check-invariants",
                                     "run and report every invariant");
    add_override_opts(check, o);
    check->add_flag("--no-dag-check", no_dag_check);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(o, out_prefix, trace, !no_dag_check);
        if (sweep->parsed())
            return cmd_sweep(o, seeds, sizes, sweep_out, !no_dag_check);
        if (table->parsed()) return cmd_table1(o);
        if (check->parsed()) {
            ScenarioConfig cfg = build_config(o);
            Runner runner(cfg);
            RunResult r = runner.run(!no_dag_check);
            print_invariants(r.invariants);
            return r.invariants.ok() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
