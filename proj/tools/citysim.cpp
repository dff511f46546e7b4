// Command-line front end: population sampling, single runs (local, multi-worker or with
// players attached), scenario sweeps and remote workers.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <unistd.h>

#include <CLI11.hpp>

#include "citysim/api.hpp"
#include "citysim/distributed.hpp"
#include "citysim/errors.hpp"
#include "citysim/http_server.hpp"
#include "citysim/serialize.hpp"

namespace fs = std::filesystem;
using namespace citysim;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

std::string names_csv(const std::vector<WeightedName>& table) {
    std::string out = "# name,weight\n";
    char buf[64];
    for (const auto& n : table) {
        std::snprintf(buf, sizeof buf, ",%g\n", n.weight);
        out += n.name + buf;
    }
    return out;
}

std::string coefficients_text(const FriendshipCoefficients& c) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "# logistic friendship model\nintercept = %g\nrace_match = %g\nsex_match = %g\n"
                  "age_distance = %g\neducation_distance = %g\n",
                  c.intercept, c.race_match, c.sex_match, c.age_distance, c.education_distance);
    return buf;
}

struct InputPaths {
    std::string net;
    std::string names;
    std::string coefficients;
};

void add_input_options(CLI::App* cmd, InputPaths& in) {
    cmd->add_option("--net", in.net, "Bayesian net JSON (default: built-in)")->check(CLI::ExistingFile);
    cmd->add_option("--names", in.names, "Directory with surnames.csv, female.csv, male.csv")
        ->check(CLI::ExistingDirectory);
    cmd->add_option("--coefficients", in.coefficients, "Friendship coefficients file")->check(CLI::ExistingFile);
}

WorldInputs load_inputs(const InputPaths& paths) {
    WorldInputs in = default_inputs();
    if (!paths.net.empty()) in.net = load_bayes_net_file(paths.net);
    if (!paths.names.empty()) in.names = load_name_tables(paths.names);
    if (!paths.coefficients.empty()) in.coefficients = load_coefficients_file(paths.coefficients);
    return in;
}

void write_metrics(const fs::path& dir, const std::vector<MetricsRow>& rows) {
    fs::create_directories(dir);
    std::ofstream out(dir / "metrics.csv", std::ios::binary);
    if (!out) throw ConfigError("cannot write " + (dir / "metrics.csv").string());
    write_metrics_csv(out, rows);
}

// ---- popgen ---------------------------------------------------------------------------

int popgen_sample(const std::string& net_path, std::size_t n, std::uint64_t seed, const std::string& out_path) {
    const BayesNet net = net_path.empty() ? default_inputs().net : load_bayes_net_file(net_path);
    std::string csv;
    for (std::size_t k = 0; k < net.size(); ++k) csv += (k ? "," : "") + net.node(k).id;
    csv += '\n';
    for (std::size_t i = 0; i < n; ++i) {
        // Same stream as the i-th synthesized person, so rows line up with run populations.
        RandomStream rng(StreamAddress{seed, 0, 0, StreamKind::Person, static_cast<std::uint32_t>(i), 0});
        const Assignment a = prior_sample(net, rng);
        for (std::size_t k = 0; k < net.size(); ++k) csv += (k ? "," : "") + net.node(k).domain[a[k]];
        csv += '\n';
    }
    write_text(out_path, csv);
    std::cerr << "sampled " << n << " rows over " << net.size() << " nodes -> " << out_path << '\n';
    return 0;
}

int export_defaults(const fs::path& dir) {
    const WorldInputs in = default_inputs();
    write_text(dir / "bayes_net.json", in.net.to_json() + "\n");
    write_text(dir / "names" / "surnames.csv", names_csv(in.names.surnames));
    write_text(dir / "names" / "female.csv", names_csv(in.names.female_given));
    write_text(dir / "names" / "male.csv", names_csv(in.names.male_given));
    write_text(dir / "coefficients.txt", coefficients_text(in.coefficients));
    for (const auto& sc : all_scenarios()) write_text(dir / "scenarios" / (sc.name + ".json"), scenario_to_json(sc) + "\n");
    ScenarioConfig regular;
    write_text(dir / "scenarios" / "regular.json", scenario_to_json(regular) + "\n");
    std::cerr << "wrote defaults to " << dir.string() << '\n';
    return 0;
}

// ---- run ------------------------------------------------------------------------------

struct RunArgs {
    std::string scenario;
    std::uint32_t steps = 100;
    std::uint64_t seed = 1;
    std::string out;
    std::size_t workers = 1;
    std::string listen;
    std::string arbiter;
    std::size_t population = 1000;
    int step_delay_ms = -1;
    int worker_timeout_ms = 10000;
    std::string replay_log;
    InputPaths inputs;
};

int run_command(const RunArgs& a) {
    const ScenarioConfig sc = a.scenario.empty() ? ScenarioConfig{} : load_scenario_file(a.scenario);
    WorldState world = init_world(sc, load_inputs(a.inputs), a.population, a.seed);

    // Worker side of the run, if any.
    std::unique_ptr<LocalCluster> cluster;
    std::unique_ptr<Arbiter> remote;
    Stepper stepper = local_stepper();
    ArbiterOptions arbiter_options;
    arbiter_options.timeout_ms = a.worker_timeout_ms;
    if (!a.arbiter.empty()) {
        const int fd = listen_tcp(a.arbiter);
        std::cerr << "waiting for " << a.workers << " worker(s) on port " << bound_port(fd) << '\n';
        remote = std::make_unique<Arbiter>(accept_workers(fd, a.workers, 600000), arbiter_options);
        ::close(fd);
        remote->start(world);
        stepper = [&](WorldState& w, const std::vector<Legislation>& l) { return remote->step(w, l); };
    } else if (a.workers > 1) {
        ClusterOptions co;
        co.workers = a.workers;
        co.arbiter = arbiter_options;
        cluster = std::make_unique<LocalCluster>(world, co);
        stepper = [&](WorldState& w, const std::vector<Legislation>& l) { return cluster->arbiter().step(w, l); };
    }

    const fs::path out(a.out);
    fs::create_directories(out);
    std::vector<MetricsRow> rows;
    std::vector<nlohmann::json> log;

    if (!a.replay_log.empty()) {
        std::ifstream in(a.replay_log);
        if (!in) throw ConfigError("cannot read " + a.replay_log);
        rows = replay(std::move(world), read_command_log(in), a.steps, stepper);
    } else {
        Simulation sim(std::move(world), stepper);
        std::unique_ptr<HttpServer> http;
        int delay = a.step_delay_ms;
        if (!a.listen.empty()) {
            http = std::make_unique<HttpServer>(sim);
            const int port = http->start(a.listen);
            std::cerr << "players: http://" << a.listen.substr(0, a.listen.rfind(':')) << ':' << port
                      << " (POST /join, GET /state, GET|POST /live)\n";
            if (delay < 0) delay = 1000;
        }
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        for (std::uint32_t i = 0; i < a.steps && !g_interrupted; ++i) {
            if (delay > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay));
            const MetricsRow r = sim.advance();
            if (r.step % 10 == 0) std::cerr << "step " << r.step << " population " << r.population << '\n';
        }
        sim.close();
        if (http) http->stop();
        rows = sim.metrics();
        log = sim.command_log();
    }
    if (cluster) cluster->stop();
    if (remote) remote->shutdown();

    write_metrics(out, rows);
    if (a.replay_log.empty()) {
        std::ofstream lf(out / "commands.ndjson", std::ios::binary);
        write_command_log(lf, log);
    }
    std::cerr << "wrote " << rows.size() << " rows to " << (out / "metrics.csv").string() << '\n';
    return 0;
}

// ---- sweep ----------------------------------------------------------------------------

int sweep_command(std::uint32_t steps, std::uint64_t seed, const fs::path& out, std::size_t population,
                  const InputPaths& paths) {
    const WorldInputs inputs = load_inputs(paths);
    fs::create_directories(out);
    std::ofstream summary(out / "summary.csv", std::ios::binary);
    summary << "scenario,steps,final_population,bankruptcies,mean_qol\n";
    int failures = 0;
    for (const auto& sc : all_scenarios()) {
        try {
            WorldState w = init_world(sc, inputs, population, seed);
            const auto rows = run(w, steps);
            write_metrics(out / sc.name, rows);
            const MetricsRow last = rows.empty() ? MetricsRow{} : rows.back();
            char buf[256];
            std::snprintf(buf, sizeof buf, "%s,%zu,%llu,%llu,%.6f\n", sc.name.c_str(), rows.size(),
                          static_cast<unsigned long long>(last.population),
                          static_cast<unsigned long long>(last.bankruptcies), last.mean_qol);
            summary << buf;
            std::cerr << sc.name << ": " << rows.size() << " steps\n";
        } catch (const std::exception& e) {
            ++failures;
            summary << sc.name << ",error,,,\n";
            std::cerr << sc.name << ": " << e.what() << '\n';
        }
    }
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"citysim: agent-based city economy with distributed stepping and player governance"};
    app.require_subcommand(1);

    auto* popgen = app.add_subcommand("popgen", "Population synthesis");
    popgen->require_subcommand(1);
    std::string net_path, sample_out;
    std::size_t sample_n = 1000;
    std::uint64_t sample_seed = 1;
    auto* sample = popgen->add_subcommand("sample", "Prior samples of a Bayesian net as CSV");
    sample->add_option("--net", net_path, "Net JSON (default: built-in)")->check(CLI::ExistingFile);
    sample->add_option("--n", sample_n, "Number of samples")->required();
    sample->add_option("--seed", sample_seed, "Seed")->required();
    sample->add_option("--out", sample_out, "Output CSV")->required();
    std::string export_dir;
    auto* exp = popgen->add_subcommand("export-defaults", "Write the built-in net, names, coefficients and scenarios");
    exp->add_option("--out", export_dir, "Output directory")->required();

    RunArgs ra;
    auto* runc = app.add_subcommand("run", "Run one scenario");
    runc->add_option("--scenario", ra.scenario, "Scenario JSON")->check(CLI::ExistingFile);
    runc->add_option("--steps", ra.steps, "Steps")->required();
    runc->add_option("--seed", ra.seed, "Seed")->required();
    runc->add_option("--out", ra.out, "Output directory")->required();
    runc->add_option("--workers", ra.workers, "Worker count (1 steps in-process)")->check(CLI::PositiveNumber);
    runc->add_option("--listen", ra.listen, "Serve players over HTTP at host:port");
    runc->add_option("--arbiter", ra.arbiter, "Accept remote workers at host:port instead of local threads");
    runc->add_option("--population", ra.population, "Number of citizens");
    runc->add_option("--step-delay", ra.step_delay_ms, "Milliseconds between steps (1000 when players are served)");
    runc->add_option("--worker-timeout", ra.worker_timeout_ms, "Milliseconds before a silent worker is dropped");
    runc->add_option("--replay", ra.replay_log, "Replay a recorded command log")->check(CLI::ExistingFile);
    add_input_options(runc, ra.inputs);

    bool all = false;
    std::uint32_t sweep_steps = 200;
    std::uint64_t sweep_seed = 1;
    std::string sweep_out;
    std::size_t sweep_population = 1000;
    InputPaths sweep_inputs;
    auto* sweep = app.add_subcommand("sweep", "Run every scenario combination");
    sweep->add_flag("--all-scenarios", all, "Sweep the 27 food/tech/disease combinations")->required();
    sweep->add_option("--steps", sweep_steps, "Steps")->required();
    sweep->add_option("--seed", sweep_seed, "Seed")->required();
    sweep->add_option("--out", sweep_out, "Output directory")->required();
    sweep->add_option("--population", sweep_population, "Number of citizens");
    add_input_options(sweep, sweep_inputs);

    std::string connect;
    std::string worker_name = "worker";
    auto* worker = app.add_subcommand("worker", "Serve an arbiter started with run --arbiter");
    worker->add_option("--connect", connect, "Arbiter host:port")->required();
    worker->add_option("--name", worker_name, "Name reported at registration");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sample->parsed()) return popgen_sample(net_path, sample_n, sample_seed, sample_out);
        if (exp->parsed()) return export_defaults(export_dir);
        if (runc->parsed()) return run_command(ra);
        if (sweep->parsed()) return sweep_command(sweep_steps, sweep_seed, sweep_out, sweep_population, sweep_inputs);
        if (worker->parsed()) {
            FrameChannel ch = connect_tcp(connect, 30000);
            WorkerOptions wo;
            wo.name = worker_name;
            const std::uint32_t steps = run_worker(ch, wo);
            std::cerr << "worker done after " << steps << " steps\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
