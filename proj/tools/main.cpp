#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msq/analysis.hpp"
#include "msq/error.hpp"
#include "msq/fmt.hpp"
#include "msq/job_type.hpp"
#include "msq/sim.hpp"
#include "msq/sjp.hpp"
#include "msq/spec_io.hpp"

namespace {

using namespace msq;

double resolve_lambda(const JobType& job, const std::optional<double>& lambda,
                      const std::optional<double>& rho) {
    if (lambda.has_value() == rho.has_value())
        fail(ErrorCode::InvalidArgument, "give exactly one of --lambda and --rho");
    if (lambda) {
        if (!(*lambda > 0.0)) fail(ErrorCode::InvalidArgument, "--lambda must be positive");
        return *lambda;
    }
    if (!(*rho > 0.0)) fail(ErrorCode::InvalidArgument, "--rho must be positive");
    return *rho / expected_total_size(job, JobState{job.initial(), 0.0});
}

// "LO:HI:STEP" or a single value.
std::vector<double> parse_rho_grid(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string piece;
    while (std::getline(ss, piece, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(piece, &used));
            if (used != piece.size()) throw std::invalid_argument(piece);
        } catch (const std::exception&) {
            fail(ErrorCode::InvalidArgument, "cannot parse --rho component '" + piece + "'");
        }
    }
    if (parts.size() == 1) return parts;
    if (parts.size() != 3)
        fail(ErrorCode::InvalidArgument, "--rho wants LO:HI:STEP or a single value");
    const double lo = parts[0], hi = parts[1], step = parts[2];
    if (!(step > 0.0) || hi < lo)
        fail(ErrorCode::InvalidArgument, "--rho grid needs LO <= HI and STEP > 0");
    std::vector<double> grid;
    for (int k = 0;; ++k) {
        const double v = lo + k * step;
        if (v > hi + 1e-9) break;
        grid.push_back(v);
    }
    return grid;
}

std::vector<Policy> parse_policies(const std::string& text) {
    std::vector<Policy> out;
    std::stringstream ss(text);
    std::string piece;
    while (std::getline(ss, piece, ',')) out.push_back(parse_policy(piece));
    if (out.empty()) fail(ErrorCode::InvalidArgument, "--policies list is empty");
    return out;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path, std::ios::binary);
    if (!file) fail(ErrorCode::InvalidArgument, "cannot open output file '" + path + "'");
    return file;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "rho,lambda,policy,mean_T,mean_TQ,ci95,analytic_TQ\n";
    for (const SweepRow& r : rows) {
        out << fmt_g(r.rho) << ',' << fmt_g(r.lambda) << ',' << policy_name(r.policy) << ','
            << fmt_g(r.mean_t) << ',' << fmt_g(r.mean_tq) << ',' << fmt_g(r.ci95) << ',';
        if (!std::isnan(r.analytic_tq)) out << fmt_g(r.analytic_tq);
        out << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gittins-index scheduling toolkit for multistage M/G/1 jobs"};
    app.require_subcommand(1);

    std::string spec_path;
    std::string stage_name;
    std::optional<double> age;
    std::optional<double> lambda, rho;
    std::string out_path;
    int samples = 0;
    int r_nodes = 16, x_nodes = 32;
    std::string policy_str = "mgp";
    std::string policies_str = "fcfs,bgp,mgp";
    std::string rho_grid_str;
    std::string per_stage_path;
    SimConfig sim_cfg;

    CLI::App* validate = app.add_subcommand("validate", "parse a job spec and report a summary");
    validate->add_option("spec", spec_path, "job spec JSON file")->required();

    CLI::App* index = app.add_subcommand("index", "fair price and Gittins index of a job or state");
    index->add_option("spec", spec_path)->required();
    CLI::Option* index_stage = index->add_option("--stage", stage_name, "stage name of the state");
    index->add_option("--age", age, "service already received in the stage")->needs(index_stage);

    CLI::App* sjp = app.add_subcommand("sjp", "dump a stopping-value curve as CSV");
    sjp->add_option("spec", spec_path)->required();
    CLI::Option* sjp_stage = sjp->add_option("--stage", stage_name, "stage name of the state");
    sjp->add_option("--age", age, "service already received in the stage")->needs(sjp_stage);
    sjp->add_option("--samples", samples, "emit (r, value) samples instead of segments");
    sjp->add_option("--out", out_path, "output file (default stdout)");

    CLI::App* compose = app.add_subcommand("compose", "compose job specs and write the result");
    std::vector<std::string> seq_paths;
    compose->add_option("--seq", seq_paths, "serve these jobs in order")
        ->required()
        ->expected(2, -1);
    compose->add_option("--out", out_path, "output file (default stdout)");

    CLI::App* analyze = app.add_subcommand("analyze", "mean queueing time under index scheduling");
    analyze->add_option("spec", spec_path)->required();
    analyze->add_option("--lambda", lambda, "arrival rate");
    analyze->add_option("--rho", rho, "offered load (converted via the mean total size)");
    analyze->add_option("--r-nodes", r_nodes, "quadrature nodes per reward piece");
    analyze->add_option("--x-nodes", x_nodes, "quadrature nodes per age interval");
    analyze->add_option("--per-stage", per_stage_path, "write per-stage contribution CSV here");

    CLI::App* simulate_cmd = app.add_subcommand("simulate", "run the discrete-event simulator");
    simulate_cmd->add_option("spec", spec_path)->required();
    simulate_cmd->add_option("--lambda", lambda, "arrival rate");
    simulate_cmd->add_option("--rho", rho, "offered load");
    simulate_cmd->add_option("--policy", policy_str, "fcfs, bgp, or mgp");
    simulate_cmd->add_option("--jobs", sim_cfg.jobs, "arrivals per replication");
    simulate_cmd->add_option("--seed", sim_cfg.seed, "base RNG seed");
    simulate_cmd->add_option("--reps", sim_cfg.replications, "replications");
    simulate_cmd->add_option("--warmup", sim_cfg.warmup, "completions to discard (default jobs/5)");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "simulate a load grid and write CSV");
    sweep_cmd->add_option("spec", spec_path)->required();
    sweep_cmd->add_option("--rho", rho_grid_str, "load grid LO:HI:STEP")->required();
    sweep_cmd->add_option("--policies", policies_str, "comma-separated policy list");
    sweep_cmd->add_option("--out", out_path, "output CSV file (default stdout)");
    sweep_cmd->add_option("--jobs", sim_cfg.jobs, "arrivals per replication");
    sweep_cmd->add_option("--seed", sim_cfg.seed, "base RNG seed");
    sweep_cmd->add_option("--reps", sim_cfg.replications, "replications");
    sweep_cmd->add_option("--warmup", sim_cfg.warmup, "completions to discard (default jobs/5)");
    sweep_cmd->add_option("--r-nodes", r_nodes, "quadrature nodes per reward piece");
    sweep_cmd->add_option("--x-nodes", x_nodes, "quadrature nodes per age interval");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(validate)) {
            const JobType job = load_job_spec(spec_path);
            const double mean = expected_total_size(job, JobState{job.initial(), 0.0});
            std::cout << "OK " << job.name() << ": " << (job.stage_count() - 1)
                      << " stages, E[total size] = " << fmt_g(mean) << "\n";
        } else if (app.got_subcommand(index)) {
            const JobType job = load_job_spec(spec_path);
            double fair;
            if (!stage_name.empty()) {
                const JobSjp curves(job);
                fair = curves.fair_at(JobState{job.find_stage(stage_name), age.value_or(0.0)});
                if (fair <= 0.0)
                    fail(ErrorCode::DegenerateJob,
                         "state completes instantly with positive probability");
            } else {
                fair = fair_index(sjp_of_job(job)).fair;
            }
            std::cout << "fair=" << fmt_g(fair) << " gittins=" << fmt_g(1.0 / fair) << "\n";
        } else if (app.got_subcommand(sjp)) {
            const JobType job = load_job_spec(spec_path);
            const JobSjp curves(job);
            const PwlFunction v =
                stage_name.empty()
                    ? curves.value()
                    : curves.value_at(JobState{job.find_stage(stage_name), age.value_or(0.0)});
            std::ofstream file;
            std::ostream& out = open_out(file, out_path);
            if (samples > 0) {
                const double hi = 1.05 * v.last_breakpoint();
                out << "r,value\n";
                for (int k = 0; k <= samples; ++k) {
                    const double r = hi * k / samples;
                    out << fmt_g(r) << ',' << fmt_g(v.eval(r)) << '\n';
                }
            } else {
                out << "breakpoint,slope\n";
                for (std::size_t k = 0; k < v.size(); ++k)
                    out << fmt_g(v.breakpoints()[k]) << ',' << fmt_g(v.slopes()[k]) << '\n';
            }
        } else if (app.got_subcommand(compose)) {
            std::optional<JobType> acc = load_job_spec(seq_paths[0]);
            for (std::size_t i = 1; i < seq_paths.size(); ++i)
                acc.emplace(sequential_compose(*acc, load_job_spec(seq_paths[i])));
            if (out_path.empty() || out_path == "-")
                std::cout << job_spec_to_json(*acc);
            else
                write_job_spec(*acc, out_path);
        } else if (app.got_subcommand(analyze)) {
            const JobType job = load_job_spec(spec_path);
            const double lam = resolve_lambda(job, lambda, rho);
            const double mean = expected_total_size(job, JobState{job.initial(), 0.0});
            QuadratureSpec qs;
            qs.r_nodes = r_nodes;
            qs.x_nodes = x_nodes;
            const std::vector<double> by_stage = mean_queueing_time_by_stage(job, lam, qs);
            double tq = 0.0;
            for (double c : by_stage) tq += c;
            std::cout << "rho=" << fmt_g(lam * mean) << "\n"
                      << "mean_TQ_analytic=" << fmt_g(tq) << "\n"
                      << "mean_T_analytic=" << fmt_g(tq + mean) << "\n";
            if (!per_stage_path.empty()) {
                std::ofstream file;
                std::ostream& out = open_out(file, per_stage_path);
                out << "stage,contribution\n";
                for (int i = 0; i < job.stage_count(); ++i)
                    if (job.stage(i).kind == StageKind::Dist)
                        out << job.stage(i).name << ','
                            << fmt_g(by_stage[static_cast<std::size_t>(i)]) << '\n';
            }
        } else if (app.got_subcommand(simulate_cmd)) {
            const JobType job = load_job_spec(spec_path);
            sim_cfg.lambda = resolve_lambda(job, lambda, rho);
            const double mean = expected_total_size(job, JobState{job.initial(), 0.0});
            const double load = sim_cfg.lambda * mean;
            if (load >= 1.0)
                std::cerr << "warning: offered load " << fmt_g(load)
                          << " is at or above 1; the queue is unstable\n";
            const SimResult res = simulate(job, parse_policy(policy_str), sim_cfg);
            std::cout << "policy=" << policy_str << "\n"
                      << "rho=" << fmt_g(load) << "\n"
                      << "mean_T=" << fmt_g(res.mean_t) << "\n"
                      << "mean_TQ=" << fmt_g(res.mean_tq) << "\n"
                      << "ci95_T=" << fmt_g(res.ci95_t) << "\n"
                      << "ci95_TQ=" << fmt_g(res.ci95_tq) << "\n";
        } else if (app.got_subcommand(sweep_cmd)) {
            const JobType job = load_job_spec(spec_path);
            QuadratureSpec qs;
            qs.r_nodes = r_nodes;
            qs.x_nodes = x_nodes;
            const std::vector<SweepRow> rows =
                sweep(job, parse_rho_grid(rho_grid_str), parse_policies(policies_str), sim_cfg, qs);
            std::ofstream file;
            std::ostream& out = open_out(file, out_path);
            write_sweep_csv(out, rows);
        }
    } catch (const Error& e) {
        std::cerr << "error (" << error_code_name(e.code()) << "): " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
