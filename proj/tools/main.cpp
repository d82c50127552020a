#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "varsample/homotopy.hpp"
#include "varsample/io.hpp"
#include "varsample/mindist.hpp"
#include "varsample/polysys.hpp"
#include "varsample/sampler.hpp"
#include "varsample/tda.hpp"

namespace fs = std::filesystem;
using namespace varsample;

// exit codes shared across subcommands
enum ExitCode {
    kOk = 0,
    kUsage = 1,
    kParseFailure = 2,
    kSolverFailure = 3,
    kInterruptedWithCheckpoint = 4,
    kSimplexCap = 5,
};

namespace {

struct CommonOpts {
    std::string system_path;
    std::vector<double> box;  // lo1,hi1,lo2,hi2,...
    double epsilon = 0.1;
    double delta = 1e-6;
    double tmax = -1.0;
    int pmax = 1;
    int dim = -1;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string backend = "internal";
    std::string out_dir = ".";
    bool dynamic_split = false;
    std::optional<double> dynamic_sample_rho;
    bool priority_search = false;
    std::string resume;
};

polysys::PolynomialSystem load_system(const std::string& path, int dim, std::uint64_t seed) {
    std::string text = io::read_file(path);
    auto sys = polysys::parse(text, dim);
    if (!sys.is_square_for_dim()) sys = polysys::randomize(sys, seed);
    return sys;
}

geometry::Box parse_box(const std::vector<double>& flat, int n) {
    if (static_cast<int>(flat.size()) != 2 * n)
        throw std::invalid_argument("--box needs lo,hi per variable (" + std::to_string(2 * n) +
                                    " numbers)");
    Eigen::VectorXd lo(n), hi(n);
    for (int v = 0; v < n; ++v) {
        lo[v] = flat[2 * v];
        hi[v] = flat[2 * v + 1];
    }
    return geometry::Box(lo, hi);
}

std::unique_ptr<mindist::Backend> make_backend(const std::string& spec) {
    if (spec == "internal" || spec.empty()) return std::make_unique<mindist::InternalBackend>();
    return std::make_unique<mindist::SubprocessBackend>(spec);
}

void write_verdict_files(const tda::PersistenceDiagram& diag, const tda::InferenceVerdict& v,
                         const std::string& out_dir) {
    fs::create_directories(out_dir);
    {
        std::ofstream out(out_dir + "/verdict.txt");
        out.precision(12);
        out << "corner_a=" << v.corner.a << "\n";
        out << "corner_b=" << v.corner.b << "\n";
        for (std::size_t d = 0; d < v.counts.size(); ++d)
            out << "beta_" << d << "=" << v.counts[d] << "\n";
        out << "epsilon=" << v.epsilon << "\n";
        out << "delta=" << v.delta << "\n";
        out << "ambient_dim=" << v.ambient_dim << "\n";
        out << "threshold_censored=" << (v.threshold_censored ? 1 : 0) << "\n";
        out << "hfs_assumption=" << v.hfs_assumption << "\n";
    }
    tda::write_diagram_svg(diag, v, out_dir + "/diagram.svg");
}

void print_verdict(const tda::InferenceVerdict& v) {
    std::printf("inference corner: (%.6g, %.6g)\n", v.corner.a, v.corner.b);
    for (std::size_t d = 0; d < v.counts.size(); ++d)
        std::printf("beta_%zu >= %zu\n", d, v.counts[d]);
    if (v.threshold_censored)
        std::printf("warning: diagram threshold is below the corner death bound; "
                    "alive-at-threshold classes were not counted\n");
    std::printf("assumption: bounds are valid provided the sampled variety has "
                "homological feature size greater than %.6g\n",
                v.hfs_assumption);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"varsample: sample real algebraic varieties and infer homology"};
    app.set_config("--config", "", "key=value config file; command-line flags win");
    app.require_subcommand(1);

    CommonOpts o;

    // --- sample ---------------------------------------------------------
    auto* cmd_sample = app.add_subcommand("sample", "run the adaptive sampler");
    cmd_sample->add_option("--system", o.system_path, "polynomial system file")->required();
    cmd_sample->add_option("--dim", o.dim, "variety dimension (default: num_vars - num_polys)");
    cmd_sample->add_option("--seed", o.seed, "random seed");
    cmd_sample->add_option("--box", o.box, "bounding box lo1,hi1,lo2,hi2,...")
        ->required()
        ->delimiter(',');
    cmd_sample->add_option("--epsilon", o.epsilon, "sampling density")->required();
    cmd_sample->add_option("--delta", o.delta, "estimation error (0 <= delta <= epsilon)");
    cmd_sample->add_option("--workers", o.workers, "concurrent MinDistance calls");
    cmd_sample->add_option("--backend", o.backend, "internal | path to external solver");
    cmd_sample->add_option("--out", o.out_dir, "output directory");
    cmd_sample->add_flag("--dynamic-split", o.dynamic_split, "dynamic box splitting heuristic");
    cmd_sample->add_option("--dynamic-sample", o.dynamic_sample_rho,
                           "refuse points closer than rho to the sample (weakens the "
                           "certificate to (delta, epsilon+rho))");
    cmd_sample->add_flag("--priority-search", o.priority_search,
                         "search largest boxes first within a depth level");
    cmd_sample->add_option("--resume", o.resume, "resume from a checkpoint file");

    // --- persist ----------------------------------------------------------
    std::string sample_csv;
    auto* cmd_persist = app.add_subcommand("persist", "Vietoris-Rips persistence of a sample");
    cmd_persist->add_option("--sample", sample_csv, "sample CSV")->required();
    cmd_persist->add_option("--tmax", o.tmax, "filtration threshold (default 4*eps+2*delta)");
    cmd_persist->add_option("--pmax", o.pmax, "maximum homology dimension");
    cmd_persist->add_option("--out", o.out_dir, "output directory");

    // --- infer ------------------------------------------------------------
    std::string diagram_csv;
    double infer_eps = -1.0, infer_delta = -1.0;
    int infer_n = -1;
    auto* cmd_infer = app.add_subcommand("infer", "Betti lower bounds via the corner test");
    cmd_infer->add_option("--diagram", diagram_csv, "diagram CSV")->required();
    cmd_infer->add_option("--n", infer_n, "ambient dimension (default: from diagram)");
    cmd_infer->add_option("--epsilon", infer_eps, "sample density (default: from diagram)");
    cmd_infer->add_option("--delta", infer_delta, "sample accuracy (default: from diagram)");
    cmd_infer->add_option("--out", o.out_dir, "output directory");

    // --- subsample ----------------------------------------------------------
    double sub_r = 0.0;
    auto* cmd_subsample = app.add_subcommand("subsample", "greedy thinning of a sample");
    cmd_subsample->add_option("--sample", sample_csv, "sample CSV")->required();
    cmd_subsample->add_option("--r", sub_r, "thinning radius")->required();
    cmd_subsample->add_option("--seed", o.seed, "random seed");
    cmd_subsample->add_option("--out", o.out_dir, "output directory");

    // --- verify -------------------------------------------------------------
    std::string oracle_csv;
    auto* cmd_verify = app.add_subcommand("verify", "check a sample against an oracle cloud");
    cmd_verify->add_option("--sample", sample_csv, "sample CSV")->required();
    cmd_verify->add_option("--system", o.system_path, "polynomial system file")->required();
    cmd_verify->add_option("--dim", o.dim, "variety dimension");
    cmd_verify->add_option("--oracle", oracle_csv, "oracle point CSV (one point per line)")
        ->required();

    // --- solve-square (wire-format endpoint usable as an external backend) ----
    std::string sq_in, sq_out;
    auto* cmd_solve = app.add_subcommand(
        "solve-square", "solve a square system from JSON (external-backend wire format)");
    cmd_solve->add_option("input", sq_in, "input JSON")->required();
    cmd_solve->add_option("output", sq_out, "output JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(cmd_sample)) {
            polysys::PolynomialSystem sys;
            try {
                sys = load_system(o.system_path, o.dim, o.seed);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "error: %s\n", e.what());
                return kParseFailure;
            }
            sampler::SamplerConfig cfg;
            cfg.epsilon = o.epsilon;
            cfg.delta = o.delta;
            cfg.region = parse_box(o.box, sys.num_vars());
            cfg.seed = o.seed;
            cfg.workers = o.workers;
            cfg.heuristics.dynamic_split = o.dynamic_split;
            cfg.heuristics.priority_search = o.priority_search;
            if (o.dynamic_sample_rho) {
                cfg.heuristics.dynamic_sample = true;
                cfg.heuristics.rho = *o.dynamic_sample_rho;
            }
            fs::create_directories(o.out_dir);
            cfg.checkpoint_path = o.out_dir + "/checkpoint.json";
            auto backend = make_backend(o.backend);

            sampler::SampleCloud cloud;
            try {
                cloud = sampler::sample(sys, cfg, backend.get(), o.resume);
            } catch (const sampler::SamplerAbort& e) {
                std::fprintf(stderr, "error: %s\n", e.what());
                if (!e.checkpoint_path.empty())
                    std::fprintf(stderr, "resumable checkpoint: %s\n",
                                 e.checkpoint_path.c_str());
                return kInterruptedWithCheckpoint;
            }
            io::write_sample_csv(cloud, o.out_dir + "/sample.csv");
            std::printf("sample: %zu points, %zu MinDistance calls, depth %d\n",
                        cloud.points.size(), cloud.certificate.mindist_calls,
                        cloud.certificate.tree_depth);
            std::printf("certificate: (%.6g, %.6g)\n", cloud.certificate.delta,
                        cloud.certificate.epsilon);
            if (cloud.variety_empty)
                std::printf("V_R empty: no real point of the variety meets the region\n");
            std::printf("wrote %s/sample.csv\n", o.out_dir.c_str());
            return kOk;
        }

        if (app.got_subcommand(cmd_persist)) {
            auto cloud = io::read_sample_csv(sample_csv);
            double tmax = o.tmax > 0
                              ? o.tmax
                              : 4 * cloud.certificate.epsilon + 2 * cloud.certificate.delta;
            std::vector<Eigen::VectorXd> pts;
            pts.reserve(cloud.points.size());
            for (const auto& p : cloud.points) pts.push_back(p.x);
            tda::PersistenceDiagram diag;
            std::size_t total = 0;
            try {
                auto fc = tda::FiltrationComplex::rips(pts, tmax, o.pmax);
                total = fc.total_count();
                diag = tda::compute_persistence(fc);
            } catch (const tda::SimplexCapError& e) {
                std::fprintf(stderr, "error: %s\n", e.what());
                return kSimplexCap;
            }
            diag.ambient_dim = static_cast<int>(cloud.var_names.size());
            if (diag.ambient_dim == 0 && !pts.empty())
                diag.ambient_dim = static_cast<int>(pts.front().size());
            diag.epsilon = cloud.certificate.epsilon;
            diag.delta = cloud.certificate.delta;
            fs::create_directories(o.out_dir);
            tda::write_diagram_csv(diag, o.out_dir + "/diagram.csv");
            std::printf("persistence: %zu simplices, %zu diagram points (threshold %.6g, "
                        "pmax %d)\n",
                        total, diag.points.size(), tmax, o.pmax);
            std::printf("wrote %s/diagram.csv\n", o.out_dir.c_str());
            return kOk;
        }

        if (app.got_subcommand(cmd_infer)) {
            auto diag = tda::read_diagram_csv(diagram_csv);
            int n = infer_n > 0 ? infer_n : diag.ambient_dim;
            double eps = infer_eps >= 0 ? infer_eps : diag.epsilon;
            double delta = infer_delta >= 0 ? infer_delta : diag.delta;
            if (n < 1) {
                std::fprintf(stderr, "error: ambient dimension unknown; pass --n\n");
                return kUsage;
            }
            auto verdict = tda::infer_betti(diag, n, eps, delta);
            print_verdict(verdict);
            write_verdict_files(diag, verdict, o.out_dir);
            std::printf("wrote %s/verdict.txt and %s/diagram.svg\n", o.out_dir.c_str(),
                        o.out_dir.c_str());
            return kOk;
        }

        if (app.got_subcommand(cmd_subsample)) {
            auto cloud = io::read_sample_csv(sample_csv);
            auto thin = sampler::subsample(cloud, sub_r, o.seed);
            fs::create_directories(o.out_dir);
            io::write_sample_csv(thin, o.out_dir + "/subsample.csv");
            std::printf("subsample: %zu -> %zu points, certificate (%.6g, %.6g)\n",
                        cloud.points.size(), thin.points.size(), thin.certificate.delta,
                        thin.certificate.epsilon);
            std::printf("wrote %s/subsample.csv\n", o.out_dir.c_str());
            return kOk;
        }

        if (app.got_subcommand(cmd_verify)) {
            polysys::PolynomialSystem sys;
            try {
                sys = load_system(o.system_path, o.dim, o.seed);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "error: %s\n", e.what());
                return kParseFailure;
            }
            auto cloud = io::read_sample_csv(sample_csv);
            auto oracle_cloud = io::read_sample_csv(oracle_csv);
            std::vector<Eigen::VectorXd> oracle;
            oracle.reserve(oracle_cloud.points.size());
            for (const auto& p : oracle_cloud.points) oracle.push_back(p.x);
            auto report = sampler::verify_sample(cloud, sys, oracle);
            std::printf("%s\n", report.detail.c_str());
            return report.pass ? kOk : kSolverFailure;
        }

        if (app.got_subcommand(cmd_solve)) {
            nlohmann::json j = nlohmann::json::parse(io::read_file(sq_in));
            auto square = mindist::square_system_from_json(io::read_file(sq_in));
            std::uint64_t seed = j.value("seed", std::uint64_t{0});
            homotopy::TrackerConfig tcfg;
            tcfg.endpoint_tol = j.value("endpoint_tol", tcfg.endpoint_tol);
            auto td = homotopy::total_degree_start(square, seed);
            homotopy::Homotopy h(td.system, square);
            auto ends = homotopy::track_all(h, td.solutions, tcfg, 1);
            std::ofstream out(sq_out);
            if (!out) throw std::runtime_error("cannot write " + sq_out);
            out << mindist::endpoints_to_json(ends);
            return kOk;
        }
    } catch (const polysys::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kParseFailure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kSolverFailure;
    }
    return kUsage;
}
