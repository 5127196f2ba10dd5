#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "mirrorchain/cli.hpp"
#include "mirrorchain/linalg.hpp"

namespace mirrorchain::cli {

std::string version() { return MIRRORCHAIN_VERSION; }

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> failures(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const auto threads = static_cast<std::size_t>(std::max(1, jobs));
    if (threads == 1 || count <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(threads, count); ++t) pool.emplace_back(worker);
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
}

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("/output/dir", "cannot write " + path.string());
    out << text;
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Json report_header(const char* command, const ExperimentConfig& config) {
    Json j;
    j["tool"] = "mirrorchain";
    j["version"] = version();
    j["command"] = command;
    Json resolved = config.resolved();
    j["tolerances"] = resolved["tolerances"];
    j["config"] = std::move(resolved);
    return j;
}

struct Solved {
    EncodingPair pair;
    ConstraintSet constraints;
    std::vector<int> attempts;
};

Solved solve_analytic(const ChainSpec& spec, std::span<const SystematicError> errors, const ExperimentConfig& config,
                      std::optional<int> region_size) {
    const SolveOptions options{config.encoding.eta_allowed, config.tolerances.null_space};
    if (region_size) {
        ConstraintSet constraints = assemble_constraints(spec, errors, *region_size, options.eta_allowed);
        EncodingPair pair = solve_encoding(constraints, options);
        return Solved{std::move(pair), std::move(constraints), {*region_size}};
    }
    SizedEncoding sized = solve_auto(spec, errors, options, config.max_region());
    return Solved{std::move(sized.pair), std::move(sized.constraints), std::move(sized.attempts)};
}

struct Built {
    ProtectedCode code;
    int kernel_dimension = 0;
};

Built build_code(const EncodingPair& pair, std::span<const SystematicError> errors, const ChainSpec& spec,
                 const Tolerances& tol) {
    VacuumResult vacuum = vacuum_state(pair, spec, tol.vacuum_rank);
    return Built{build_protected_code(pair, vacuum.state, errors, spec, tol.gram_schmidt, tol.joint_orthonormality),
                 vacuum.kernel_dimension};
}

struct Sample {
    Amplitudes amps;
    ProtocolReport report;
};

std::vector<Sample> run_samples(const ExperimentConfig& config, const Evolver& evolver, const ProtectedCode& code,
                                std::span<const SystematicError> errors, int jobs) {
    std::vector<Sample> samples(static_cast<std::size_t>(config.pipeline.samples));
    parallel_for(samples.size(), jobs, [&](std::size_t i) {
        samples[i].amps = config.pipeline.fixed ? *config.pipeline.fixed : sample_amplitudes(config.pipeline.seed, i);
        samples[i].report = run_protocol(samples[i].amps, evolver, code, errors);
    });
    return samples;
}

struct SampleSummary {
    double min_fidelity = 1.0;
    double mean_fidelity = 0.0;
    double min_baseline = 1.0;
    double max_baseline = 0.0;
    std::size_t annihilated = 0;
};

SampleSummary summarize(const std::vector<Sample>& samples) {
    SampleSummary s;
    for (const auto& x : samples) {
        s.min_fidelity = std::min(s.min_fidelity, x.report.fidelity);
        s.mean_fidelity += x.report.fidelity / static_cast<double>(samples.size());
        s.min_baseline = std::min(s.min_baseline, x.report.baseline_fidelity);
        s.max_baseline = std::max(s.max_baseline, x.report.baseline_fidelity);
        if (x.report.annihilated()) ++s.annihilated;
    }
    return s;
}

Json samples_json(const std::vector<Sample>& samples) {
    Json list = Json::array();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        Json entry;
        entry["index"] = i;
        entry["alpha"] = complex_to_json(samples[i].amps.alpha);
        entry["beta"] = complex_to_json(samples[i].amps.beta);
        entry.update(to_json(samples[i].report));
        list.push_back(std::move(entry));
    }
    return list;
}

std::string samples_csv(const std::vector<Sample>& samples) {
    std::string csv = "index,alpha_re,alpha_im,beta_re,beta_im,fidelity,baseline_fidelity\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        csv += std::to_string(i) + "," + fmt(s.amps.alpha.real()) + "," + fmt(s.amps.alpha.imag()) + "," +
               fmt(s.amps.beta.real()) + "," + fmt(s.amps.beta.imag()) + "," + fmt(s.report.fidelity) + "," +
               fmt(s.report.baseline_fidelity) + "\n";
    }
    return csv;
}

Json code_json(const Solved& solved, const Built& built) {
    Json j;
    j["D"] = solved.pair.region_size;
    j["attempts"] = solved.attempts;
    j["constraint_rows"] = solved.constraints.row_count();
    j["kernel_dimension"] = built.kernel_dimension;
    j["z"] = built.code.decoder.z;
    j["unitarity_residual"] = built.code.decoder.unitarity_residual();
    j["gram_cross_norm"] = built.code.logical.cross_gram_norm();
    j["gram_mismatch"] = built.code.logical.gram_mismatch();
    j["pair"] = to_json(solved.pair);
    return j;
}

Json summary_json(const SampleSummary& s, std::size_t count, bool passed) {
    return Json{{"samples", count},
                {"min_fidelity", s.min_fidelity},
                {"mean_fidelity", s.mean_fidelity},
                {"min_baseline_fidelity", s.min_baseline},
                {"max_baseline_fidelity", s.max_baseline},
                {"annihilated_samples", s.annihilated},
                {"passed", passed}};
}

void warn_annihilated(const SampleSummary& s, const RunContext& ctx) {
    if (s.annihilated > 0) {
        *ctx.err << "warning: the errors annihilate the encoded state in " << s.annihilated
                 << " sample(s); nothing reaches the decoder\n";
    }
}

int insufficient(const InsufficientRegion& e, Json report, const RunContext& ctx, const char* file) {
    report["status"] = "insufficient_region";
    report["reached_D"] = e.region_size();
    report["null_dimension"] = e.null_dimension();
    report["message"] = e.what();
    write_json(ctx.out_dir / file, report);
    *ctx.err << "insufficient region: reached D = " << e.region_size() << " (" << e.what() << ")\n";
    return kCapacity;
}

// Largest relative distance of the analytic constraint rows from the row
// span of the probe-derived rows.
double containment_residual(const ConstraintSet& analytic, const ConstraintSet& probe) {
    if (analytic.epsilon_rows.rows() == 0) return 0.0;
    const CMatrix basis = orthonormal_span(probe.epsilon_rows.transpose(), 1e-10);
    return max_relative_residual(basis, analytic.epsilon_rows.transpose());
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_verify_chain(const ExperimentConfig& config, const RunContext& ctx) {
    Json report = report_header("verify-chain", config);
    try {
        const PstCheck check = check_pst(config.chain, config.tolerances.pst);
        report["pst"] = true;
        report["phase"] = check.phase;
        report["worst_deviation"] = check.worst_deviation;
        report["worst_site"] = check.worst_site;
        write_json(ctx.out_dir / "verify_chain.json", report);
        *ctx.out << "PST ok: phi = " << fmt(check.phase) << ", worst mirror deviation = " << fmt(check.worst_deviation)
                 << " (site " << check.worst_site << ")\n";
        return kSuccess;
    } catch (const NotPstError& e) {
        report["pst"] = false;
        report["worst_deviation"] = e.deviation();
        report["worst_site"] = e.worst_site();
        write_json(ctx.out_dir / "verify_chain.json", report);
        *ctx.out << "not PST: worst mirror deviation = " << fmt(e.deviation()) << " (site " << e.worst_site() << ")\n";
        return kVerificationFailure;
    }
}

int cmd_protect(const ExperimentConfig& config, const RunContext& ctx) {
    const ChainSpec spec = config.chain.with_transfer_phase(verify_pst(config.chain, config.tolerances.pst));
    Json report = report_header("protect", config);
    Solved solved;
    try {
        solved = solve_analytic(spec, config.errors, config, config.encoding.region_size);
    } catch (const InsufficientRegion& e) {
        return insufficient(e, std::move(report), ctx, "report.json");
    }
    const Built built = build_code(solved.pair, config.errors, spec, config.tolerances);
    const Evolver evolver(spec);
    const auto samples = run_samples(config, evolver, built.code, config.errors, ctx.jobs);
    const SampleSummary s = summarize(samples);
    const bool passed = s.min_fidelity >= 1.0 - config.tolerances.fidelity;

    report["status"] = "ok";
    report["encoding"] = code_json(solved, built);
    report["summary"] = summary_json(s, samples.size(), passed);
    report["samples"] = samples_json(samples);
    write_json(ctx.out_dir / "report.json", report);
    write_text(ctx.out_dir / "fidelities.csv", samples_csv(samples));
    *ctx.out << "D = " << solved.pair.region_size << ", z = " << built.code.decoder.z
             << ", min fidelity = " << fmt(s.min_fidelity) << ", baseline in [" << fmt(s.min_baseline) << ", "
             << fmt(s.max_baseline) << "]: " << (passed ? "PASS" : "FAIL") << "\n";
    warn_annihilated(s, ctx);
    return passed ? kSuccess : kVerificationFailure;
}

int cmd_probe_protect(const ExperimentConfig& config, const RunContext& ctx) {
    const ChainSpec spec = config.chain.with_transfer_phase(verify_pst(config.chain, config.tolerances.pst));
    Json report = report_header("probe-protect", config);

    std::vector<int> sizes;
    if (config.encoding.region_size) {
        sizes.push_back(*config.encoding.region_size);
    } else {
        for (int d = std::max(2, affected_count(config.errors) + 2); d <= config.max_region(); ++d) sizes.push_back(d);
    }
    if (sizes.empty()) {
        const int start = std::max(2, affected_count(config.errors) + 2);
        return insufficient(InsufficientRegion("D = " + std::to_string(start) + " exceeds the cap of " +
                                                   std::to_string(config.max_region()),
                                               start, 0),
                            std::move(report), ctx, "report.json");
    }

    ProbeOptions options;
    options.eigen_tol = config.tolerances.probe_eigen;
    options.min_weight = config.tolerances.probe_weight;
    if (config.probe.sampled) options.tomography.shots = config.probe.shots;

    Solved solved;
    ProbeReport vacuum_probe;
    ProbeReport filled_probe;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        const int d = sizes[k];
        solved.attempts.push_back(d);
        options.tomography.seed = config.pipeline.seed;
        vacuum_probe = probe_with_vacuum(spec, config.errors, d, options);
        options.tomography.seed = config.pipeline.seed + 1;
        filled_probe = probe_with_filled(spec, config.errors, d, options);
        solved.constraints = spans_to_constraints(vacuum_probe, filled_probe);
        try {
            solved.pair = solve_encoding(solved.constraints, SolveOptions{false, config.tolerances.null_space});
            break;
        } catch (const InsufficientRegion& e) {
            if (k + 1 == sizes.size()) return insufficient(e, std::move(report), ctx, "report.json");
        }
    }
    const int d = solved.pair.region_size;
    const ConstraintSet analytic = assemble_constraints(spec, config.errors, d, false);
    const double containment = containment_residual(analytic, solved.constraints);
    const bool contained = containment <= config.tolerances.containment;

    const Built built = build_code(solved.pair, config.errors, spec, config.tolerances);
    const Evolver evolver(spec);
    const auto samples = run_samples(config, evolver, built.code, config.errors, ctx.jobs);
    const SampleSummary s = summarize(samples);
    const bool passed = s.min_fidelity >= 1.0 - config.tolerances.fidelity;

    Json probe;
    probe["D"] = d;
    probe["span_dimensions"] = Json{{"vacuum", vacuum_probe.span.cols()}, {"filled", filled_probe.span.cols()}};
    probe["containment_residual"] = containment;
    probe["contained"] = contained;
    probe["tomography"] = Json{{"mode", config.probe.sampled ? "sampled" : "exact"},
                               {"shots", config.probe.sampled ? Json(config.probe.shots) : Json(nullptr)},
                               {"vacuum_residual", vacuum_probe.tomography_residual},
                               {"filled_residual", filled_probe.tomography_residual}};
    probe["vacuum"] = to_json(vacuum_probe);
    probe["filled"] = to_json(filled_probe);

    // Analytic path at the same D for comparison, when it exists.
    Json comparison = nullptr;
    try {
        const Solved reference = solve_analytic(spec, config.errors, config, d);
        const Built reference_code = build_code(reference.pair, config.errors, spec, config.tolerances);
        const auto reference_samples = run_samples(config, evolver, reference_code.code, config.errors, ctx.jobs);
        double gap = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            gap = std::max(gap, std::abs(samples[i].report.fidelity - reference_samples[i].report.fidelity));
        }
        comparison = Json{{"min_fidelity", summarize(reference_samples).min_fidelity}, {"max_fidelity_gap", gap}};
    } catch (const InsufficientRegion&) {
    }
    probe["analytic"] = comparison;

    report["status"] = "ok";
    report["probe"] = std::move(probe);
    report["encoding"] = code_json(solved, built);
    report["summary"] = summary_json(s, samples.size(), passed);
    report["samples"] = samples_json(samples);
    write_json(ctx.out_dir / "report.json", report);
    write_text(ctx.out_dir / "fidelities.csv", samples_csv(samples));
    *ctx.out << "probe spans: vacuum " << vacuum_probe.span.cols() << ", filled " << filled_probe.span.cols()
             << "; D = " << d << ", containment residual = " << fmt(containment) << ", min fidelity = "
             << fmt(s.min_fidelity) << ": " << (passed ? "PASS" : "FAIL") << "\n";
    if (!contained) *ctx.err << "warning: analytic constraints are not contained in the probe span\n";
    warn_annihilated(s, ctx);
    return passed ? kSuccess : kVerificationFailure;
}

int cmd_sweep(const ExperimentConfig& config, const RunContext& ctx) {
    if (!config.sweep) throw SchemaError("/sweep", "missing required key");
    const SweepSettings& sweep = *config.sweep;
    const ChainSpec spec = config.chain.with_transfer_phase(verify_pst(config.chain, config.tolerances.pst));
    const Evolver evolver(spec);

    struct Row {
        int region_size = 0;
        std::string status;
        std::optional<SampleSummary> summary;
    };
    std::vector<Row> rows(sweep.values.size());
    parallel_for(rows.size(), ctx.jobs, [&](std::size_t i) {
        std::vector<SystematicError> errors = config.errors;
        std::optional<int> region = config.encoding.region_size;
        if (sweep.axis == "time_fraction") {
            for (auto& e : errors) e.time = sweep.values[i] * spec.transfer_time();
        } else {
            region = static_cast<int>(sweep.values[i]);
        }
        Row& row = rows[i];
        try {
            const Solved solved = solve_analytic(spec, errors, config, region);
            row.region_size = solved.pair.region_size;
            const Built built = build_code(solved.pair, errors, spec, config.tolerances);
            row.summary = summarize(run_samples(config, evolver, built.code, errors, 1));
            row.status = row.summary->annihilated > 0 ? "annihilated" : "ok";
        } catch (const InsufficientRegion& e) {
            row.region_size = e.region_size();
            row.status = "insufficient_region";
        } catch (const DecoderConstructionError&) {
            row.status = "decoder_failure";
        }
    });

    std::string csv = "index,axis,value,D,status,min_fidelity,min_baseline_fidelity,max_baseline_fidelity\n";
    Json points = Json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        csv += std::to_string(i) + "," + sweep.axis + "," + fmt(sweep.values[i]) + "," + std::to_string(r.region_size) +
               "," + r.status;
        Json point{{"index", i}, {"value", sweep.values[i]}, {"D", r.region_size}, {"status", r.status}};
        if (r.summary) {
            csv += "," + fmt(r.summary->min_fidelity) + "," + fmt(r.summary->min_baseline) + "," +
                   fmt(r.summary->max_baseline);
            point["min_fidelity"] = r.summary->min_fidelity;
            point["min_baseline_fidelity"] = r.summary->min_baseline;
            point["max_baseline_fidelity"] = r.summary->max_baseline;
        } else {
            csv += ",,,";
        }
        csv += "\n";
        points.push_back(std::move(point));
    }
    Json report = report_header("sweep", config);
    report["axis"] = sweep.axis;
    report["points"] = std::move(points);
    write_json(ctx.out_dir / "sweep.json", report);
    write_text(ctx.out_dir / "sweep.csv", csv);
    *ctx.out << "sweep over " << sweep.axis << ": " << rows.size() << " points written to "
             << (ctx.out_dir / "sweep.csv").string() << "\n";
    return kSuccess;
}

// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Perfect state transfer on engineered spin chains with systematic-error protection"};
    app.set_version_flag("--version", version());
    app.require_subcommand(1, 1);

    std::string config_path;
    int jobs = 1;
    std::string out_dir;
    const std::vector<std::pair<const char*, const char*>> commands{
        {"verify-chain", "check the chain for perfect state transfer"},
        {"protect", "solve the encoding analytically and run the protocol"},
        {"probe-protect", "identify the error modes by probing, then protect"},
        {"sweep", "run the protocol over a grid of one parameter"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsage;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        const ExperimentConfig config = load_config(config_path, seed_from_environment());
        RunContext ctx;
        ctx.jobs = jobs;
        ctx.out_dir = !out_dir.empty() ? out_dir : config.output_dir.value_or(".");
        ctx.out = &out;
        ctx.err = &err;
        std::error_code ec;
        std::filesystem::create_directories(ctx.out_dir, ec);
        if (ec) throw SchemaError("/output/dir", "cannot create " + ctx.out_dir.string() + ": " + ec.message());

        if (command == "verify-chain") return cmd_verify_chain(config, ctx);
        if (command == "protect") return cmd_protect(config, ctx);
        if (command == "probe-protect") return cmd_probe_protect(config, ctx);
        return cmd_sweep(config, ctx);
    } catch (const SchemaError& e) {
        err << "config error at " << (e.pointer().empty() ? "/" : e.pointer()) << ": "
            << std::string(e.what()).substr(e.pointer().size() + 2) << "\n";
        return kUsage;
    } catch (const InsufficientRegion& e) {
        err << "insufficient region: reached D = " << e.region_size() << " (" << e.what() << ")\n";
        return kCapacity;
    } catch (const ResourceLimit& e) {
        err << "capacity exceeded: " << e.what() << "\n";
        return kCapacity;
    } catch (const NotPstError& e) {
        err << "chain is not PST: " << e.what() << "\n";
        return kVerificationFailure;
    } catch (const InconsistentPair& e) {
        err << "verification failed: " << e.what() << "\n";
        return kVerificationFailure;
    } catch (const DecoderConstructionError& e) {
        err << "verification failed: " << e.what() << "\n";
        return kVerificationFailure;
    } catch (const UnsupportedError& e) {
        err << "unsupported: " << e.what() << "\n";
        return kUsage;
    } catch (const InvalidArgument& e) {
        err << "invalid input: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kVerificationFailure;
    }
}

}  // namespace mirrorchain::cli
