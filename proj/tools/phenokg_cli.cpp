#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "phenokg/pipeline.hpp"
#include "phenokg/synth.hpp"

using namespace phenokg;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string fixtures_override;
    bool resume = false;
    int64_t seed_override = -1;
};

PipelineConfig load_config(const CommonOpts& opts) {
    PipelineConfig cfg = PipelineConfig::load(opts.config_path);
    if (!opts.fixtures_override.empty()) {
        cfg.fixtures_dir = opts.fixtures_override;
        cfg.backend_mode = "fixture";
    }
    if (opts.seed_override >= 0) cfg.seed = static_cast<uint64_t>(opts.seed_override);
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "pipeline config file")->required();
    cmd->add_option("--fixtures", opts.fixtures_override,
                    "fixture directory (forces fixture mode)");
    cmd->add_flag("--resume", opts.resume, "reuse stage artifacts that match the inputs");
    cmd->add_option("--seed", opts.seed_override, "override the root seed");
}

void print_warnings(const Pipeline& p) {
    for (const auto& msg : p.warnings().messages) std::cerr << "warning: " << msg << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phenotype-driven knowledge graph expansion pipeline"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string match_input;
    std::string gen_dir;
    int64_t gen_seed = 7;

    struct StageCmd {
        const char* name;
        const char* help;
        void (Pipeline::*fn)();
    };
    const std::vector<StageCmd> stages = {
        {"ingest", "load, encode, build state graphs and embeddings", &Pipeline::ensure_ingest},
        {"cluster", "discover phenotypes and map to standard phenotypes", &Pipeline::ensure_cluster},
        {"causal", "fit per-phenotype causal graphs", &Pipeline::ensure_causal},
        {"bn", "fit per-phenotype Bayesian networks", &Pipeline::ensure_bn},
        {"hypothesize", "build phenotype states and PICO hypotheses", &Pipeline::ensure_hypothesize},
        {"retrieve", "retrieve and score literature per hypothesis", &Pipeline::ensure_retrieve},
        {"score", "extract claims and compute R/Y/NPS", &Pipeline::ensure_score},
        {"expand", "select the Pareto front and expand the knowledge graph", &Pipeline::ensure_expand},
    };

    std::map<std::string, CLI::App*> cmds;
    for (const auto& s : stages) {
        CLI::App* c = app.add_subcommand(s.name, s.help);
        add_common(c, opts);
        cmds[s.name] = c;
    }

    CLI::App* run_cmd = app.add_subcommand("run", "run all stages and write the manifest");
    add_common(run_cmd, opts);

    CLI::App* report_cmd = app.add_subcommand("report", "write report tables and charts");
    add_common(report_cmd, opts);

    CLI::App* match_cmd =
        app.add_subcommand("match", "process new states through the online path");
    add_common(match_cmd, opts);
    match_cmd->add_option("--input", match_input, "CSV of new states")->required();

    CLI::App* gen_cmd = app.add_subcommand(
        "make-fixtures", "generate the bundled synthetic dataset, config and fixtures");
    gen_cmd->add_option("dir", gen_dir, "workspace directory")->required();
    gen_cmd->add_option("--seed", gen_seed, "pipeline seed baked into the config");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_cmd->parsed()) {
            synth::write_golden_workspace(gen_dir, static_cast<uint64_t>(gen_seed));
            std::cout << "workspace written to " << gen_dir << "\n"
                      << "run: phenokg run --config " << gen_dir << "/config.json\n";
            return 0;
        }

        PipelineConfig cfg = load_config(opts);
        Pipeline p(cfg);

        if (run_cmd->parsed()) {
            RunManifest m = p.run(opts.resume);
            print_warnings(p);
            std::cout << "run complete; manifest at " << cfg.output_dir << "/manifest.json\n";
            for (const auto& s : m.stages)
                std::cout << "  " << s.name << (s.resumed ? " (resumed) " : " ") << s.artifact
                          << " sha256=" << s.sha256.substr(0, 12) << "\n";
            return 0;
        }
        if (report_cmd->parsed()) {
            p.write_report();
            print_warnings(p);
            std::cout << "report written under " << cfg.output_dir << "/report\n";
            return 0;
        }
        if (match_cmd->parsed()) {
            auto summary = p.match_states(match_input);
            print_warnings(p);
            std::cout << "processed " << summary.states << " states: " << summary.matches
                      << " match, " << summary.soft_matches << " soft_match, "
                      << summary.anomalies << " anomaly, " << summary.promotions
                      << " promoted\n"
                      << "decisions at " << summary.decisions_path << "\n";
            return 0;
        }
        for (const auto& s : stages) {
            if (cmds[s.name]->parsed()) {
                // stage subcommands reuse valid upstream artifacts; the
                // requested stage itself recomputes unless --resume is given
                p.set_reuse(true);
                if (!opts.resume) {
                    std::error_code ec;
                    std::filesystem::remove(p.artifact_path(s.name), ec);
                }
                (p.*(s.fn))();
                print_warnings(p);
                std::cout << s.name << " complete; artifact at "
                          << p.artifact_path(s.name) << "\n";
                return 0;
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const StageFailure& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
