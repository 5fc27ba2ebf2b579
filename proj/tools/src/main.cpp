#include <iostream>
#include <list>
#include <map>
#include <type_traits>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

namespace {

using kolmo::cli::ConfigError;
using kolmo::cli::RunConfig;

// One command-line flag mirroring one config key. Values are kept as text and
// applied after the config file is loaded, so flags override the file.
struct Binding {
  std::string section;
  std::string key;
  bool is_bool = false;
  std::string text;
  bool flag = false;
  CLI::Option* opt = nullptr;
};

struct StageCommand {
  std::string section;
  CLI::App* app = nullptr;
  std::string config_path;
  std::list<Binding> bindings;
};

void bind_stage(CLI::App& parent, const std::string& name, const std::string& section, const std::string& help,
                std::list<StageCommand>& out) {
  auto& cmd = out.emplace_back();
  cmd.section = section;
  cmd.app = parent.add_subcommand(name, help);
  cmd.app->add_option("--config", cmd.config_path, "Config file; flags override its values");
  RunConfig defaults;
  const auto values = kolmo::cli::section_values(defaults, section);
  defaults.sections([&](const char* sec, auto& rec) {
    if (section != sec) return;
    rec.visit([&](const char* key, auto& field) {
      auto& b = cmd.bindings.emplace_back();
      b.section = section;
      b.key = key;
      const std::string def = "default: " + values.at(key);
      if constexpr (std::is_same_v<std::remove_cvref_t<decltype(field)>, bool>) {
        b.is_bool = true;
        b.opt = cmd.app->add_flag("--" + b.key + ",!--no-" + b.key, b.flag, def);
      } else {
        b.opt = cmd.app->add_option("--" + b.key, b.text, def);
      }
    });
  });
}

RunConfig stage_config(StageCommand& cmd) {
  RunConfig cfg = cmd.config_path.empty() ? RunConfig{} : kolmo::cli::load_config(cmd.config_path);
  for (const auto& b : cmd.bindings) {
    if (b.opt->count() == 0) continue;
    kolmo::cli::set_value(cfg, b.section, b.key, b.is_bool ? (b.flag ? "true" : "false") : b.text);
  }
  return cfg;
}

void apply_sets(RunConfig& cfg, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    const auto dot = s.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ConfigError("--set expects section.key=value, got '" + s + "'");
    kolmo::cli::set_value(cfg, s.substr(0, dot), s.substr(dot + 1, eq - dot - 1), s.substr(eq + 1));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kolmogorov-flow reduced-order modeling toolkit"};
  app.set_version_flag("--version", kolmo::cli::kToolVersion);
  app.require_subcommand(1);

  std::list<StageCommand> stages;
  bind_stage(app, "simulate", "simulate", "Integrate the vorticity equation and save snapshots", stages);
  bind_stage(app, "reduce", "reduce", "Phase-align and optionally collapse discrete symmetries", stages);
  bind_stage(app, "pca", "pca", "PCA reconstruction error against truncation dimension", stages);
  bind_stage(app, "train-ae", "train-ae", "Train hybrid autoencoders and keep the best", stages);
  bind_stage(app, "encode", "encode", "Encode snapshots into a latent CSV", stages);
  bind_stage(app, "train-map", "train-map", "Train the latent time map", stages);
  bind_stage(app, "train-phase", "train-phase", "Train the phase-increment map", stages);
  bind_stage(app, "rollout", "rollout", "Iterate the latent maps from an initial condition", stages);
  bind_stage(app, "label", "label", "Label snapshots as quiescent or bursting", stages);
  auto* stats = app.add_subcommand("stats", "Statistics of true and predicted trajectories");
  stats->require_subcommand(1);
  bind_stage(*stats, "pdf", "stats-pdf", "Joint PDF matrices", stages);
  bind_stage(*stats, "kl", "stats-kl", "KL divergence between joint PDFs", stages);
  bind_stage(*stats, "durations", "stats-durations", "Quiescent and bursting interval durations", stages);
  bind_stage(*stats, "msd", "stats-msd", "Mean squared displacement of the phase", stages);
  bind_stage(*stats, "ensemble", "stats-ensemble", "Ensemble tracking error against lead time", stages);
  bind_stage(app, "predict-burst", "predict-burst", "SVM burst prediction against horizon", stages);

  auto* run = app.add_subcommand("run", "Run the stages listed in a config file");
  std::string run_config;
  std::vector<std::string> run_sets;
  run->add_option("--config", run_config, "Pipeline config")->required();
  run->add_option("--set", run_sets, "Override one value, as section.key=value");

  auto* replay_cmd = app.add_subcommand("replay", "Re-run the stage recorded in a manifest");
  std::string manifest;
  bool verify = false;
  replay_cmd->add_option("--manifest", manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
  replay_cmd->add_flag("--verify", verify, "Check input and output hashes");

  auto* dump = app.add_subcommand("config", "Print a config file with every default value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string current = "config";
  try {
    if (dump->parsed()) {
      RunConfig cfg;
      std::cout << kolmo::cli::to_text(cfg);
      return 0;
    }
    if (run->parsed()) {
      auto cfg = kolmo::cli::load_config(run_config);
      apply_sets(cfg, run_sets);
      kolmo::cli::run_pipeline(cfg, std::cerr);
      return 0;
    }
    if (replay_cmd->parsed()) {
      current = "replay";
      return kolmo::cli::replay(manifest, verify, std::cerr) ? 0 : 1;
    }
    for (auto& cmd : stages) {
      if (!cmd.app->parsed()) continue;
      auto cfg = stage_config(cmd);
      kolmo::cli::run_stage(cfg, cmd.section, std::cerr);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "kolmo: config: " << e.what() << '\n';
    return 2;
  } catch (const kolmo::cli::StageError& e) {
    std::cerr << "kolmo: " << e.stage() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "kolmo: " << current << ": " << e.what() << '\n';
    return 1;
  }
  return 2;
}
