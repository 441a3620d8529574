// pcmsim: experiment driver for the PCM-crossbar Bayesian SNN emulator.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pcmsim/config.hpp"
#include "pcmsim/errors.hpp"
#include "pcmsim/experiments.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string mode = "hardware";
  std::string weights;
  std::string input;
};

pcmsim::ExperimentConfig resolve(const Options& opt) {
  auto cfg = pcmsim::load_config(opt.config);
  if (opt.seed) cfg.seed = *opt.seed;
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  if (!opt.weights.empty()) {
    if (!std::filesystem::exists(opt.weights)) {
      throw pcmsim::UsageError("--weights: file does not exist: " + opt.weights);
    }
    cfg.weights_path = opt.weights;
  }
  return cfg;
}

void print_paths(const std::vector<std::filesystem::path>& paths) {
  for (const auto& p : paths) std::printf("wrote %s\n", p.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PCM-crossbar emulator for Bayesian binary spiking networks"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Experiment config (JSON)")->required();
    sub->add_option("--seed", opt.seed, "Master seed; overrides the config");
    sub->add_option("--out", opt.out, "Output directory; overrides the config");
  };
  auto add_mode = [&](CLI::App* sub) {
    sub->add_option("--mode", opt.mode, "Inference mode")
        ->check(CLI::IsMember({"hardware", "fp32", "fxp8", "cm"}));
  };
  auto add_weights = [&](CLI::App* sub) {
    sub->add_option("--weights", opt.weights, "Bayesian weight file; trains when omitted");
  };

  auto* train = app.add_subcommand("train", "Train weights (--mode cm trains frequentist weights)");
  add_common(train);
  add_mode(train);

  auto* map = app.add_subcommand("map", "Program the crossbar and write a plane snapshot");
  add_common(map);
  add_weights(map);

  auto* infer = app.add_subcommand("infer", "Evaluate an ensemble on the test set");
  add_common(infer);
  add_mode(infer);
  infer->add_option("--input", opt.input, "Weight file or plane snapshot");

  auto* sweep = app.add_subcommand("sweep-l", "Accuracy and ECE over noise columns and ensemble sizes");
  add_common(sweep);
  add_weights(sweep);

  auto* moons = app.add_subcommand("two-moons-map", "Confidence over the two-moons grid");
  add_common(moons);
  add_weights(moons);
  add_mode(moons);

  auto* area = app.add_subcommand("area", "Transistor-count comparison");
  add_common(area);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    auto cfg = resolve(opt);
    const auto mode = pcmsim::parse_mode(opt.mode);
    if (*train) {
      print_paths(pcmsim::cmd_train(cfg, mode));
    } else if (*map) {
      print_paths(pcmsim::cmd_map(cfg));
    } else if (*infer) {
      std::optional<std::filesystem::path> input;
      if (!opt.input.empty()) input = opt.input;
      print_paths(pcmsim::cmd_infer(cfg, mode, input));
    } else if (*sweep) {
      print_paths(pcmsim::cmd_sweep_l(cfg));
    } else if (*moons) {
      if (moons->count("--mode") > 0) cfg.eval.mode = mode;
      print_paths(pcmsim::cmd_two_moons_map(cfg));
    } else if (*area) {
      print_paths(pcmsim::cmd_area(cfg));
    }
  } catch (const pcmsim::UsageError& e) {
    std::fprintf(stderr, "pcmsim: usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pcmsim: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
