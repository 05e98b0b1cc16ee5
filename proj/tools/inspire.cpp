#include <csignal>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "inspire/errors.hpp"
#include "inspire/harness.hpp"
#include "inspire/png_codec.hpp"
#include "inspire/problem.hpp"
#include "inspire/serialization.hpp"
#include "inspire/service.hpp"

namespace {

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  const auto text = inspire::read_text_file(path);
  return {text.begin(), text.end()};
}

void write_png(const std::string& path, const inspire::ImageBuffer& img) {
  const auto bytes = inspire::encode_png(img);
  inspire::write_text_file(path, std::string(bytes.begin(), bytes.end()));
}

void print_report(const inspire::Report& report) {
  std::printf("%-10s %14s %14s %14s\n", "optimizer", "median_final", "q1", "q3");
  for (const auto& name : report.ranking)
    for (const auto& s : report.optimizers)
      if (s.optimizer == name)
        std::printf("%-10s %14.6g %14.6g %14.6g\n", name.c_str(), s.median_final, inspire::quantile(s.final_best, 0.25),
                    inspire::quantile(s.final_best, 0.75));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-space image retrieval toolkit"};
  app.require_subcommand(1);

  std::string generator = "mlp", optimizer = "lbfgs", criterion = "l2+vgg", regime = "reconstruction";
  std::string target_path, out_path, csv_path, spec_path, host = "127.0.0.1", journal;
  std::int64_t budget = 2000;
  std::uint64_t seed = 0;
  double step = 0.0;
  int port = 8080;

  auto* run = app.add_subcommand("run", "Run one optimizer against a target");
  run->add_option("--generator", generator, "Generator id")->capture_default_str();
  run->add_option("--optimizer", optimizer, "rs, adam, nesterov, lbfgs, dopo, es, 2pde, dde")->capture_default_str();
  run->add_option("--criterion", criterion, "l2, l2+vgg, vgg, vgg-nor")->capture_default_str();
  run->add_option("--budget", budget, "Budget in generator calls")->capture_default_str();
  run->add_option("--seed", seed, "Run seed")->capture_default_str();
  run->add_option("--target", target_path, "Target PNG (default: drawn from --regime)");
  run->add_option("--regime", regime, "Regime for a drawn target")->capture_default_str();
  run->add_option("--step", step, "Base step for gradient optimizers");
  run->add_option("--out", out_path, "Write run JSON here (default: stdout)");
  run->add_option("--csv", csv_path, "Also write the curve as CSV");

  auto* bench = app.add_subcommand("bench", "Run an experiment spec and report convergence");
  bench->add_option("--spec", spec_path, "Experiment spec JSON")->required();
  bench->add_option("--out", out_path, "Write report JSON here");
  bench->add_option("--csv", csv_path, "Write report CSV here");

  auto* target = app.add_subcommand("target", "Draw a target image");
  target->add_option("--regime", regime, "reconstruction, semi_specified, misspecified")->required();
  target->add_option("--seed", seed, "Target seed")->capture_default_str();
  target->add_option("--generator", generator, "Generator id")->capture_default_str();
  target->add_option("--out", out_path, "Output PNG")->required();

  auto* serve = app.add_subcommand("serve", "Start the HTTP service");
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--port", port, "Port")->capture_default_str();
  serve->add_option("--journal", journal, "Session journal directory");

  app.add_subcommand("generators", "List registered generators");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto registry = inspire::default_registry();
    if (*run) {
      const auto gen = registry.get(generator);
      inspire::ImageBuffer img;
      if (!target_path.empty()) {
        img = inspire::decode_png(read_bytes(target_path));
      } else {
        const auto spec = registry.spec_of(generator);
        if (!spec) throw inspire::ValidationError("generator has no toy spec; pass --target");
        img = inspire::make_target(inspire::parse_regime(regime), *spec, seed);
      }
      const auto weights = inspire::CriterionWeights::preset(criterion);
      const auto problem = inspire::make_problem(gen, std::move(img), weights);
      inspire::OptimizerSettings settings;
      if (step > 0.0) settings.gradient.base_step = step;
      const auto trace = inspire::run_optimizer(optimizer, problem, budget, seed, settings);
      const auto doc = inspire::dump_canonical(inspire::run_to_json(trace, weights.preset_name, budget));
      if (out_path.empty())
        std::cout << doc;
      else
        inspire::write_text_file(out_path, doc);
      if (!csv_path.empty()) inspire::write_text_file(csv_path, inspire::run_to_csv(trace));
      std::cerr << optimizer << " best_loss " << trace.best_loss() << "\n";
    } else if (*bench) {
      const auto spec = inspire::experiment_spec_from_json(inspire::parse_json(inspire::read_text_file(spec_path)));
      const auto report = inspire::run_experiment(spec, registry);
      if (!out_path.empty()) inspire::emit_report(report, inspire::ReportFormat::json, out_path);
      if (!csv_path.empty()) inspire::emit_report(report, inspire::ReportFormat::csv, csv_path);
      print_report(report);
    } else if (*target) {
      const auto spec = registry.spec_of(generator);
      if (!spec) throw inspire::ValidationError("generator has no toy spec");
      write_png(out_path, inspire::make_target(inspire::parse_regime(regime), *spec, seed));
    } else if (*serve) {
      inspire::ServiceOptions options;
      if (!journal.empty()) options.journal_dir = journal;
      inspire::Service service(registry, options);
      const int bound = service.bind(host, port);
      std::cerr << "listening on " << host << ":" << bound << "\n";
      service.listen();
    } else {
      for (const auto& id : registry.ids()) {
        const auto h = registry.get(id)->handle();
        std::printf("%-12s d=%-4zu side=%-3zu %s\n", id.c_str(), h.latent_dim, h.output_side,
                    h.differentiable ? "differentiable" : "black-box");
      }
    }
  } catch (const inspire::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
