#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "inspire/errors.hpp"
#include "inspire/serialization.hpp"

namespace inspire {

namespace {

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed ") + what + ": " + e.what());
  }
}

Json nullable(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_or_nan(const Json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

Json nullable_array(const std::vector<double>& values) {
  Json out = Json::array();
  for (double v : values) out.push_back(nullable(v));
  return out;
}

std::vector<double> nan_array(const Json& doc) {
  std::vector<double> out;
  for (const auto& v : doc) out.push_back(number_or_nan(v));
  return out;
}

std::string format_double(double v) {
  if (!std::isfinite(v)) return "";
  // Same shortest round-trip text the JSON writer produces.
  return Json(v).dump();
}

}  // namespace

std::string dump_canonical(const Json& doc) { return doc.dump(2) + "\n"; }

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
}

Json to_json(const ToySpec& spec) {
  Json dims;
  dims["latent_dim"] = spec.dims.latent_dim;
  dims["side"] = spec.dims.side;
  if (spec.kind == ToyKind::mlp) dims["hidden"] = spec.dims.hidden;
  if (spec.kind == ToyKind::conditioned) dims["class_groups"] = spec.dims.class_groups;
  Json doc;
  doc["kind"] = to_string(spec.kind);
  doc["seed"] = spec.seed;
  doc["dims"] = dims;
  if (spec.mix != 0.0) {
    doc["mix"] = spec.mix;
    doc["mix_seed"] = spec.mix_seed;
  }
  return doc;
}

ToySpec toy_spec_from_json(const Json& doc) {
  return guarded("toy spec", [&] {
    ToySpec spec;
    spec.kind = parse_toy_kind(doc.at("kind").get<std::string>());
    spec.seed = doc.at("seed").get<std::uint64_t>();
    const auto& dims = doc.at("dims");
    spec.dims.latent_dim = dims.at("latent_dim").get<std::size_t>();
    spec.dims.side = dims.at("side").get<std::size_t>();
    spec.dims.hidden = dims.value("hidden", spec.kind == ToyKind::mlp ? ToyDims{}.hidden : std::size_t{0});
    if (dims.contains("class_groups")) spec.dims.class_groups = dims["class_groups"].get<std::vector<std::size_t>>();
    spec.mix = doc.value("mix", 0.0);
    spec.mix_seed = doc.value("mix_seed", std::uint64_t{0});
    return spec;
  });
}

Json to_json(const CriterionWeights& weights) {
  Json doc;
  doc["lambda_L"] = weights.lambda_L;
  doc["lambda_S"] = weights.lambda_S;
  doc["lambda_nu"] = weights.lambda_nu;
  doc["lambda_R"] = weights.lambda_R;
  return doc;
}

CriterionWeights weights_from_json(const Json& doc) {
  return guarded("criterion weights", [&] {
    CriterionWeights w;
    w.lambda_L = doc.at("lambda_L").get<double>();
    w.lambda_S = doc.at("lambda_S").get<double>();
    w.lambda_nu = doc.at("lambda_nu").get<double>();
    w.lambda_R = doc.at("lambda_R").get<double>();
    w.validate();
    return w;
  });
}

Json run_to_json(const RunTrace& trace, const std::string& criterion, std::int64_t budget_units) {
  Json doc;
  doc["seed"] = trace.seed;
  doc["optimizer"] = trace.optimizer_name;
  doc["criterion"] = criterion;
  doc["budget_units"] = budget_units;
  doc["best_loss"] = nullable(trace.best_loss());
  doc["best_latent"] = trace.best_latent.flat();
  Json curve = Json::array();
  for (const auto& p : trace.points) {
    Json point;
    point["units"] = p.spent_units;
    point["current_loss"] = nullable(p.current_loss);
    point["best_loss"] = nullable(p.best_loss);
    curve.push_back(point);
  }
  doc["curve"] = curve;
  return doc;
}

std::string run_to_csv(const RunTrace& trace) {
  std::ostringstream out;
  out << "units,current_loss,best_loss\n";
  for (const auto& p : trace.points)
    out << p.spent_units << ',' << format_double(p.current_loss) << ',' << format_double(p.best_loss) << '\n';
  return out.str();
}

Json to_json(const ExperimentSpec& spec) {
  Json doc;
  doc["regime"] = to_string(spec.regime);
  doc["generator"] = spec.generator_id;
  doc["optimizers"] = spec.optimizers;
  doc["criterion"] = spec.criterion;
  doc["budget_units"] = spec.budget_units;
  doc["replicas"] = spec.replicas;
  doc["seed"] = spec.seed;
  if (!spec.base_steps.empty()) {
    Json steps = Json::object();
    for (const auto& [name, step] : spec.base_steps) steps[name] = step;
    doc["base_steps"] = steps;
  }
  return doc;
}

ExperimentSpec experiment_spec_from_json(const Json& doc) {
  return guarded("experiment spec", [&] {
    ExperimentSpec spec;
    spec.regime = parse_regime(doc.at("regime").get<std::string>());
    spec.generator_id = doc.at("generator").get<std::string>();
    spec.optimizers = doc.at("optimizers").get<std::vector<std::string>>();
    spec.criterion = doc.value("criterion", spec.criterion);
    spec.budget_units = doc.at("budget_units").get<std::int64_t>();
    spec.replicas = doc.value("replicas", std::int64_t{1});
    spec.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("base_steps"))
      for (const auto& [name, step] : doc["base_steps"].items()) spec.base_steps[name] = step.get<double>();
    spec.validate();
    return spec;
  });
}

Json to_json(const Report& report) {
  Json doc;
  doc["spec"] = to_json(report.spec);
  doc["grid"] = report.grid;
  Json opts = Json::array();
  for (const auto& s : report.optimizers) {
    Json o;
    o["optimizer"] = s.optimizer;
    o["median"] = nullable_array(s.median);
    o["q1"] = nullable_array(s.q1);
    o["q3"] = nullable_array(s.q3);
    o["final_best"] = nullable_array(s.final_best);
    o["median_final"] = nullable(s.median_final);
    opts.push_back(o);
  }
  doc["optimizers"] = opts;
  doc["ranking"] = report.ranking;
  return doc;
}

Report report_from_json(const Json& doc) {
  return guarded("report", [&] {
    Report report;
    report.spec = experiment_spec_from_json(doc.at("spec"));
    report.grid = doc.at("grid").get<std::vector<std::int64_t>>();
    for (const auto& o : doc.at("optimizers")) {
      OptimizerSummary s;
      s.optimizer = o.at("optimizer").get<std::string>();
      s.median = nan_array(o.at("median"));
      s.q1 = nan_array(o.at("q1"));
      s.q3 = nan_array(o.at("q3"));
      s.final_best = nan_array(o.at("final_best"));
      s.median_final = number_or_nan(o.at("median_final"));
      if (s.median.size() != report.grid.size() || s.q1.size() != report.grid.size() ||
          s.q3.size() != report.grid.size())
        throw ValidationError("curve length differs from the units grid");
      report.optimizers.push_back(std::move(s));
    }
    report.ranking = doc.at("ranking").get<std::vector<std::string>>();
    return report;
  });
}

std::string report_to_csv(const Report& report) {
  std::ostringstream out;
  out << "optimizer,units,median,q1,q3\n";
  for (const auto& s : report.optimizers)
    for (std::size_t g = 0; g < report.grid.size(); ++g)
      out << s.optimizer << ',' << report.grid[g] << ',' << format_double(s.median[g]) << ','
          << format_double(s.q1[g]) << ',' << format_double(s.q3[g]) << '\n';
  return out.str();
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  throw ValidationError("unknown report format '" + name + "'");
}

void emit_report(const Report& report, ReportFormat format, const std::filesystem::path& path) {
  write_text_file(path, format == ReportFormat::json ? dump_canonical(to_json(report)) : report_to_csv(report));
}

Json to_json(const HevolConfig& config) {
  Json doc;
  doc["preset"] = config.preset;
  doc["mu"] = config.es.mu;
  doc["lambda"] = config.es.lambda;
  doc["mutation_rate"] = config.es.mutation_rate ? Json(*config.es.mutation_rate) : Json(nullptr);
  doc["recombination"] = to_string(config.recombination);
  return doc;
}

HevolConfig hevol_config_from_json(const Json& doc) {
  return guarded("session config", [&] {
    HevolConfig config;
    if (doc.contains("preset") && doc["preset"].get<std::string>() != "custom")
      config = hevol_preset(doc["preset"].get<std::string>());
    config.es.mu = doc.value("mu", config.es.mu);
    config.es.lambda = doc.value("lambda", config.es.lambda);
    if (doc.contains("mutation_rate") && !doc["mutation_rate"].is_null())
      config.es.mutation_rate = doc["mutation_rate"].get<double>();
    if (doc.contains("recombination"))
      config.recombination = parse_recombination(doc["recombination"].get<std::string>());
    config.validate();
    return config;
  });
}

Json to_json(const SelectionBallot& ballot) {
  Json picks = Json::array();
  for (const auto& p : ballot.picks) {
    Json pick;
    pick["index"] = p.index;
    pick["count"] = p.count;
    picks.push_back(pick);
  }
  Json doc;
  doc["picks"] = picks;
  return doc;
}

SelectionBallot ballot_from_json(const Json& doc) {
  return guarded("ballot", [&] {
    SelectionBallot ballot;
    for (const auto& p : doc.at("picks")) {
      const auto index = p.at("index").get<std::int64_t>();
      const auto count = p.value("count", std::int64_t{1});
      if (index < 0) throw ValidationError("pick index must be non-negative");
      if (count < 1) throw ValidationError("pick count must be at least 1");
      ballot.picks.push_back({static_cast<std::size_t>(index), static_cast<std::size_t>(count)});
    }
    return ballot;
  });
}

Json session_journal(const HevolSession& session) {
  Json doc;
  doc["id"] = session.id();
  doc["config"] = to_json(session.config());
  doc["seed"] = session.seed();
  doc["generator"] = session.generator().id();
  Json ballots = Json::array();
  for (const auto& b : session.ballots()) ballots.push_back(to_json(b));
  doc["ballots"] = ballots;
  return doc;
}

HevolSession session_from_journal(const Json& doc, const GeneratorRegistry& registry) {
  return guarded("session journal", [&] {
    HevolSession session(doc.at("id").get<std::string>(), registry.get(doc.at("generator").get<std::string>()),
                         hevol_config_from_json(doc.at("config")), doc.at("seed").get<std::uint64_t>());
    for (const auto& b : doc.at("ballots")) session.record_selection(ballot_from_json(b));
    return session;
  });
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace inspire
