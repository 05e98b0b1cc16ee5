#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "inspire/criteria.hpp"
#include "inspire/generators.hpp"
#include "inspire/harness.hpp"
#include "inspire/hevol.hpp"
#include "inspire/optimizers.hpp"

namespace inspire {

// Keys keep insertion order so every document has one canonical text form.
using Json = nlohmann::ordered_json;

// Two-space indented text with a trailing newline.
std::string dump_canonical(const Json& doc);
// Throws ValidationError on malformed text.
Json parse_json(const std::string& text);

Json to_json(const ToySpec& spec);
ToySpec toy_spec_from_json(const Json& doc);

Json to_json(const CriterionWeights& weights);
CriterionWeights weights_from_json(const Json& doc);

// {seed, optimizer, criterion, budget_units, best_loss, best_latent, curve}
Json run_to_json(const RunTrace& trace, const std::string& criterion, std::int64_t budget_units);
// units,current_loss,best_loss
std::string run_to_csv(const RunTrace& trace);

Json to_json(const ExperimentSpec& spec);
ExperimentSpec experiment_spec_from_json(const Json& doc);

// Curve values with no data are written as null and read back as NaN.
Json to_json(const Report& report);
Report report_from_json(const Json& doc);
// optimizer,units,median,q1,q3; one row per (optimizer, grid point).
std::string report_to_csv(const Report& report);

enum class ReportFormat { json, csv };
ReportFormat parse_report_format(const std::string& name);
// Throws Error when the file cannot be written.
void emit_report(const Report& report, ReportFormat format, const std::filesystem::path& path);

Json to_json(const HevolConfig& config);
HevolConfig hevol_config_from_json(const Json& doc);

Json to_json(const SelectionBallot& ballot);
SelectionBallot ballot_from_json(const Json& doc);

// {id, config, seed, generator, ballots}
Json session_journal(const HevolSession& session);
HevolSession session_from_journal(const Json& doc, const GeneratorRegistry& registry);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace inspire
