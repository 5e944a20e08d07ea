#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "densreg/bayes_space.hpp"
#include "densreg/binning.hpp"
#include "densreg/fit.hpp"
#include "densreg/model.hpp"

namespace densreg {

const char* version();

/// Comma-separated text with a header row; lines starting with '#' are comments.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of every row.
  std::vector<std::size_t> lines;

  std::size_t column(const std::string& name) const;
  bool has(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text, const std::string& source = "csv");
CsvTable read_csv(const std::filesystem::path& path);

/// Reads the response, the covariates the model uses and the optional weight column.
/// Columns read by categorical or varying terms are categorical, other covariates numeric.
Observations load_observations(const CsvTable& table, const ModelSpec& spec, const std::string& weights_column = "");
/// Covariates only, for prediction.
CovariateTable load_covariates(const CsvTable& table, const ModelSpec& spec);

/// %.17g, which reads back to the same double.
std::string format_double(double v);

/// CSV output starting with "# densreg <version> config=<hash>" and a header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header, const std::string& hash);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t width_;
  std::filesystem::path path_;
};

/// Columns kind (node or atom), y, value.
void write_grid_function(const std::filesystem::path& path, const GridFunction& f, const std::string& hash);
GridFunction read_grid_function(const std::filesystem::path& path, const DomainPtr& domain);

/// Binned design audit: combo, cell, representative, width, count, weight, offset.
void write_design(const std::filesystem::path& path, const BinnedDesign& design, const std::string& hash);

/// Everything needed to rebuild a fitted model without the data.
struct FitArtifact {
  std::string version;
  /// Hash of the model config as given, before command-line overrides.
  std::string config_hash;
  /// Effective model specification.
  ModelSpec spec;
  std::vector<TermState> states;
  int bins = 0;
  FitResult fit;

  Model model() const;
};

/// An empty hash means the hash of the fitted model's own spec.
FitArtifact make_artifact(const FittedModel& fitted, int bins, const std::string& hash = "");
std::string dump_artifact(const FitArtifact& artifact);
/// Throws when the artifact was written by another version.
FitArtifact parse_artifact(const std::string& text);
void save_artifact(const std::filesystem::path& path, const FitArtifact& artifact);
FitArtifact load_artifact(const std::filesystem::path& path);
/// Throws when the model config differs from the one the artifact was fitted with.
void check_artifact_config(const FitArtifact& artifact, const ModelSpec& spec);

}  // namespace densreg
