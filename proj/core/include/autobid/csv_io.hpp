#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "autobid/auction.hpp"
#include "autobid/evaluation.hpp"
#include "autobid/generator.hpp"
#include "autobid/hindsight.hpp"
#include "autobid/oracle.hpp"

namespace autobid {

/// Impression log: header `step,value,price`, one row per opportunity,
/// steps 1-based. `num_steps` pads trailing empty steps; by default the
/// largest step seen sets T.
void write_impressions_csv(const ImpressionStream& stream, std::ostream& out);
void write_impressions_csv(const ImpressionStream& stream, const std::filesystem::path& path);
ImpressionStream read_impressions_csv(std::istream& in, std::optional<std::size_t> num_steps = {});
ImpressionStream read_impressions_csv(const std::filesystem::path& path,
                                      std::optional<std::size_t> num_steps = {});

/// Offline selection items: header `value,cost`.
std::vector<SelectionItem> read_items_csv(const std::filesystem::path& path);

/// Hindsight tuples: `traj_id,step,beta_hat,realized_cost,realized_value,f0..f38`
/// plus a JSON manifest next to it (`<path>.json`) with samples_per_step.
void write_dataset_csv(const HindsightDataset& dataset, const std::filesystem::path& path);
HindsightDataset read_dataset_csv(const std::filesystem::path& path);

/// Campaign log: `step,beta,alpha,cost,value,remaining_budget,delta_roi`.
/// alpha and delta_roi are left empty when the policy does not report them.
void write_campaign_csv(const CampaignResult& campaign, std::ostream& out);
void write_campaign_csv(const CampaignResult& campaign, const std::filesystem::path& path);

/// A suite on disk: manifest.json plus one impression CSV per episode under
/// streams/.
void write_suite(const SyntheticSuite& suite, const std::filesystem::path& dir);
SyntheticSuite read_suite(const std::filesystem::path& dir);

/// Generator settings as a JSON object; missing keys keep their defaults.
std::string generator_config_to_json(const GeneratorConfig& config);
GeneratorConfig generator_config_from_json(const std::string& text);

/// Evaluation results, episodes included, so reports can be rendered later.
void write_reports_json(std::span<const MetricsReport> reports, const std::filesystem::path& path);
std::vector<MetricsReport> read_reports_json(const std::filesystem::path& path);

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace autobid
