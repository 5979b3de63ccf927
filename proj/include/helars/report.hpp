#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "helars/dataset.hpp"
#include "helars/estimation.hpp"
#include "helars/selection.hpp"

namespace helars {

/// Header `step,div_ratio,theta_0,...,theta_{d+r}`, one row per step,
/// 17 significant digits so a re-read is exact.
void write_path_csv(std::ostream& out, const SelectionPath& path);

/// Inverse of write_path_csv. Aux vectors are not stored and come back
/// empty; the removal order is rebuilt from the zero pattern.
SelectionPath read_path_csv(std::istream& in);

/// x = div_ratio, then one column per covariate.
void write_plot_csv(std::ostream& out, const SelectionPath& path,
                    const std::vector<std::string>& covariate_names);

nlohmann::json mle_json(const MleResult& fit);

nlohmann::json config_json(const SelectionConfig& config);

nlohmann::json path_summary(const SelectionPath& path, const Dataset& data,
                            const std::string& model, const MleResult& full,
                            const SelectionConfig& config);

}  // namespace helars
