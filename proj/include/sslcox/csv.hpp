#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "sslcox/survival.hpp"

namespace sslcox {

// CSV dataset: header row, required columns `time` and `status`, every
// other column a predictor. UTF-8, '.' decimal, no missing values.
struct DatasetFile {
  SurvivalData data;
  std::vector<std::string> predictor_names;
};

DatasetFile read_dataset_csv(const std::string& path);

void write_dataset_csv(const std::string& path, const SurvivalData& data,
                       const std::vector<std::string>& predictor_names);

// doubles formatted with 17 significant digits so read/write round-trips
std::string format_double(double v);
double parse_double(const std::string& field, int row, const std::string& col);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace sslcox
