#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tdr/linalg.hpp"

namespace tdr {

struct Dataset {
  Vector y;
  Matrix X;
  std::string response_name = "y";
  std::vector<std::string> predictor_names;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }
};

/// FNV-1a over the raw bytes of y and X (row-major traversal).
std::uint64_t dataset_hash(const Dataset& data);

/// Reads a headered CSV. Rows with a missing or non-numeric value in any
/// selected column are rejected with the 1-based data row number. An empty
/// predictor list selects every column except the response.
Dataset ingest_csv(const std::string& path, const std::string& response,
                   const std::vector<std::string>& predictors = {});

}  // namespace tdr
