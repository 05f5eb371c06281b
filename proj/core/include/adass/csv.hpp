#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "adass/adass.hpp"
#include "adass/lsq_oracle.hpp"
#include "adass/optimizers.hpp"

namespace adass {

/// Shortest round-trip decimal form, independent of the global locale.
std::string format_double(double value);

/// Minimal comma-separated writer. Fields are written verbatim.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

/// epoch, full_loss, eta, samples_visited, wall_ms
void write_train_trace(const std::filesystem::path& path, const TrainTrace& trace);

/// epoch, full_loss, subset_loss, ratio, zeta1, zeta2, rho_partial, samples_visited, wall_ms.
/// Unmeasured zeta fields are left empty.
void write_adass_trace(const std::filesystem::path& path, const AdassTrace& trace);

/// criterion, ratio, mean_gap, std_gap, n_seeds
void write_criteria_table(const std::filesystem::path& path, const std::vector<lsq::CriteriaRow>& rows);

}  // namespace adass
