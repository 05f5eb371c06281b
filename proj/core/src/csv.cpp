#include "adass/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace adass {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw std::invalid_argument("csv row has the wrong number of fields");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
  if (!out_) throw std::runtime_error("csv write failed");
}

void write_train_trace(const std::filesystem::path& path, const TrainTrace& trace) {
  CsvWriter csv(path, {"epoch", "full_loss", "eta", "samples_visited", "wall_ms"});
  csv.row({"0", format_double(trace.initial_loss), "", "0", "0"});
  for (const auto& r : trace.records) {
    csv.row({std::to_string(r.epoch), format_double(r.full_loss), format_double(r.eta),
             std::to_string(r.samples_visited), format_double(r.wall_ms)});
  }
}

void write_adass_trace(const std::filesystem::path& path, const AdassTrace& trace) {
  CsvWriter csv(path, {"epoch", "full_loss", "subset_loss", "ratio", "zeta1", "zeta2", "rho_partial",
                       "samples_visited", "wall_ms"});
  const auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : trace.records) {
    csv.row({std::to_string(r.epoch), format_double(r.full_loss), format_double(r.subset_loss),
             format_double(r.ratio), opt(r.zeta1), opt(r.zeta2), format_double(r.rho_partial),
             std::to_string(r.samples_visited), format_double(r.wall_ms)});
  }
}

void write_criteria_table(const std::filesystem::path& path, const std::vector<lsq::CriteriaRow>& rows) {
  CsvWriter csv(path, {"criterion", "ratio", "mean_gap", "std_gap", "n_seeds"});
  for (const auto& r : rows) {
    csv.row({std::string(lsq::to_string(r.criterion)), format_double(r.ratio), format_double(r.mean_gap),
             format_double(r.std_gap), std::to_string(r.n_seeds)});
  }
}

}  // namespace adass
