#pragma once
// Binary field/state dumps, CSV tables and JSON helpers.
//
// PTFLD1: "PTFLD1", three u32 LE dims, f64 LE spacing, row-major f64 values
// (complex fields interleaved re, im). PTSLT1: "PTSLT1", u32 LE N, then 2N
// PTFLD1 blocks (up, down per orbital).

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>
#include "pekar/bounds.hpp"
#include "pekar/fock_oracle.hpp"
#include "pekar/grid.hpp"
#include "pekar/localization.hpp"
#include "pekar/minimizer.hpp"
#include "pekar/phonon_blocks.hpp"
#include "pekar/pt_functional.hpp"
#include "pekar/slater.hpp"

namespace pekar::io {

using json = nlohmann::ordered_json;

void write_field(std::ostream& os, const RealField& f);
void write_field(std::ostream& os, const ComplexField& f);
void write_field(const std::filesystem::path& path, const ComplexField& f);
void write_field(const std::filesystem::path& path, const RealField& f);
// Accepts either payload width; real payloads are promoted.
ComplexField read_complex_field(std::istream& is);
RealField read_real_field(std::istream& is);
ComplexField read_complex_field(const std::filesystem::path& path);

void write_state(const std::filesystem::path& path, const SlaterState& s);
SlaterState read_state(const std::filesystem::path& path);

// 17 significant digits, shortest form that round-trips at that precision.
std::string format_double(double v);

class CsvWriter {
 public:
  using Cell = std::variant<double, long long, std::string>;
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<Cell>& cells);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

json to_json(const EnergyBreakdown& e);
json to_json(const MinimizeResult& r, bool determinant_upper_bound);
json to_json(const ErrorBudget& b);
json to_json(const Sandwich& s);
json to_json(const BallCluster& c);
json to_json(const BindingReport& r);

void write_json(const std::filesystem::path& path, const json& j);

void write_blocks_csv(const std::filesystem::path& path, const BlockModeSet& set);
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace);
void write_merge_trace_csv(const std::filesystem::path& path, const BallCluster& c);
void write_binding_csv(const std::filesystem::path& path, const BindingReport& r);

}  // namespace pekar::io
