#include "pekar/io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <iomanip>

namespace pekar::io {

namespace {

constexpr char kFieldMagic[6] = {'P', 'T', 'F', 'L', 'D', '1'};
constexpr char kStateMagic[6] = {'P', 'T', 'S', 'L', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "dump format assumes a little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error(ErrorCode::io, "truncated dump");
  return v;
}

void write_header(std::ostream& os, const Grid3& g) {
  os.write(kFieldMagic, 6);
  for (int a = 0; a < 3; ++a) put<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim(a)));
  put<double>(os, g.spacing());
}

Grid3 read_header(std::istream& is) {
  char magic[6];
  is.read(magic, 6);
  if (!is || std::memcmp(magic, kFieldMagic, 6) != 0) throw Error(ErrorCode::io, "not a PTFLD1 field dump");
  Index3 dims;
  for (int a = 0; a < 3; ++a) dims[a] = static_cast<int>(get<std::uint32_t>(is));
  const double h = get<double>(is);
  return Grid3(dims, h);
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream os(path, mode);
  if (!os) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::io, "cannot open " + path.string());
  return is;
}

// Remaining payload in bytes, or -1 when the stream is not seekable.
long long remaining_bytes(std::istream& is) {
  const auto here = is.tellg();
  if (here < 0) return -1;
  is.seekg(0, std::ios::end);
  const auto end = is.tellg();
  is.seekg(here);
  return static_cast<long long>(end - here);
}

}  // namespace

void write_field(std::ostream& os, const RealField& f) {
  write_header(os, f.grid());
  os.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
}

void write_field(std::ostream& os, const ComplexField& f) {
  write_header(os, f.grid());
  os.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(cplx)));
}

void write_field(const std::filesystem::path& path, const ComplexField& f) {
  auto os = open_out(path, std::ios::binary);
  write_field(os, f);
}

void write_field(const std::filesystem::path& path, const RealField& f) {
  auto os = open_out(path, std::ios::binary);
  write_field(os, f);
}

ComplexField read_complex_field(std::istream& is) {
  const Grid3 g = read_header(is);
  const long long left = remaining_bytes(is);
  const auto real_bytes = static_cast<long long>(g.size() * sizeof(double));
  ComplexField f(g);
  if (left == real_bytes) {
    std::vector<double> v(g.size());
    is.read(reinterpret_cast<char*>(v.data()), real_bytes);
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = v[i];
  } else {
    is.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(g.size() * sizeof(cplx)));
  }
  if (!is) throw Error(ErrorCode::io, "truncated field payload");
  return f;
}

RealField read_real_field(std::istream& is) {
  const Grid3 g = read_header(is);
  RealField f(g);
  is.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(g.size() * sizeof(double)));
  if (!is) throw Error(ErrorCode::io, "truncated field payload");
  return f;
}

ComplexField read_complex_field(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_complex_field(is);
}

void write_state(const std::filesystem::path& path, const SlaterState& s) {
  auto os = open_out(path, std::ios::binary);
  os.write(kStateMagic, 6);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  for (const auto& o : s.orbitals()) {
    write_field(os, o.up);
    write_field(os, o.down);
  }
  if (!os) throw Error(ErrorCode::io, "failed writing " + path.string());
}

SlaterState read_state(const std::filesystem::path& path) {
  auto is = open_in(path);
  char magic[6];
  is.read(magic, 6);
  if (!is || std::memcmp(magic, kStateMagic, 6) != 0) throw Error(ErrorCode::io, "not a PTSLT1 state dump");
  const auto n = get<std::uint32_t>(is);
  std::vector<SpinOrbital> orbs;
  for (std::uint32_t i = 0; i < n; ++i) {
    // Each block is complex; read_complex_field's width detection only applies to lone fields.
    const Grid3 g = read_header(is);
    ComplexField up(g);
    is.read(reinterpret_cast<char*>(up.data()), static_cast<std::streamsize>(g.size() * sizeof(cplx)));
    const Grid3 g2 = read_header(is);
    ComplexField down(g2);
    is.read(reinterpret_cast<char*>(down.data()), static_cast<std::streamsize>(g2.size() * sizeof(cplx)));
    if (!is) throw Error(ErrorCode::io, "truncated state dump");
    orbs.emplace_back(std::move(up), std::move(down));
  }
  return SlaterState(std::move(orbs));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(open_out(path, std::ios::binary)), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != columns_) throw Error(ErrorCode::invalid_argument, "CSV row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>) out_ << format_double(v);
          else out_ << v;
        },
        cells[i]);
  }
  out_ << '\n';
  if (!out_) throw Error(ErrorCode::io, "CSV write failed");
}

namespace {

json vec3(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

std::string rational(const Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

}  // namespace

json to_json(const EnergyBreakdown& e) {
  json j;
  j["kinetic"] = e.kinetic;
  j["external"] = e.external;
  j["coulomb_direct"] = e.coulomb_direct;
  j["coulomb_exchange"] = e.coulomb_exchange;
  j["self_interaction"] = e.self_interaction;
  j["total"] = e.total;
  return j;
}

json to_json(const MinimizeResult& r, bool determinant_upper_bound) {
  json j;
  j["energy"] = r.energy;
  j["breakdown"] = to_json(r.breakdown);
  j["iterations"] = r.iterations;
  j["final_grad_norm"] = r.final_grad_norm;
  j["converged"] = r.converged;
  j["seed"] = r.seed;
  j["electrons"] = r.state.size();
  j["outer_shell_mass"] = r.shell_mass;
  j["gram_deviation"] = gram_deviation(r.state.orbitals());
  if (determinant_upper_bound) j["label"] = "determinant upper bound";
  j["warnings"] = r.warnings;
  return j;
}

json to_json(const ErrorBudget& b) {
  json j;
  j["N"] = b.N;
  j["alpha"] = b.alpha;
  j["R"] = b.R;
  j["c_tilde"] = b.c_tilde;
  json terms = json::array();
  for (const auto& t : b.terms) {
    json tj;
    tj["label"] = t.label;
    tj["coefficient"] = t.coefficient;
    tj["alpha_exponent"] = rational(t.alpha_exponent);
    tj["R_exponent"] = rational(t.R_exponent);
    tj["alpha_exponent_at_optimal_R"] = rational(t.optimal_alpha_exponent());
    tj["n_dependence"] = t.n_dependence;
    tj["n_factor"] = t.n_factor;
    tj["value"] = t.value;
    terms.push_back(std::move(tj));
  }
  j["terms"] = std::move(terms);
  j["total"] = b.total;
  return j;
}

json to_json(const Sandwich& s) {
  json j;
  j["lower"] = s.lower;
  j["upper"] = s.upper;
  j["relative_width"] = s.relative_width;
  return j;
}

json to_json(const BallCluster& c) {
  json j;
  j["R"] = c.R;
  json centers = json::array(), radii = json::array(), occ = json::array(), members = json::array();
  for (const auto& b : c.balls) {
    centers.push_back(vec3(b.center));
    radii.push_back(b.radius);
    occ.push_back(b.occupancy);
    members.push_back(b.members);
  }
  j["centers"] = std::move(centers);
  j["radii"] = std::move(radii);
  j["occupancies"] = std::move(occ);
  j["members"] = std::move(members);
  j["invariants_hold"] = c.satisfies_invariants();
  return j;
}

json to_json(const BindingReport& r) {
  json j;
  j["N"] = r.N;
  j["alpha"] = r.alpha;
  j["label"] = BindingReport::kLabel;
  json rows = json::array();
  for (const auto& row : r.rows) {
    json rj;
    rj["nu"] = row.nu;
    json cs = json::array();
    for (const auto& c : row.C) cs.push_back(c ? json(*c) : json(nullptr));
    rj["C"] = std::move(cs);
    rj["gap"] = row.gap ? json(*row.gap) : json(nullptr);
    rj["binding"] = row.gap && *row.gap > 0.0;
    rj["notes"] = row.notes;
    rows.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows);
  return j;
}

void write_json(const std::filesystem::path& path, const json& j) {
  auto os = open_out(path, std::ios::binary);
  os << j.dump(2) << '\n';
  if (!os) throw Error(ErrorCode::io, "failed writing " + path.string());
}

void write_blocks_csv(const std::filesystem::path& path, const BlockModeSet& set) {
  CsvWriter w(path, {"m1", "m2", "m3", "kx", "ky", "kz", "Mm"});
  for (const auto& e : set.entries)
    w.row({static_cast<long long>(e.m[0]), static_cast<long long>(e.m[1]), static_cast<long long>(e.m[2]), e.k[0],
           e.k[1], e.k[2], e.M});
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace) {
  CsvWriter w(path, {"iter", "energy", "grad_norm", "step"});
  for (const auto& t : trace) w.row({static_cast<long long>(t.iter), t.energy, t.grad_norm, t.step});
}

void write_merge_trace_csv(const std::filesystem::path& path, const BallCluster& c) {
  CsvWriter w(path, {"step", "ax", "ay", "az", "na", "bx", "by", "bz", "nb", "cx", "cy", "cz", "radius"});
  for (const auto& e : c.trace)
    w.row({static_cast<long long>(e.step), e.center_a[0], e.center_a[1], e.center_a[2],
           static_cast<long long>(e.occupancy_a), e.center_b[0], e.center_b[1], e.center_b[2],
           static_cast<long long>(e.occupancy_b), e.merged_center[0], e.merged_center[1], e.merged_center[2],
           e.merged_radius});
}

void write_binding_csv(const std::filesystem::path& path, const BindingReport& r) {
  std::vector<std::string> header{"nu"};
  for (int k = 1; k <= r.N; ++k) header.push_back("C_" + std::to_string(k));
  header.push_back("gap");
  CsvWriter w(path, header);
  for (const auto& row : r.rows) {
    std::vector<CsvWriter::Cell> cells{row.nu};
    for (int k = 1; k <= r.N; ++k) cells.emplace_back(row.C[k] ? *row.C[k] : std::nan(""));
    cells.emplace_back(row.gap ? *row.gap : std::nan(""));
    w.row(cells);
  }
}

}  // namespace pekar::io
