// pekar: batch front end. Each subcommand reads a `key = value` config and
// writes its results under <out>/<command>-<config hash>/.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pekar/bounds.hpp"
#include "pekar/config.hpp"
#include "pekar/error.hpp"
#include "pekar/fock_oracle.hpp"
#include "pekar/io.hpp"
#include "pekar/localization.hpp"
#include "pekar/minimizer.hpp"
#include "pekar/phonon_blocks.hpp"
#include "pekar/pt_functional.hpp"

namespace fs = std::filesystem;
using namespace pekar;
using io::json;

namespace {

constexpr double kPekarC11 = -0.108512805228;

struct Options {
  std::string config;
  std::string out = "runs";
  long long seed = -1;
  int threads = 1;
  bool trace = false;
};

const std::set<std::string> kGridKeys = {"grid_n", "grid_dims", "spacing", "seed", "threads", "output"};
const std::set<std::string> kFieldKeys = {"B", "V_amplitude", "V_period"};
const std::set<std::string> kMinimizerKeys = {"max_iters",  "grad_tol",     "step_rule",    "initial_step",
                                              "restarts",   "init",         "precondition", "perturbation",
                                              "leak_tolerance"};

std::set<std::string> keys(std::initializer_list<const std::set<std::string>*> groups,
                           std::initializer_list<const char*> extra) {
  std::set<std::string> out;
  for (const auto* g : groups) out.insert(g->begin(), g->end());
  for (const char* k : extra) out.insert(k);
  return out;
}

Grid3 read_grid(const RunConfig& c, int def_n, double def_h, const std::string& n_key = "grid_n",
                const std::string& h_key = "spacing") {
  Index3 dims;
  if (n_key == "grid_n" && c.has("grid_dims")) {
    const auto d = c.get_int_list("grid_dims", {}, 8, 1024);
    if (d.size() != 3) throw Error(ErrorCode::config, "key 'grid_dims': expected three integers");
    dims = {d[0], d[1], d[2]};
  } else {
    const int n = static_cast<int>(c.get_int(n_key, def_n, 8, 1024));
    dims = {n, n, n};
  }
  return Grid3(dims, c.get_double(h_key, def_h, 1e-6, 1e6));
}

Vec3 read_vec3(const RunConfig& c, const std::string& key, const Vec3& def) {
  if (!c.has(key)) return def;
  const auto v = c.get_double_list(key, {}, -1e12, 1e12);
  if (v.size() != 3) throw Error(ErrorCode::config, "key '" + key + "': expected three numbers");
  return {v[0], v[1], v[2]};
}

PTParams read_params(const RunConfig& c, const Grid3& g, double alpha, double def_nu) {
  PTParams p;
  p.alpha = alpha;
  p.U = c.get_double("nu", def_nu, 0.0, 1e6) * alpha;
  if (c.has("B")) p.A = linear_vector_potential(g, read_vec3(c, "B", {0, 0, 0}));
  if (c.has("V_amplitude")) {
    const double L = g.min_box_length();
    p.V = periodic_potential(g, c.get_double("V_amplitude", 0.0, -1e6, 1e6), read_vec3(c, "V_period", {L, L, L}));
  }
  return p;
}

MinimizerConfig read_minimizer(const RunConfig& c, const Options& o) {
  MinimizerConfig m;
  m.max_iters = static_cast<int>(c.get_int("max_iters", m.max_iters, 1, 10'000'000));
  m.grad_tol = c.get_double("grad_tol", m.grad_tol, 1e-14, 1.0);
  const std::string rule = c.get_string("step_rule", "backtracking");
  if (rule == "backtracking")
    m.step_rule = StepRule::backtracking;
  else if (rule == "fixed")
    m.step_rule = StepRule::fixed;
  else
    throw Error(ErrorCode::config, "key 'step_rule': expected fixed or backtracking, got '" + rule + "'");
  m.initial_step = c.get_double("initial_step", m.initial_step, 1e-8, 100.0);
  m.restarts = static_cast<int>(c.get_int("restarts", m.restarts, 1, 1000));
  const std::string init = c.get_string("init", "random-gaussians");
  if (init == "random-gaussians")
    m.init = InitStrategy::random_gaussians;
  else if (init == "stacked-center")
    m.init = InitStrategy::stacked_center;
  else
    throw Error(ErrorCode::config, "key 'init': expected random-gaussians or stacked-center, got '" + init + "'");
  m.precondition = c.get_bool("precondition", m.precondition);
  m.perturbation = c.get_double("perturbation", m.perturbation, 0.0, 10.0);
  m.leak_tolerance = c.get_double("leak_tolerance", m.leak_tolerance, 0.0, 1.0);
  m.seed = c.get_seed("seed", 1);
  m.threads = o.threads;
  m.record_trace = o.trace;
  return m;
}

std::vector<Vec3> parse_points(const RunConfig& c, const std::string& key) {
  std::vector<Vec3> out;
  std::stringstream ss(c.get_string(key, ""));
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    RunConfig tmp;
    tmp.set(key, item);
    out.push_back(read_vec3(tmp, key, {0, 0, 0}));
  }
  return out;
}

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

// ---- commands ----

int cmd_minimize(const RunConfig& c, const Options& o, const fs::path& dir) {
  c.require_known(keys({&kGridKeys, &kFieldKeys, &kMinimizerKeys}, {"N", "alpha", "nu"}));
  const Grid3 g = read_grid(c, 48, 1.2);
  const int N = static_cast<int>(c.get_int("N", 1, 1, 64));
  const PTParams p = read_params(c, g, c.get_double("alpha", 1.0, 1e-12, 1e6), 2.0);
  const MinimizerConfig m = read_minimizer(c, o);
  const MinimizeResult r = minimize_pt(N, p, g, m);
  json j = io::to_json(r, N >= 2);
  j["N"] = N;
  j["alpha"] = p.alpha;
  j["U"] = p.U;
  io::write_json(dir / "result.json", j);
  io::write_state(dir / "state.ptslt", r.state);
  if (o.trace) io::write_trace_csv(dir / "trace.csv", r.trace);
  return 0;
}

int cmd_binding(const RunConfig& c, const Options& o, const fs::path& dir) {
  c.require_known(keys({&kGridKeys, &kFieldKeys, &kMinimizerKeys}, {"N", "alpha", "nu_list"}));
  const Grid3 g = read_grid(c, 32, 1.2);
  const int N = static_cast<int>(c.get_int("N", 2, 2, 16));
  const PTParams base = read_params(c, g, c.get_double("alpha", 1.0, 1e-12, 1e6), 0.0);
  const auto nus = c.get_double_list("nu_list", {2.0, 2.5, 3.0, 3.5, 4.0}, 0.0, 1e6);
  const BindingReport rep = binding_scan(N, nus, base, g, read_minimizer(c, o));
  io::write_json(dir / "binding.json", io::to_json(rep));
  io::write_binding_csv(dir / "binding.csv", rep);
  return 0;
}

int cmd_bounds(const RunConfig& c, const Options&, const fs::path& dir) {
  c.require_known(keys({&kGridKeys}, {"N", "alpha", "nu", "R", "occupancies", "c", "c_tilde", "C"}));
  const int N = static_cast<int>(c.get_int("N", 1, 1, 1000));
  const double alpha = c.get_double("alpha", 1.0, 1e-12, 1e12);
  const double nu = c.get_double("nu", 2.0, 0.0, 1e12);
  const double c_const = c.get_double("c", 1.0, 0.0, 1e12);
  const double c_tilde = c.get_double("c_tilde", 1.0, 0.0, 1e12);
  if (N > 1 && !c.has("C")) throw Error(ErrorCode::config, "key 'C': required for N > 1");
  const double C = c.get_double("C", kPekarC11, -1e12, 1e12);
  const auto occ = c.get_int_list("occupancies", {N}, 1, 1000);
  const double R = c.has("R") ? c.get_double("R", 1.0, 1e-12, 1e12) : optimal_R(N, alpha);

  json j;
  j["N"] = N;
  j["alpha"] = alpha;
  j["nu"] = nu;
  j["constants"] = {{"c", c_const}, {"c_tilde", c_tilde}, {"note", "user-supplied, not computed"}};
  j["optimal_R"] = optimal_R(N, alpha);
  j["budget"] = io::to_json(error_budget(N, alpha, R, occ, c_tilde, nu));
  j["budget_at_optimal_R"] = io::to_json(error_budget_at_optimal_R(N, alpha, occ, c_tilde, nu));
  j["composed_constant"] = composed_constant(c_tilde);
  j["three_term_bound"] = three_term_bound(N, alpha, c_tilde);
  j["C"] = C;
  j["sandwich"] = io::to_json(lower_bound(N, alpha, C, c_const));
  io::write_json(dir / "bounds.json", j);
  return 0;
}

int cmd_localize(const RunConfig& c, const Options&, const fs::path& dir) {
  c.require_known(keys({&kGridKeys}, {"R", "centers", "random_centers", "spread", "mc_samples", "resolution"}));
  const double R = c.get_double("R", 1.0, 1e-9, 1e9);
  std::vector<Vec3> centers = parse_points(c, "centers");
  if (centers.empty()) {
    const int k = static_cast<int>(c.get_int("random_centers", 1, 1, 100000));
    const double spread = c.get_double("spread", 2.0 * R, 0.0, 1e12);
    std::mt19937_64 rng(c.get_seed("seed", 1));
    std::uniform_real_distribution<double> u(-spread, spread);
    for (int i = 0; i < k; ++i) centers.push_back({u(rng), u(rng), u(rng)});
  }
  const CutoffProfile chi = make_cutoff(R, static_cast<int>(c.get_int("resolution", 4000, 16, 1'000'000)));
  const BallCluster cluster = merge_balls(centers, R);

  json j;
  j["R"] = R;
  j["profile"] = {{"dirichlet_energy", chi.dirichlet_energy()},
                  {"dirichlet_ground", dirichlet_ground_energy(R)},
                  {"budget", 1.5 * std::numbers::pi * std::numbers::pi / (R * R)}};
  j["centers"] = json::array();
  for (const auto& x : centers) j["centers"].push_back(vec_json(x));
  j["cluster"] = io::to_json(cluster);
  j["localization_error"] = localization_error(static_cast<int>(centers.size()), R);

  const auto samples = static_cast<std::uint64_t>(c.get_int("mc_samples", 20000, 0, 1'000'000'000));
  if (samples > 0 && centers.size() <= static_cast<std::size_t>(kMaxLeakageElectrons)) {
    const std::uint64_t seed = c.get_seed("seed", 1);
    const MCEstimate w = weight_norm_mc(centers, chi, samples, seed);
    j["weight_norm"] = {{"mean", w.mean}, {"std_error", w.std_error}, {"samples", w.samples}, {"flagged", w.flagged}};
    const double bound = static_cast<double>(centers.size()) * chi.dirichlet_energy();
    json fj = json::array();
    for (const auto& e : estimate_Fj(centers, chi, samples, seed + 1))
      fj.push_back({{"upper", e.upper.mean},
                    {"upper_std_error", e.upper.std_error},
                    {"grad_P_term", e.grad_P_term},
                    {"F_j", e.exact()},
                    {"flagged", e.upper.flagged}});
    j["F_j"] = fj;
    j["F_j_bound"] = bound;
  }
  io::write_json(dir / "localize.json", j);
  io::write_merge_trace_csv(dir / "merge_trace.csv", cluster);
  return 0;
}

int cmd_blocks(const RunConfig& c, const Options&, const fs::path& dir) {
  c.require_known(keys({&kGridKeys}, {"Lambda", "P", "rule", "rel_tol", "n", "alpha"}));
  CutoffParams cp;
  cp.Lambda = c.get_double("Lambda", 1.0, 1e-9, 1e6);
  cp.P = c.get_double("P", 1.0, 1e-9, 1e6);
  cp.n = static_cast<int>(c.get_int("n", 1, 1, 1000));
  cp.alpha = c.get_double("alpha", 1.0, 1e-12, 1e12);
  const std::string rule = c.get_string("rule", "nearest");
  RepresentativeRule rr;
  if (rule == "nearest")
    rr = RepresentativeRule::nearest_to_center;
  else if (rule == "clipped")
    rr = RepresentativeRule::clipped_center;
  else
    throw Error(ErrorCode::config, "key 'rule': expected nearest or clipped, got '" + rule + "'");
  const BlockModeSet set = build_blocks(cp.Lambda, cp.P, rr, c.get_double("rel_tol", 1e-6, 1e-14, 1e-1));

  json j;
  j["Lambda"] = cp.Lambda;
  j["P"] = cp.P;
  j["rule"] = rule;
  j["count"] = set.entries.size();
  j["count_bound"] = block_count_bound(cp.Lambda, cp.P);
  j["total_weight"] = set.total_weight();
  j["ball_weight"] = 4.0 * std::numbers::pi * cp.Lambda;
  j["M_Lambda"] = head_constant_MLambda(cp.n, cp.Lambda);
  j["K_Lambda"] = tail_constant_KLambda(cp.n, cp.Lambda);
  try {
    cp.validate();
    j["beta"] = cp.beta();
  } catch (const Error& e) {
    j["beta"] = nullptr;
    j["beta_note"] = e.what();
  }
  io::write_json(dir / "blocks.json", j);
  io::write_blocks_csv(dir / "blocks.csv", set);
  return 0;
}

int cmd_oracle(const RunConfig& c, const Options&, const fs::path& dir) {
  c.require_known(keys({&kGridKeys}, {"electron", "e0", "chain_sites", "chain_spacing", "beta", "Lambda", "P",
                                      "max_modes", "alpha", "delta", "n_max_list", "tol"}));
  const std::string kind = c.get_string("electron", "chain");
  const double beta = c.get_double("beta", 1.0, 1e-12, 1e6);
  std::optional<ElectronSpace> e;
  if (kind == "frozen")
    e = frozen_electron(c.get_double("e0", 0.0, -1e6, 1e6));
  else if (kind == "chain")
    e = chain_electron(static_cast<int>(c.get_int("chain_sites", 6, 1, 4096)),
                       c.get_double("chain_spacing", 1.0, 1e-9, 1e6), beta);
  else if (kind == "grid")
    e = grid_electron(read_grid(c, 8, 1.0), beta);
  else
    throw Error(ErrorCode::config, "key 'electron': expected frozen, chain or grid, got '" + kind + "'");

  const double Lambda = c.get_double("Lambda", 1.0, 1e-9, 1e6);
  const double P = c.get_double("P", 1.0, 1e-9, 1e6);
  const auto blocks = build_blocks(Lambda, P);
  BlockHamiltonianSpec spec;
  spec.electron = &*e;
  spec.modes = modes_from_blocks(blocks, static_cast<std::size_t>(c.get_int("max_modes", 3, 1, 1000)));
  spec.alpha = c.get_double("alpha", 1.0, 0.0, 1e6);
  spec.delta = c.get_double("delta", 0.1, 1e-9, 1.0 - 1e-9);
  spec.validate();
  const double tol = c.get_double("tol", 1e-9, 1e-14, 1e-2);
  const auto ladder = c.get_int_list("n_max_list", {0, 2, 4, 6, 8}, 0, 255);

  const EigenResult el = electron_ground_state(*e, 1e-12);
  const double coh = coherent_bound(el.vector, spec);
  json records = json::array();
  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  for (int n_max : ladder) {
    const EigenResult r = ground_energy(spec, n_max, tol);
    monotone = monotone && r.value <= prev + tol;
    prev = r.value;
    records.push_back({{"Lambda", Lambda},
                       {"P", P},
                       {"delta", spec.delta},
                       {"n_max", n_max},
                       {"M", spec.modes.size()},
                       {"dim", r.dimension},
                       {"energy", r.value},
                       {"residual", r.residual}});
  }
  json j;
  j["electron"] = kind;
  j["electron_energy"] = el.value;
  j["coherent_bound"] = coh;
  j["records"] = records;
  j["monotone_in_n_max"] = monotone;
  // Coherent states lie outside every truncated space; compare against the
  // deepest truncation only.
  j["coherent_dominates"] = coh >= prev - tol;
  io::write_json(dir / "oracle.json", j);
  return 0;
}

int cmd_subadd(const RunConfig& c, const Options& o, const fs::path& dir) {
  c.require_known(keys({&kGridKeys, &kMinimizerKeys}, {"alpha", "nu", "big_n", "support_radius", "shifts",
                                                       "cross_distances", "tolerance"}));
  const Grid3 small = read_grid(c, 48, 1.2);
  const Grid3 big = read_grid(c, 128, small.spacing(), "big_n");
  const double alpha = c.get_double("alpha", 1.0, 1e-12, 1e6);
  const double r = c.get_double("support_radius", 16.0, 1e-6, 1e6);
  SubadditivityConfig sc;
  sc.support_radius = r;
  sc.tolerance = c.get_double("tolerance", sc.tolerance, 0.0, 1.0);

  PTParams ps;
  ps.alpha = alpha;
  const MinimizeResult m = minimize_pt(1, ps, small, read_minimizer(c, o));
  const SlaterState s = truncate_support(recenter_state(m.state), r);

  PTParams pb;
  pb.alpha = alpha;
  pb.U = c.get_double("nu", 0.0, 0.0, 1e6) * alpha;
  const int min_shift = static_cast<int>(std::ceil(2.0 * r / small.spacing()));
  const int max_shift = static_cast<int>(std::floor((big.min_box_length() / 2.0 - 2.0 * r) / small.spacing()));
  std::vector<int> def_shifts;
  for (int k = 0; k < 5 && min_shift <= max_shift; ++k)
    def_shifts.push_back(min_shift + (max_shift - min_shift) * k / 4);
  const auto shifts = c.get_int_list("shifts", def_shifts, 1, 1 << 20);
  std::vector<double> def_cross;
  for (int k = 0; k < 11; ++k) def_cross.push_back(2.0 * r * std::pow(10.0, k / 10.0));
  const auto cross = c.get_double_list("cross_distances", def_cross, 0.0, 1e12);

  const SubadditivityStudy st = subadditivity_study(s, s, 2.0 * m.energy, shifts, cross, big, pb, sc);

  io::CsvWriter csv(dir / "subadd.csv", {"d", "lhs", "C_m", "C_n", "cross_term", "holds"});
  json pts = json::array();
  for (const auto& pnt : st.points) {
    csv.row({pnt.d, pnt.lhs, pnt.C_m, pnt.C_n, pnt.cross_term, static_cast<long long>(pnt.holds)});
    pts.push_back({{"d", pnt.d},
                   {"lhs", pnt.lhs},
                   {"C_m", pnt.C_m},
                   {"C_n", pnt.C_n},
                   {"cross_term", pnt.cross_term},
                   {"holds", pnt.holds}});
  }
  io::CsvWriter ccsv(dir / "cross.csv", {"d", "cross_term"});
  for (std::size_t i = 0; i < st.cross_distances.size(); ++i) ccsv.row({st.cross_distances[i], st.cross_values[i]});

  json j;
  j["C_1"] = m.energy;
  j["minimizer"] = io::to_json(m, false);
  j["reference"] = st.reference;
  j["points"] = pts;
  j["cross_slope"] = st.cross_slope;
  j["fit"] = {{"limit", st.fit.limit}, {"a", st.fit.a}};
  j["limit_gap"] = st.limit_gap;
  j["all_hold"] = st.all_hold;
  io::write_json(dir / "subadd.json", j);
  return 0;
}

using Command = int (*)(const RunConfig&, const Options&, const fs::path&);

int run(const std::string& name, Command cmd, const Options& o) {
  fs::path dir;
  auto discard = [&] {
    std::error_code ec;
    if (!dir.empty() && std::distance(fs::directory_iterator(dir, ec), fs::directory_iterator()) <= 1)
      fs::remove_all(dir, ec);
  };
  try {
    RunConfig c = RunConfig::load(o.config);
    if (o.seed >= 0) c.set("seed", std::to_string(o.seed));
    const fs::path base = o.out != "runs" || !c.has("output") ? fs::path(o.out) : fs::path(c.get_string("output", ""));
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(name + "\n" + c.canonical())));
    dir = base / (name + "-" + hash);
    fs::create_directories(dir);
    {
      std::ofstream f(dir / "config.txt", std::ios::binary);
      f << c.canonical();
    }
    const int rc = cmd(c, o, dir);
    std::cout << dir.string() << '\n';
    return rc;
  } catch (const Error& e) {
    std::cerr << "pekar " << name << ": " << e.what() << '\n';
    discard();
    return e.code() == ErrorCode::config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "pekar " << name << ": " << e.what() << '\n';
    discard();
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pekar-Tomasevich polaron toolkit"};
  app.require_subcommand(1);
  Options o;
  const std::vector<std::pair<std::string, Command>> commands = {
      {"minimize", cmd_minimize}, {"binding", cmd_binding}, {"bounds", cmd_bounds}, {"localize", cmd_localize},
      {"blocks", cmd_blocks},     {"oracle", cmd_oracle},   {"subadd", cmd_subadd},
  };
  for (const auto& [name, fn] : commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", o.config, "run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output root");
    sub->add_option("--seed", o.seed, "override the config seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", o.threads, "worker cap")->check(CLI::PositiveNumber);
    sub->add_flag("--trace", o.trace, "write the iteration trace");
  }
  CLI11_PARSE(app, argc, argv);
  for (const auto& [name, fn] : commands)
    if (app.got_subcommand(name)) return run(name, fn, o);
  return 1;
}
