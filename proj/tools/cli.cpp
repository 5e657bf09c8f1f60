#include "cli.hpp"

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "optdesign/choice_model.hpp"
#include "optdesign/design_space.hpp"
#include "optdesign/discrete_gisa.hpp"
#include "optdesign/errors.hpp"
#include "optdesign/http_service.hpp"
#include "optdesign/metrics_io.hpp"
#include "optdesign/session.hpp"
#include "optdesign/simulation.hpp"

#ifndef OPTDESIGN_DATA_DIR
#define OPTDESIGN_DATA_DIR "data"
#endif

namespace optdesign::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Resolved settings of simulate / compare. Precedence: flags, then the
// --config file, then these defaults.
struct RunSettings {
  std::string strategy = "gisa";
  double theta = 100.0;
  std::size_t queries = 100;
  std::size_t runs = 20;
  std::size_t samples = 1000;
  std::size_t candidates = 100;
  std::uint64_t seed = 1;
  std::string space = std::string(OPTDESIGN_DATA_DIR) + "/dial_scale_2455.json";
  std::string part_worths = std::string(OPTDESIGN_DATA_DIR) + "/dial_scale_partworths.csv";
  std::optional<std::size_t> competitor;
  std::string out = "optdesign-out";
  std::string format = "csv";
};

json to_json(const RunSettings& s) {
  return {{"strategy", s.strategy},
          {"theta", s.theta},
          {"Q", s.queries},
          {"T", s.runs},
          {"J", s.samples},
          {"N", s.candidates},
          {"seed", s.seed},
          {"space", s.space},
          {"part_worths", s.part_worths},
          {"competitor", s.competitor ? json(*s.competitor) : json(nullptr)},
          {"out", s.out},
          {"format", s.format}};
}

void apply_config(const json& doc, RunSettings& s) {
  if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "strategy") s.strategy = value.get<std::string>();
    else if (key == "theta") s.theta = value.get<double>();
    else if (key == "Q") s.queries = value.get<std::size_t>();
    else if (key == "T") s.runs = value.get<std::size_t>();
    else if (key == "J") s.samples = value.get<std::size_t>();
    else if (key == "N") s.candidates = value.get<std::size_t>();
    else if (key == "seed") s.seed = value.get<std::uint64_t>();
    else if (key == "space") s.space = value.get<std::string>();
    else if (key == "part_worths") s.part_worths = value.get<std::string>();
    else if (key == "competitor") {
      s.competitor = value.is_null() ? std::nullopt : std::optional(value.get<std::size_t>());
    } else if (key == "out") s.out = value.get<std::string>();
    else if (key == "format") s.format = value.get<std::string>();
    else throw UsageError("unknown config key '" + key + "'");
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
}

// Flag values plus the setters that copy the flags actually given.
struct RunFlags {
  RunSettings given;
  std::size_t competitor = 0;
  std::string config;
  std::vector<std::pair<CLI::Option*, std::function<void(RunSettings&)>>> setters;

  template <class T>
  void add(CLI::App* app, const std::string& names, T RunSettings::*field, const std::string& help) {
    CLI::Option* opt = app->add_option(names, given.*field, help);
    setters.emplace_back(opt, [this, field](RunSettings& s) { s.*field = given.*field; });
  }

  void register_on(CLI::App* app, bool with_strategy) {
    app->add_option("--config", config, "JSON config file (flags override it)");
    if (with_strategy) {
      add(app, "--strategy", &RunSettings::strategy, "gisa or abernethy");
    }
    add(app, "--theta", &RunSettings::theta, "response noise scale");
    add(app, "-Q,--Q,--queries", &RunSettings::queries, "queries per questionnaire");
    add(app, "-T,--T,--runs", &RunSettings::runs, "questionnaires per strategy");
    add(app, "-J,--J,--samples", &RunSettings::samples, "posterior samples per round");
    add(app, "-N,--N,--candidates", &RunSettings::candidates, "GISA candidate queries per round");
    add(app, "--seed", &RunSettings::seed, "run seed");
    add(app, "--space", &RunSettings::space, "design-space JSON");
    add(app, "--part-worths", &RunSettings::part_worths, "true part-worth CSV");
    add(app, "--out", &RunSettings::out, "output directory");
    add(app, "--format", &RunSettings::format, "csv or json");
    CLI::Option* comp = app->add_option("--competitor", competitor, "pin the competitor design index");
    setters.emplace_back(comp, [this](RunSettings& s) { s.competitor = competitor; });
  }

  RunSettings resolve() const {
    RunSettings s;
    if (!config.empty()) apply_config(read_json_file(config), s);
    for (const auto& [opt, set] : setters) {
      if (opt->count() > 0) set(s);
    }
    if (s.format != "csv" && s.format != "json") {
      throw UsageError("--format must be csv or json");
    }
    if (s.runs == 0) throw UsageError("T must be at least 1");
    return s;
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

int run_experiment(const RunSettings& s, std::vector<Strategy> strategies, std::ostream& out) {
  auto space = std::make_shared<const DesignSpace>(load_design_space(s.space));
  const Eigen::VectorXd w_star = load_part_worths(space->schema(), s.part_worths);

  CompareConfig cc;
  cc.strategies = std::move(strategies);
  cc.theta = s.theta;
  cc.queries = s.queries;
  cc.runs = s.runs;
  cc.samples = s.samples;
  cc.candidates = s.candidates;
  cc.seed = s.seed;
  cc.competitor = s.competitor;
  cc.validate();

  const Comparison result = compare_strategies(space, w_star, cc);

  const fs::path dir(s.out);
  fs::create_directories(dir);
  write_text(dir / "config.json", to_json(s).dump(2) + "\n");
  if (s.format == "csv") {
    std::ostringstream runs;
    write_runs_csv(runs, result.runs);
    write_text(dir / "runs.csv", runs.str());
    std::ostringstream summary;
    write_comparison_csv(summary, result.table);
    write_text(dir / "summary.csv", summary.str());
  } else {
    write_text(dir / "runs.json", runs_json(result.runs));
    write_text(dir / "summary.json", comparison_json(result.table));
  }

  for (const AggregateRow& a : result.table) {
    if (a.q != s.queries) continue;
    out << to_string(a.strategy) << " q=" << a.q << " correct=" << format_number(a.correct)
        << " (sem " << format_number(a.correct_sem) << ") pi_kstar=" << format_number(a.pi_kstar)
        << " profit_gap=" << format_number(a.profit_gap) << '\n';
  }
  out << "wrote " << (dir / ("runs." + s.format)).string() << " and "
      << (dir / ("summary." + s.format)).string() << '\n';
  return 0;
}

struct SegmentFlags {
  std::string space;
  std::size_t products = 8;
  std::uint64_t seed = 1;
  std::size_t competitor_flag = 0;
  PlaneGrid grid;
  std::string out = "segment_map.csv";
};

int run_segment_map(const SegmentFlags& f, bool competitor_given, std::ostream& out) {
  f.grid.validate();
  Market market;
  if (!f.space.empty()) {
    const DesignSpace space = load_design_space(f.space);
    if (space.dimension() != 2) {
      throw ValidationError("segment-map needs a design space with 2 part-worth coordinates, got " +
                            std::to_string(space.dimension()));
    }
    if (competitor_given) {
      if (f.competitor_flag >= space.size()) throw ValidationError("competitor index out of range");
      market = space.market_against(f.competitor_flag);
    } else if (space.competitor()) {
      market = space.market(*space.competitor());
    } else {
      throw ValidationError("space has no pinned competitor; pass --competitor");
    }
  } else {
    market = random_planar_market(f.products, f.seed);
  }
  const SegmentMap map = segment_map(market, f.grid);
  const fs::path path(f.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ostringstream csv;
  write_segment_map_csv(csv, map);
  write_text(path, csv.str());

  json echo = {{"space", f.space},
               {"products", f.products},
               {"seed", f.seed},
               {"x_min", f.grid.x_min},
               {"x_max", f.grid.x_max},
               {"y_min", f.grid.y_min},
               {"y_max", f.grid.y_max},
               {"nx", f.grid.nx},
               {"ny", f.grid.ny},
               {"out", f.out}};
  if (competitor_given) echo["competitor"] = f.competitor_flag;
  fs::path echo_path = path;
  echo_path.replace_extension(".config.json");
  write_text(echo_path, echo.dump(2) + "\n");

  for (Eigen::Index k = 0; k < market.products.rows(); ++k) {
    out << "# product " << k << ": " << format_number(market.products(k, 0)) << ' '
        << format_number(market.products(k, 1)) << " margin " << format_number(market.margins[k])
        << '\n';
  }
  out << "wrote " << path.string() << '\n';
  return 0;
}

void print_tree(const DiscreteGroupInstance& inst, const DiscreteTree& tree, int node,
                const std::string& indent, std::ostream& out) {
  const DiscreteTreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
  if (!n.query) {
    out << indent << (n.resolved ? inst.groups[*n.group] : std::string("unresolved")) << " (p="
        << format_number(n.probability) << ")\n";
    return;
  }
  out << indent << inst.queries[*n.query] << "\n";
  out << indent << "  yes:\n";
  print_tree(inst, tree, n.yes, indent + "    ", out);
  out << indent << "  no:\n";
  print_tree(inst, tree, n.no, indent + "    ", out);
}

int run_discrete(const std::string& path, const std::vector<std::string>& zero,
                 const std::string& format, std::ostream& out) {
  DiscreteGroupInstance inst = load_discrete_instance(path);
  if (!zero.empty()) {
    for (const auto& name : zero) {
      const auto it = std::find(inst.objects.begin(), inst.objects.end(), name);
      if (it == inst.objects.end()) throw ValidationError("no object named '" + name + "'");
      inst.priors[static_cast<std::size_t>(it - inst.objects.begin())] = 0.0;
    }
    double total = 0.0;
    for (double p : inst.priors) total += p;
    if (total <= 0.0) throw ValidationError("every object prior is zero");
    for (double& p : inst.priors) p /= total;
  }
  std::vector<std::size_t> all(inst.query_count());
  for (std::size_t q = 0; q < all.size(); ++q) all[q] = q;
  const DiscreteSelection root = select_discrete_query(inst, inst.priors, all);
  const DiscreteTree tree = discrete_gisa(inst);

  if (format == "json") {
    json table = json::array();
    for (const auto& s : root.table) {
      table.push_back({{"query", inst.queries[s.query]},
                       {"pi_l", s.pi_left},
                       {"pi_r", s.pi_right},
                       {"rho", s.rho},
                       {"rho_k", s.rho_k},
                       {"l_tilde", s.l_tilde}});
    }
    json doc = {{"root", inst.queries[root.query]},
                {"scores", table},
                {"expected_length", tree.expected_length},
                {"unresolved_leaves", tree.unresolved_leaves}};
    out << doc.dump(2) << '\n';
    return 0;
  }
  out << "root: " << inst.queries[root.query] << '\n';
  out << "query,pi_l,pi_r,rho,l_tilde\n";
  for (const auto& s : root.table) {
    out << inst.queries[s.query] << ',' << format_number(s.pi_left) << ','
        << format_number(s.pi_right) << ',' << format_number(s.rho) << ','
        << format_number(s.l_tilde) << '\n';
  }
  out << "expected_length: " << format_number(tree.expected_length) << '\n';
  out << "unresolved_leaves: " << tree.unresolved_leaves << '\n';
  out << "tree:\n";
  print_tree(inst, tree, 0, "  ", out);
  return 0;
}

HttpService* g_service = nullptr;

void stop_service(int) {
  if (g_service) g_service->stop();
}

struct ServeFlags {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string space = std::string(OPTDESIGN_DATA_DIR) + "/dial_scale_2455.json";
  std::string strategy = "gisa";
  std::string persist_dir;
  std::string static_dir;
  std::size_t queries = 20;
  std::size_t samples = 1000;
  std::size_t candidates = 100;
};

int run_serve(const ServeFlags& f, std::ostream& out) {
  auto space = std::make_shared<const DesignSpace>(load_design_space(f.space));
  ServiceOptions opts;
  opts.defaults.strategy = parse_strategy(f.strategy);
  opts.defaults.queries = f.queries;
  opts.defaults.samples = f.samples;
  opts.defaults.candidates = f.candidates;
  opts.defaults.validate();
  if (!f.static_dir.empty()) opts.static_dir = f.static_dir;
  std::optional<fs::path> persist;
  if (!f.persist_dir.empty()) persist = f.persist_dir;
  auto sessions = std::make_shared<SessionManager>(space, persist);
  const std::size_t loaded = sessions->load_persisted();

  HttpService service(sessions, opts);
  const int port = service.bind(f.host, f.port);
  if (port < 0) throw std::runtime_error("cannot bind " + f.host + ":" + std::to_string(f.port));
  out << "serving " << space->size() << " designs on http://" << f.host << ':' << port
      << " (" << loaded << " sessions restored)" << std::endl;
  g_service = &service;
  std::signal(SIGINT, stop_service);
  std::signal(SIGTERM, stop_service);
  const bool ok = service.serve();
  g_service = nullptr;
  return ok ? 0 : 1;
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive pairwise questionnaires for optimal product identification", "optdesign"};
  app.require_subcommand(1);

  RunFlags sim_flags;
  CLI::App* simulate = app.add_subcommand("simulate", "run simulated questionnaires for one strategy");
  sim_flags.register_on(simulate, true);

  RunFlags cmp_flags;
  CLI::App* compare = app.add_subcommand("compare", "run GISA and the baseline on the same seeds");
  cmp_flags.register_on(compare, false);

  SegmentFlags seg;
  CLI::App* segment = app.add_subcommand("segment-map", "label a 2-D part-worth grid by optimal design");
  segment->add_option("--space", seg.space, "design space with two part-worth coordinates");
  segment->add_option("--products", seg.products, "random planar products when no space is given");
  segment->add_option("--seed", seg.seed, "seed for the random planar market");
  CLI::Option* seg_comp = segment->add_option("--competitor", seg.competitor_flag, "competitor index");
  segment->add_option("--x-min", seg.grid.x_min);
  segment->add_option("--x-max", seg.grid.x_max);
  segment->add_option("--y-min", seg.grid.y_min);
  segment->add_option("--y-max", seg.grid.y_max);
  segment->add_option("--nx", seg.grid.nx, "grid columns");
  segment->add_option("--ny", seg.grid.ny, "grid rows");
  segment->add_option("--out", seg.out, "output CSV path");

  std::string instance;
  std::vector<std::string> zero;
  std::string discrete_format = "text";
  CLI::App* discrete = app.add_subcommand("discrete-gisa", "greedy GISA on a discrete group instance");
  discrete->add_option("--instance", instance, "instance JSON")->required();
  discrete->add_option("--zero", zero, "object whose prior is set to zero (repeatable)");
  discrete->add_option("--format", discrete_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  ServeFlags serve_flags;
  CLI::App* serve = app.add_subcommand("serve", "serve live questionnaire sessions over HTTP");
  serve->add_option("--host", serve_flags.host);
  serve->add_option("--port", serve_flags.port);
  serve->add_option("--space", serve_flags.space, "design-space JSON");
  serve->add_option("--strategy", serve_flags.strategy, "default strategy for new sessions");
  serve->add_option("--persist-dir", serve_flags.persist_dir, "session persistence directory");
  serve->add_option("--static-dir", serve_flags.static_dir, "survey UI bundle mounted at /ui");
  serve->add_option("-Q,--Q,--queries", serve_flags.queries, "default query budget");
  serve->add_option("-J,--J,--samples", serve_flags.samples, "default posterior samples");
  serve->add_option("-N,--N,--candidates", serve_flags.candidates, "default GISA candidates");

  try {
    std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(reversed.begin(), reversed.end());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "optdesign: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (simulate->parsed()) {
      const RunSettings s = sim_flags.resolve();
      return run_experiment(s, {parse_strategy(s.strategy)}, out);
    }
    if (compare->parsed()) {
      const RunSettings s = cmp_flags.resolve();
      return run_experiment(s, {Strategy::kGisa, Strategy::kAbernethy}, out);
    }
    if (segment->parsed()) return run_segment_map(seg, seg_comp->count() > 0, out);
    if (discrete->parsed()) return run_discrete(instance, zero, discrete_format, out);
    if (serve->parsed()) return run_serve(serve_flags, out);
  } catch (const UsageError& e) {
    err << "optdesign: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    err << "optdesign: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    err << "optdesign: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "optdesign: error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return parse_and_dispatch(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace optdesign::cli
