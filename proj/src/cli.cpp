#include "parrondo/cli.hpp"

#include "parrondo/analysis.hpp"
#include "parrondo/chain_core.hpp"
#include "parrondo/errors.hpp"
#include "parrondo/reduction.hpp"
#include "parrondo/simulate.hpp"
#include "parrondo/spatial_games.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

namespace parrondo {

namespace {

using json = nlohmann::json;

constexpr const char* kDefaultP = "1,4/25,4/25,7/10";

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

Rational parse_decimal(const std::string& raw) {
  const std::string s = trim(raw);
  std::size_t i = 0;
  bool negative = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) negative = s[i++] == '-';
  __int128 num = 0;
  __int128 den = 1;
  bool seen_digit = false;
  bool seen_point = false;
  int digits = 0;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '.' && !seen_point) {
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') throw UsageError("malformed number '" + raw + "'");
    seen_digit = true;
    if (num == 0 && c == '0' && !seen_point) continue;
    if (++digits > 18) throw UsageError("too many digits in '" + raw + "'");
    num = num * 10 + (c - '0');
    if (seen_point) den *= 10;
  }
  if (!seen_digit) throw UsageError("malformed number '" + raw + "'");
  return Rational{static_cast<std::int64_t>(negative ? -num : num),
                  static_cast<std::int64_t>(den)};
}

Rational reduce(__int128 num, __int128 den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 a = num < 0 ? -num : num;
  __int128 b = den;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  constexpr __int128 limit = __int128{1} << 62;
  if (num >= limit || num <= -limit || den >= limit) {
    throw UsageError("fraction too large");
  }
  return Rational{static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
}

std::string rational_text(const Rational& r) {
  if (r.den == 1) return std::to_string(r.num);
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

struct Probabilities {
  CoinProbabilities p{};
  std::vector<std::string> exact;
};

Probabilities parse_probabilities(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 4) {
    throw UsageError("--p needs four comma-separated values p0,p1,p2,p3");
  }
  Probabilities out;
  for (std::size_t m = 0; m < 4; ++m) {
    const Rational r = parse_rational(parts[m]);
    out.p[m] = r.value();
    out.exact.push_back(rational_text(r));
  }
  return out;
}

std::pair<int, int> parse_pattern(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw UsageError("--pattern needs r,s");
  int r = 0;
  int s = 0;
  try {
    std::size_t used = 0;
    r = std::stoi(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument(parts[0]);
    s = std::stoi(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
  } catch (const std::logic_error&) {
    throw UsageError("--pattern needs two integers r,s");
  }
  if (r < 1 || s < 1) throw UsageError("pattern lengths r, s must be >= 1");
  return {r, s};
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  for (const auto& part : split(text, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::logic_error&) {
      throw UsageError(flag + " needs comma-separated integers");
    }
  }
  if (out.empty()) throw UsageError(flag + " is empty");
  return out;
}

Game parse_game(const std::string& name) {
  if (name == "A") return Game::A;
  if (name == "A'" || name == "Aprime" || name == "A_prime") return Game::A_prime;
  if (name == "B") return Game::B;
  throw UsageError("unknown game '" + name + "' (expected A, A' or B)");
}

std::string game_text(Game g) {
  switch (g) {
    case Game::A:
      return "A";
    case Game::A_prime:
      return "A'";
    case Game::B:
      return "B";
  }
  return "?";
}

SymmetryGroup resolve_group(const std::string& name, const CoinProbabilities& p) {
  if (name == "auto") {
    return p[1] == p[2] ? SymmetryGroup::dihedral : SymmetryGroup::cyclic;
  }
  if (name == "cyclic") return SymmetryGroup::cyclic;
  if (name == "dihedral") return SymmetryGroup::dihedral;
  if (name == "none" || name == "trivial") return SymmetryGroup::trivial;
  throw UsageError("unknown group '" + name + "' (expected auto, cyclic, dihedral or none)");
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Shared by mean and simulate.
struct GameFlags {
  std::string family = "xie";
  int players = 3;
  std::string p = kDefaultP;
  std::string game;
  std::string mix;
  std::string pattern;
  std::string fixture;
};

void add_game_flags(CLI::App* cmd, GameFlags& f) {
  cmd->add_option("--family", f.family, "toral (game A) or xie (game A')")
      ->capture_default_str();
  cmd->add_option("--N", f.players, "number of players")->capture_default_str();
  cmd->add_option("--p", f.p, "p0,p1,p2,p3 as decimals or fractions")
      ->capture_default_str();
  auto* game = cmd->add_option("--game", f.game, "pure game: A, A' or B");
  auto* mix = cmd->add_option("--mix", f.mix, "mixing weight gamma of the A side");
  auto* pattern = cmd->add_option("--pattern", f.pattern, "periodic pattern r,s");
  game->excludes(mix)->excludes(pattern);
  mix->excludes(pattern);
  cmd->add_option("--fixture", f.fixture,
                  "capital-A, capital-B, capital-C or capital (with --mix/--pattern)");
}

// A resolved schedule over concrete chains.
struct ResolvedGames {
  json config;
  bool capital = false;
  std::optional<SpatialParams> params;
  Game a_side = Game::A_prime;
  enum class Kind { pure, mixture, pattern } kind = Kind::pure;
  Game pure_game = Game::B;
  double gamma = 0.0;
  int r = 1;
  int s = 1;
};

ResolvedGames resolve_games(const GameFlags& f) {
  ResolvedGames g;
  json& c = g.config;
  if (!f.mix.empty()) {
    const Rational r = parse_rational(f.mix);
    g.kind = ResolvedGames::Kind::mixture;
    g.gamma = r.value();
    if (!(g.gamma >= 0.0 && g.gamma <= 1.0)) {
      throw UsageError("mixing weight must lie in [0,1]");
    }
    c["schedule"] = {{"kind", "mixture"}, {"gamma", g.gamma}, {"gamma_exact", rational_text(r)}};
  } else if (!f.pattern.empty()) {
    const auto [r, s] = parse_pattern(f.pattern);
    g.kind = ResolvedGames::Kind::pattern;
    g.r = r;
    g.s = s;
    c["schedule"] = {{"kind", "pattern"}, {"r", r}, {"s", s}};
  } else {
    g.kind = ResolvedGames::Kind::pure;
    g.pure_game = f.game.empty() ? Game::B : parse_game(f.game);
    c["schedule"] = {{"kind", "pure"}, {"game", game_text(g.pure_game)}};
  }

  if (!f.fixture.empty()) {
    g.capital = true;
    c["fixture"] = f.fixture;
    if (f.fixture == "capital") {
      if (g.kind == ResolvedGames::Kind::pure) {
        throw UsageError("--fixture capital needs --mix or --pattern");
      }
      g.a_side = Game::A;
    } else if (f.fixture == "capital-A" || f.fixture == "capital-B" ||
               f.fixture == "capital-C") {
      if (g.kind != ResolvedGames::Kind::pure || !f.game.empty()) {
        throw UsageError("--fixture " + f.fixture +
                         " names a single game; use --fixture capital with --mix or --pattern");
      }
      if (f.fixture == "capital-C") {
        g.kind = ResolvedGames::Kind::mixture;
        g.gamma = 0.5;
        g.a_side = Game::A;
      } else {
        g.pure_game = f.fixture == "capital-A" ? Game::A : Game::B;
      }
      c.erase("schedule");
    } else {
      throw UsageError("unknown fixture '" + f.fixture + "'");
    }
    if (g.kind == ResolvedGames::Kind::pure && g.pure_game == Game::A_prime) {
      throw UsageError("game A' has no capital-dependent version");
    }
    return g;
  }

  const Family family = parse_family(f.family);
  g.a_side = a_side_game(family);
  const Probabilities probs = parse_probabilities(f.p);
  SpatialParams params{f.players, probs.p};
  params.validate();
  g.params = params;
  c["family"] = to_string(family);
  c["N"] = f.players;
  c["p"] = probs.p;
  c["p_exact"] = probs.exact;
  return g;
}

ChainTriple capital_chain(Game game) {
  return capital_dependent_fixture(game == Game::A ? CapitalGame::A : CapitalGame::B);
}

// Output helpers.

void pretty_print(const json& j, std::ostream& os, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  std::size_t index = 0;
  for (auto it = j.begin(); it != j.end(); ++it, ++index) {
    os << pad << (j.is_object() ? it.key() : "[" + std::to_string(index) + "]");
    if (it->is_object() || (it->is_array() && !it->empty() &&
                            (it->front().is_object() || it->front().is_array()))) {
      os << ":\n";
      pretty_print(*it, os, indent + 2);
    } else {
      os << ": " << (it->is_string() ? it->get<std::string>() : it->dump()) << "\n";
    }
  }
}

std::string scalar_csv(const json& result) {
  std::ostringstream os;
  os << "key,value\n";
  for (auto it = result.begin(); it != result.end(); ++it) {
    if (it->is_structured()) continue;
    os << it.key() << "," << (it->is_string() ? it->get<std::string>() : it->dump())
       << "\n";
  }
  return os.str();
}

struct OutputFlags {
  std::string format = "json";
  std::string file;
};

void add_output_flags(CLI::App* cmd, OutputFlags& o) {
  cmd->add_option("--output", o.format, "json, csv or pretty")
      ->check(CLI::IsMember({"json", "csv", "pretty"}))
      ->capture_default_str();
  cmd->add_option("--out", o.file, "write the payload to FILE");
}

std::string render(const json& doc, const std::string& format,
                   const std::function<std::string()>& csv_body) {
  if (format == "json") return doc.dump(2) + "\n";
  if (format == "csv") return "# config " + doc.at("config").dump() + "\n" + csv_body();
  std::ostringstream os;
  pretty_print(doc, os, 0);
  return os.str();
}

void emit(const std::string& payload, const OutputFlags& o, std::ostream& out) {
  if (o.file.empty()) {
    out << payload;
    return;
  }
  std::ofstream f(o.file, std::ios::binary);
  if (!f) throw UsageError("cannot open '" + o.file + "' for writing");
  f << payload;
  if (!f) throw UsageError("failed writing '" + o.file + "'");
}

// Subcommands. Each returns the document and a CSV body.

struct Payload {
  json doc;
  std::function<std::string()> csv;
  int exit_code = kExitOk;
};

json moment_json(const MomentResult& m, bool with_variance) {
  json r;
  r["mu"] = m.mu;
  r["mu_sig6"] = format_sig6(m.mu);
  if (with_variance) {
    r["sigma2"] = m.sigma2;
    r["sigma2_sig6"] = format_sig6(m.sigma2);
  }
  r["method"] = to_string(m.method);
  r["reduced_dim"] = m.reduced_dim;
  r["stationary_residual"] = m.residual;
  return r;
}

Payload cmd_mean(const GameFlags& f, const std::string& group_name, bool variance) {
  ResolvedGames g = resolve_games(f);
  json config = g.config;
  config["command"] = "mean";
  config["variance"] = variance;
  const SolverOptions opts;
  MomentResult m;

  std::function<ChainTriple(Game)> chain_of;
  if (g.capital) {
    chain_of = capital_chain;
  } else {
    const SymmetryGroup group = resolve_group(group_name, g.params->p);
    config["group"] = to_string(group);
    const SpatialParams params = *g.params;
    if (group == SymmetryGroup::trivial) {
      chain_of = [params](Game game) { return build_game(game, params); };
    } else {
      const QuotientMap& q = cached_orbits(params.players, group);
      chain_of = [params, &q](Game game) { return build_game_lumped(game, params, q); };
    }
  }

  switch (g.kind) {
    case ResolvedGames::Kind::pure:
      m = moments(chain_of(g.pure_game), variance, opts);
      break;
    case ResolvedGames::Kind::mixture:
      m = moments(mix(g.gamma, chain_of(g.a_side), chain_of(Game::B)), variance, opts);
      break;
    case ResolvedGames::Kind::pattern:
      m = pattern_moments(chain_of(g.a_side), chain_of(Game::B), g.r, g.s, variance,
                          opts);
      break;
  }
  Payload out;
  out.doc["config"] = config;
  out.doc["result"] = moment_json(m, variance);
  const json result = out.doc["result"];
  out.csv = [result] { return scalar_csv(result); };
  return out;
}

struct TableFlags {
  std::string family = "toral";
  std::string ns = "3,6,9,12,15,18";
  std::string p = kDefaultP;
};

Payload cmd_table(const TableFlags& f) {
  const Family family = parse_family(f.family);
  const std::vector<int> ns = parse_int_list(f.ns, "--Ns");
  const Probabilities probs = parse_probabilities(f.p);
  for (int n : ns) SpatialParams{n, probs.p}.validate();

  const ConvergenceTable table = convergence_table(probs.p, ns, family);

  Payload out;
  json config;
  config["command"] = "table";
  config["family"] = to_string(family);
  config["Ns"] = ns;
  config["p"] = probs.p;
  config["p_exact"] = probs.exact;
  out.doc["config"] = config;

  json rows = json::array();
  std::size_t failures = 0;
  std::size_t cells = 0;
  for (const auto& row : table.rows) {
    json cells_json = json::array();
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const TableCell& cell = row.cells[c];
      json jc{{"column", table.columns[c]}};
      ++cells;
      if (cell.value) {
        jc["value"] = *cell.value;
        jc["sig6"] = format_sig6(*cell.value);
      } else {
        jc["error"] = cell.error;
        ++failures;
      }
      cells_json.push_back(jc);
    }
    rows.push_back({{"N", row.players}, {"cells", cells_json}});
  }
  json result;
  result["columns"] = table.columns;
  result["rows"] = rows;
  json stab = json::object();
  for (const auto& column : table.columns) {
    try {
      const StabilizationReport rep = stabilization_report(table, column);
      stab[column] = {{"stabilized", rep.stabilized},
                      {"last_delta", rep.last_delta},
                      {"last_value", rep.last_value}};
    } catch (const UsageError&) {
      // Fewer than three N with values.
    }
  }
  if (!stab.empty()) result["stabilization"] = stab;
  out.doc["result"] = result;
  if (cells > 0 && failures == cells) out.exit_code = kExitSolver;

  out.csv = [table] {
    std::ostringstream os;
    os << "N";
    for (const auto& c : table.columns) os << "," << c;
    os << "\n";
    for (const auto& row : table.rows) {
      os << row.players;
      for (const auto& cell : row.cells) {
        os << "," << (cell.value ? format_sig6(*cell.value) : std::string("error"));
      }
      os << "\n";
    }
    return os.str();
  };
  return out;
}

struct SweepFlags {
  int players = 6;
  std::string grid_step;
  std::string mix;
  std::string pattern;
  std::string family = "xie";
  bool full_space = false;
};

Payload cmd_sweep(const SweepFlags& f) {
  if (f.grid_step.empty()) throw UsageError("sweep requires --grid-step");
  const Rational step = parse_rational(f.grid_step);
  SweepSchedule schedule;
  json config;
  config["command"] = "sweep";
  if (!f.pattern.empty()) {
    const auto [r, s] = parse_pattern(f.pattern);
    schedule.kind = SweepSchedule::Kind::pattern;
    schedule.r = r;
    schedule.s = s;
    config["schedule"] = {{"kind", "pattern"}, {"r", r}, {"s", s}};
  } else {
    const Rational gamma = parse_rational(f.mix.empty() ? "1/2" : f.mix);
    schedule.gamma = gamma.value();
    if (!(schedule.gamma >= 0.0 && schedule.gamma <= 1.0)) {
      throw UsageError("mixing weight must lie in [0,1]");
    }
    config["schedule"] = {{"kind", "mixture"},
                          {"gamma", schedule.gamma},
                          {"gamma_exact", rational_text(gamma)}};
  }
  SweepOptions opts;
  opts.family = parse_family(f.family);
  opts.full_space = f.full_space;
  SpatialParams{f.players, {0.5, 0.5, 0.5, 0.5}}.validate();
  config["N"] = f.players;
  config["grid_step"] = step.value();
  config["grid_step_exact"] = rational_text(step);
  config["family"] = to_string(opts.family);
  config["space"] = f.full_space ? "full" : "dihedral";

  const std::vector<RegionPoint> points =
      parrondo_region_sweep(f.players, step.value(), schedule, opts);

  json pts = json::array();
  std::map<std::string, int> counts{{"parrondo", 0}, {"anti_parrondo", 0}, {"neither", 0}};
  int flagged = 0;
  for (const auto& pt : points) {
    json jp{{"p0", pt.p0},
            {"p1", pt.p1},
            {"p2", pt.p2},
            {"mu_B", number_or_null(pt.mu_b)},
            {"mu_combined", number_or_null(pt.mu_combined)},
            {"class", to_string(pt.classification)}};
    if (pt.flagged) {
      jp["flagged"] = true;
      jp["diagnostic"] = pt.diagnostic;
      ++flagged;
    }
    ++counts[to_string(pt.classification)];
    pts.push_back(jp);
  }
  Payload out;
  out.doc["config"] = config;
  out.doc["result"] = {{"points", pts}, {"counts", counts}, {"flagged", flagged}};
  out.csv = [points] { return region_csv(points); };
  return out;
}

struct VolumeFlags {
  std::string gamma;
  int dims = 4;
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 1;
};

Payload cmd_volume(const VolumeFlags& f) {
  if (f.gamma.empty()) throw UsageError("volume requires --gamma");
  const Rational gamma = parse_rational(f.gamma);
  if (f.dims != 3 && f.dims != 4) throw UsageError("--dims must be 3 or 4");
  const VolumeEstimate v =
      condition_volume(gamma.value(), f.dims == 4 ? VolumeDims::four_param
                                                  : VolumeDims::three_param,
                       f.samples, f.seed);
  Payload out;
  out.doc["config"] = {{"command", "volume"},
                       {"gamma", gamma.value()},
                       {"gamma_exact", rational_text(gamma)},
                       {"dims", f.dims},
                       {"samples", f.samples},
                       {"seed", f.seed}};
  out.doc["result"] = {{"volume", v.volume}, {"ci95", v.ci95}};
  const json result = out.doc["result"];
  out.csv = [result] { return scalar_csv(result); };
  return out;
}

struct SimulateFlags {
  GameFlags games;
  std::optional<std::uint64_t> turns;
  std::optional<std::uint64_t> seed;
  std::uint64_t stream = 0;
};

Payload cmd_simulate(const SimulateFlags& f) {
  if (!f.turns || !f.seed) throw UsageError("simulate requires --turns and --seed");
  const ResolvedGames g = resolve_games(f.games);
  Schedule schedule;
  if (g.capital) {
    switch (g.kind) {
      case ResolvedGames::Kind::pure:
        schedule = Schedule::capital_pure(g.pure_game);
        break;
      case ResolvedGames::Kind::mixture:
        schedule = Schedule::capital_mixture(g.gamma);
        break;
      case ResolvedGames::Kind::pattern:
        schedule = Schedule::capital_pattern(g.r, g.s);
        break;
    }
  } else {
    switch (g.kind) {
      case ResolvedGames::Kind::pure:
        schedule = Schedule::pure(g.pure_game, *g.params);
        break;
      case ResolvedGames::Kind::mixture:
        schedule = Schedule::mixture(g.gamma, g.a_side, *g.params);
        break;
      case ResolvedGames::Kind::pattern:
        schedule = Schedule::pattern(g.r, g.s, g.a_side, *g.params);
        break;
    }
  }
  const TrajectorySummary t = play(schedule, *f.turns, *f.seed, f.stream);
  const EmpiricalMoments m = empirical_moments(t);

  Payload out;
  json config = g.config;
  config["command"] = "simulate";
  config["turns"] = *f.turns;
  config["seed"] = *f.seed;
  config["stream"] = f.stream;
  out.doc["config"] = config;
  out.doc["result"] = {{"mean_hat", m.mean_hat},
                       {"sigma2_hat", m.sigma2_hat},
                       {"stderr", m.stderr_hat},
                       {"n", t.n},
                       {"seed", t.seed},
                       {"S_n", t.total},
                       {"batch_size", t.batch_size}};
  const json result = out.doc["result"];
  out.csv = [result] { return scalar_csv(result); };
  return out;
}

struct ReduceFlags {
  int players = 4;
  std::string group = "cyclic";
  bool list = false;
};

std::string bit_string(std::uint32_t bits, int players) {
  std::string s;
  for (int x = 1; x <= players; ++x) {
    s += status(BitConfig{bits}, x, players) ? '1' : '0';
  }
  return s;
}

Payload cmd_reduce_info(const ReduceFlags& f) {
  const SymmetryGroup group = resolve_group(f.group, {0, 0, 0, 0});
  const QuotientMap& q = cached_orbits(f.players, group);
  const std::uint64_t burnside = necklace_count(f.players, group);
  Payload out;
  out.doc["config"] = {{"command", "reduce-info"},
                       {"N", f.players},
                       {"group", to_string(group)},
                       {"list", f.list}};
  json result{{"states", q.states()},
              {"classes", q.classes()},
              {"burnside_count", burnside},
              {"counts_agree", burnside == q.classes()}};
  json listing = json::array();
  if (f.list) {
    for (std::uint32_t c = 0; c < q.classes(); ++c) {
      listing.push_back({{"class", c},
                         {"representative", q.representative(c)},
                         {"bits", bit_string(q.representative(c), f.players)},
                         {"size", q.class_size(c)}});
    }
    result["class_list"] = listing;
  }
  out.doc["result"] = result;
  const int players = f.players;
  out.csv = [result, listing, players] {
    if (listing.empty()) return scalar_csv(result);
    std::ostringstream os;
    os << "class,representative,bits,size\n";
    for (const auto& row : listing) {
      os << row["class"].dump() << "," << row["representative"].dump() << ","
         << row["bits"].get<std::string>() << "," << row["size"].dump() << "\n";
    }
    return os.str();
  };
  return out;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) throw UsageError("empty number");
  const auto slash = s.find('/');
  const Rational a = parse_decimal(s.substr(0, slash));
  if (slash == std::string::npos) return reduce(a.num, a.den);
  const Rational b = parse_decimal(s.substr(slash + 1));
  if (b.num == 0) throw UsageError("zero denominator in '" + text + "'");
  return reduce(static_cast<__int128>(a.num) * b.den,
                static_cast<__int128>(a.den) * b.num);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Means and variances of profit in spatial Parrondo games"};
  app.name("parrondo");
  app.require_subcommand(1);

  GameFlags mean_flags;
  std::string mean_group = "auto";
  bool mean_variance = false;
  OutputFlags mean_out;
  auto* mean = app.add_subcommand("mean", "equilibrium mean (and variance) per turn");
  add_game_flags(mean, mean_flags);
  mean->add_option("--group", mean_group, "auto, cyclic, dihedral or none")
      ->capture_default_str();
  mean->add_flag("--variance", mean_variance, "also compute sigma^2");
  add_output_flags(mean, mean_out);

  TableFlags table_flags;
  OutputFlags table_out;
  auto* table = app.add_subcommand("table", "table of means for several N");
  table->add_option("--family", table_flags.family)->capture_default_str();
  table->add_option("--Ns", table_flags.ns, "comma-separated N values")
      ->capture_default_str();
  table->add_option("--p", table_flags.p)->capture_default_str();
  add_output_flags(table, table_out);

  SweepFlags sweep_flags;
  OutputFlags sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Parrondo-region grid over (p0,p1,p1,p2)");
  sweep->add_option("--N", sweep_flags.players)->capture_default_str();
  sweep->add_option("--grid-step", sweep_flags.grid_step, "grid spacing dividing 1");
  auto* sweep_mix = sweep->add_option("--mix", sweep_flags.mix, "gamma (default 1/2)");
  auto* sweep_pattern = sweep->add_option("--pattern", sweep_flags.pattern, "r,s");
  sweep_mix->excludes(sweep_pattern);
  sweep->add_option("--family", sweep_flags.family)->capture_default_str();
  sweep->add_flag("--full-space", sweep_flags.full_space,
                  "solve on {0,1}^N instead of the dihedral classes");
  add_output_flags(sweep, sweep_out);

  VolumeFlags volume_flags;
  OutputFlags volume_out;
  auto* volume = app.add_subcommand("volume", "volume of the convergence condition");
  volume->add_option("--gamma", volume_flags.gamma, "mixing weight");
  volume->add_option("--dims", volume_flags.dims, "3 (p1 = p2) or 4")
      ->capture_default_str();
  volume->add_option("--samples", volume_flags.samples)->capture_default_str();
  volume->add_option("--seed", volume_flags.seed)->capture_default_str();
  add_output_flags(volume, volume_out);

  SimulateFlags sim_flags;
  OutputFlags sim_out;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo play");
  add_game_flags(simulate, sim_flags.games);
  simulate->add_option("--turns", sim_flags.turns, "number of turns");
  simulate->add_option("--seed", sim_flags.seed, "PRNG seed");
  simulate->add_option("--stream", sim_flags.stream)->capture_default_str();
  add_output_flags(simulate, sim_out);

  ReduceFlags reduce_flags;
  OutputFlags reduce_out;
  auto* reduce_info = app.add_subcommand("reduce-info", "symmetry classes of {0,1}^N");
  reduce_info->add_option("--N", reduce_flags.players)->capture_default_str();
  reduce_info->add_option("--group", reduce_flags.group, "cyclic, dihedral or none")
      ->capture_default_str();
  reduce_info->add_flag("--list", reduce_flags.list, "list the classes");
  add_output_flags(reduce_info, reduce_out);

  std::vector<const char*> argv{"parrondo"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    Payload payload;
    const OutputFlags* o = nullptr;
    if (mean->parsed()) {
      payload = cmd_mean(mean_flags, mean_group, mean_variance);
      o = &mean_out;
    } else if (table->parsed()) {
      payload = cmd_table(table_flags);
      o = &table_out;
    } else if (sweep->parsed()) {
      payload = cmd_sweep(sweep_flags);
      o = &sweep_out;
    } else if (volume->parsed()) {
      payload = cmd_volume(volume_flags);
      o = &volume_out;
    } else if (simulate->parsed()) {
      payload = cmd_simulate(sim_flags);
      o = &sim_out;
    } else {
      payload = cmd_reduce_info(reduce_flags);
      o = &reduce_out;
    }
    payload.doc["config"]["output"] = o->format;
    emit(render(payload.doc, o->format, payload.csv), *o, out);
    return payload.exit_code;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const StructuralError& e) {
    err << "structural error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << " (last residual " << e.last_residual()
        << ")\n";
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace parrondo
