#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "carpenter/carpenter.hpp"
#include "carpenter/errors.hpp"
#include "carpenter/io.hpp"
#include "carpenter/verify.hpp"

namespace {

using namespace carpenter;
using nlohmann::json;

enum Exit { kOk = 0, kInputError = 1, kInfeasible = 2, kCheckFailed = 3 };

struct Config {
  std::string input;
  std::string output;
  std::string diagonal;
  std::string mode = "exact";
  std::string pipeline = "shortcut";
  std::string format = "csv";
  double epsilon = 1e-6;
  std::size_t rows = 100;
  std::uint64_t seed = 1;
  std::size_t n = 6;
  std::size_t rank = 3;
  std::size_t trials = 1000;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to `path`, or stdout when empty.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw InvalidInput("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void write_json(const std::string& path, const json& doc) {
  Sink sink(path);
  sink.stream() << doc.dump(2) << '\n';
}

void check_output_dir(const std::string& path) {
  if (path.empty()) return;
  std::ofstream probe(path, std::ios::app);
  if (!probe) throw InvalidInput("cannot write " + path);
}

int run_classify(const Config& cfg) {
  const auto spec = io::parse_spec(slurp(cfg.input));
  const auto report = classify(spec);
  write_json(cfg.output, io::to_json(report));
  spdlog::info("verdict {}", to_string(report.verdict));
  return report.verdict == Verdict::Infeasible ? kInfeasible : kOk;
}

BuildOptions options_from(const Config& cfg) {
  BuildOptions o;
  o.mode = cfg.mode == "approximate" ? BuildOptions::Mode::Approximate : BuildOptions::Mode::Exact;
  o.pipeline =
      cfg.pipeline == "full" ? BuildOptions::Pipeline::Full : BuildOptions::Pipeline::Shortcut;
  o.epsilon = cfg.epsilon;
  o.truncation_rows = cfg.rows;
  return o;
}

int run_build(const Config& cfg) {
  const auto spec = io::parse_spec(slurp(cfg.input));
  check_output_dir(cfg.output);
  const std::string report_path = cfg.output.empty() ? "" : cfg.output + ".report.json";
  BuildResult result;
  try {
    result = build(spec, options_from(cfg));
  } catch (const Infeasible& e) {
    json doc{{"classification", io::to_json(e.report())}, {"error", e.what()}};
    if (report_path.empty()) {
      std::cerr << doc.dump(2) << '\n';
    } else {
      write_json(report_path, doc);
    }
    spdlog::info("{}", e.what());
    return kInfeasible;
  }
  if (!result.notice.empty()) spdlog::info("{}", result.notice);

  {
    Sink sink(cfg.output);
    if (cfg.format == "json") {
      json rows = json::array();
      for (std::size_t i = 0; i < result.matrix.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < result.matrix.size(); ++j) row.push_back(result.matrix(i, j));
        rows.push_back(std::move(row));
      }
      sink.stream() << json{{"matrix", rows}, {"indices", result.indices}}.dump() << '\n';
    } else {
      io::write_csv(sink.stream(), result.matrix.view());
    }
  }

  std::vector<int> exact(result.exact.begin(), result.exact.end());
  json doc{{"classification", io::to_json(result.classification)},
           {"verification", io::to_json(result.report)},
           {"indices", result.indices},
           {"target", result.target},
           {"exact", exact},
           {"approximate", result.approximate},
           {"approximation_error", result.approximation_error},
           {"streamed", result.streamed},
           {"notice", result.notice},
           {"moves", result.plan.size()}};
  if (report_path.empty()) {
    std::cerr << doc.dump(2) << '\n';
  } else {
    write_json(report_path, doc);
    if (!result.plan.empty()) {
      std::ofstream plan(cfg.output + ".plan.jsonl");
      write_plan_jsonl(plan, result.plan);
    }
  }
  if (!result.report.pass()) {
    spdlog::error("verification failed: idempotence {}, diagonal {}",
                  result.report.idempotence_defect, result.report.diagonal_max_error);
    return kCheckFailed;
  }
  return kOk;
}

int run_stream(const Config& cfg) {
  const auto spec = io::parse_spec(slurp(cfg.input));
  check_output_dir(cfg.output);
  const auto report = classify(spec);
  if (report.verdict == Verdict::Infeasible) {
    std::cerr << io::to_json(report).dump(2) << '\n';
    return kInfeasible;
  }
  if (report.verdict != Verdict::CaseII) {
    throw InvalidInput("stream needs a diagonal with a = infinity or b = infinity; use build");
  }
  auto plan = build_case2(spec);
  const bool tagged = plan.streams.size() > 1;
  json columns = json::array();
  {
    Sink sink(cfg.output);
    for (std::size_t b = 0; b < plan.streams.size(); ++b) {
      auto& stream = *plan.streams[b];
      for (std::size_t r = 0; r < cfg.rows; ++r) {
        const auto& row = stream.next_row();
        sink.stream() << io::row_to_json(row, tagged ? static_cast<long>(b) : -1).dump() << '\n';
      }
      json c = io::to_json(stream.completed_columns());
      c["block"] = b;
      c["gram_defect"] = check_rows(stream.rows());
      columns.push_back(std::move(c));
    }
  }
  json doc{{"complemented", plan.complemented}, {"blocks", columns}};
  if (cfg.output.empty()) {
    std::cerr << doc.dump(2) << '\n';
  } else {
    write_json(cfg.output + ".columns.json", doc);
  }
  return kOk;
}

int run_verify(const Config& cfg) {
  if (cfg.diagonal.empty()) throw InvalidInput("verify needs --diagonal");
  std::ifstream in(cfg.input);
  if (!in) throw InvalidInput("cannot open " + cfg.input);
  const auto matrix = io::read_csv(in);
  const auto d = io::parse_diagonal(slurp(cfg.diagonal));
  if (d.size() != matrix.n) {
    throw InvalidInput("diagonal has " + std::to_string(d.size()) + " entries, matrix is " +
                       std::to_string(matrix.n) + "x" + std::to_string(matrix.n));
  }
  const auto report = check_projection(matrix.view(), d);
  write_json(cfg.output, io::to_json(report));
  return report.pass() ? kOk : kCheckFailed;
}

int run_oracle(const Config& cfg) {
  if (cfg.rank > cfg.n) throw InvalidInput("--rank must not exceed --n");
  const auto result = necessity_oracle(cfg.n, cfg.rank, cfg.trials, cfg.seed);
  json doc = io::to_json(result);
  doc["n"] = cfg.n;
  doc["rank"] = cfg.rank;
  doc["seed"] = cfg.seed;
  write_json(cfg.output, doc);
  return result.passed ? kOk : kCheckFailed;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("carpenter");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* level = std::getenv("CARPENTER_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Orthogonal projections with a prescribed diagonal"};
  app.require_subcommand(1);
  Config cfg;

  auto add_io = [&](CLI::App* sub, bool input_required = true) {
    auto* opt = sub->add_option("--input,-i", cfg.input, "Input file");
    if (input_required) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--output,-o", cfg.output, "Output file (default: stdout)");
  };

  auto* classify_cmd = app.add_subcommand("classify", "Kadison invariants and verdict");
  add_io(classify_cmd);

  auto* build_cmd = app.add_subcommand("build", "Construct a projection");
  add_io(build_cmd);
  build_cmd->add_option("--mode", cfg.mode)->check(CLI::IsMember({"exact", "approximate"}));
  build_cmd->add_option("--epsilon", cfg.epsilon)->check(CLI::Range(0.0, 0.5));
  build_cmd->add_option("--rows", cfg.rows, "Rows per block for streamed inputs");
  build_cmd->add_option("--pipeline", cfg.pipeline)->check(CLI::IsMember({"shortcut", "full"}));
  build_cmd->add_option("--format", cfg.format)->check(CLI::IsMember({"csv", "json"}));
  build_cmd->add_option("--seed", cfg.seed, "Unused by build; accepted for uniformity");

  auto* stream_cmd = app.add_subcommand("stream", "Stream tetris rows as JSON lines");
  add_io(stream_cmd);
  stream_cmd->add_option("--rows", cfg.rows, "Rows per block");

  auto* verify_cmd = app.add_subcommand("verify", "Check a CSV matrix against a diagonal");
  add_io(verify_cmd);
  verify_cmd->add_option("--diagonal,-d", cfg.diagonal, "Diagonal JSON")
      ->required()
      ->check(CLI::ExistingFile);

  auto* oracle_cmd = app.add_subcommand("oracle", "Empirical necessity check on random projections");
  oracle_cmd->add_option("--output,-o", cfg.output);
  oracle_cmd->add_option("--n", cfg.n);
  oracle_cmd->add_option("--rank", cfg.rank);
  oracle_cmd->add_option("--trials", cfg.trials);
  oracle_cmd->add_option("--seed", cfg.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*classify_cmd) return run_classify(cfg);
    if (*build_cmd) return run_build(cfg);
    if (*stream_cmd) return run_stream(cfg);
    if (*verify_cmd) return run_verify(cfg);
    if (*oracle_cmd) return run_oracle(cfg);
  } catch (const io::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const NeedsMoreTerms& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const Infeasible& e) {
    std::cerr << io::to_json(e.report()).dump(2) << '\n';
    return kInfeasible;
  }
  return kInputError;
}
