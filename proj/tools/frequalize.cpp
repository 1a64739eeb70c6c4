#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "frequalize/error.hpp"
#include "frequalize/harness.hpp"

namespace fq = frequalize;
namespace fs = std::filesystem;

namespace {

std::vector<double> split_numbers(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(p, &used));
      if (used != p.size()) throw std::invalid_argument(p);
    } catch (const std::logic_error&) {
      throw fq::InputError(fmt::format("{} '{}': '{}' is not a number", flag, text, p));
    }
  }
  return out;
}

// "gaussian[:width]", "spike", "noise" or a path to an FQLZ dump
fq::Json input_spec(const std::string& text) {
  if (text == "spike" || text == "noise") return {{"generator", text}};
  if (text.rfind("gaussian", 0) == 0) {
    fq::Json j{{"generator", "gaussian"}};
    if (text.size() > 8) {
      if (text[8] != ':') throw fq::InputError(fmt::format("--input '{}': use gaussian:<width>", text));
      j["width"] = split_numbers(text.substr(9), "--input").at(0);
    }
    return j;
  }
  return {{"path", text}};
}

fq::Json times_spec(const std::string& text) {
  const auto t = fq::parse_times(text);
  return fq::Json(t);
}

void print_summary(const fq::RunOutput& r) {
  std::cout << "csv: " << r.csv.string() << "\n"
            << "summary: " << r.summary.string() << "\n";
  for (const auto& d : r.dumps) std::cout << "dump: " << d.string() << "\n";
  std::cout << r.summary_json.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frequalize: frequency-localized decay experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  bool dump = false;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", seed, "RNG seed (overrides the config)");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--dump", dump, "write FQLZ field dumps");

  auto* lp = app.add_subcommand("lp", "Littlewood-Paley checks");
  auto* lp_check = lp->add_subcommand("check", "partition defect and Bernstein ratios");
  std::string grid_path;
  lp_check->add_option("--grid", grid_path, "JSON file with a grid object");

  auto* besov = app.add_subcommand("besov", "Besov norms");
  auto* besov_norm = besov->add_subcommand("norm", "norm of a field");
  std::string spec_text, besov_input;
  besov_norm->add_option("--spec", spec_text, "s,p,r[,hom|inhom]");
  besov_norm->add_option("--input", besov_input, "FQLZ dump, gaussian[:width], spike or noise");

  auto* kernel = app.add_subcommand("kernel", "decay inequality");
  auto* kernel_verify = kernel->add_subcommand("verify", "both sides over a time grid");
  std::string rate_text, params_text, times_text, kernel_input;
  bool allow_violation = false;
  kernel_verify->add_option("--rate", rate_text, "a,b");
  kernel_verify->add_option("--params", params_text, "s,l,rho,r,alpha");
  kernel_verify->add_option("--times", times_text, "t0:t1:n[:log]");
  kernel_verify->add_option("--input", kernel_input, "FQLZ dump, gaussian[:width], spike or noise");
  kernel_verify->add_flag("--allow-violation", allow_violation, "evaluate outside the hypotheses");

  auto* linear = app.add_subcommand("linear", "linearized system");
  auto* linear_gap = linear->add_subcommand("gap", "spectral gap sweep");
  std::string xi_range, binf;
  linear_gap->add_option("--xi-range", xi_range, "a:b:n (log-spaced)");
  linear_gap->add_option("--binf", binf, "bx,by,bz");
  auto* linear_decay = linear->add_subcommand("decay", "continuum decay table");
  std::string decay_data, decay_times;
  linear_decay->add_option("--data", decay_data, "gaussian or high_frequency");
  linear_decay->add_option("--times", decay_times, "t0:t1:n[:log]");
  linear->require_subcommand(1);

  auto* nonlinear = app.add_subcommand("nonlinear", "nonlinear decay experiment");

  auto* report = app.add_subcommand("report", "compare fitted exponents");
  std::vector<std::string> report_paths;
  report->add_option("summaries", report_paths, "summary JSON files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    fq::RunOptions opt;
    opt.seed = seed;
    opt.out = out_dir;
    opt.dump = dump;
    if (!config_path.empty()) opt.config = fq::load_config(config_path);
    if (!opt.config.is_object()) throw fq::InputError("config /: expected an object");
    fq::Json& cfg = opt.config;

    fq::RunOutput result;
    if (*lp) {
      if (!grid_path.empty()) {
        fq::Json g = fq::load_config(grid_path);
        cfg["grid"] = g.is_object() && g.contains("grid") ? g["grid"] : g;
      }
      result = fq::run_lp(opt);
    } else if (*besov) {
      if (!spec_text.empty()) {
        std::stringstream ss(spec_text);
        std::vector<std::string> parts;
        for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
        if (parts.size() < 3 || parts.size() > 4)
          throw fq::InputError(fmt::format("--spec '{}': expected s,p,r[,hom]", spec_text));
        fq::Json s;
        s["s"] = split_numbers(parts[0], "--spec").at(0);
        for (int k : {1, 2}) {
          const char* key = k == 1 ? "p" : "r";
          s[key] = parts[k] == "inf" ? fq::Json("inf") : fq::Json(split_numbers(parts[k], "--spec").at(0));
        }
        if (parts.size() == 4) {
          if (parts[3] != "hom" && parts[3] != "inhom")
            throw fq::InputError(fmt::format("--spec '{}': last field must be hom or inhom", spec_text));
          s["homogeneous"] = parts[3] == "hom";
        }
        cfg["spec"] = s;
      }
      if (!besov_input.empty()) cfg["input"] = input_spec(besov_input);
      result = fq::run_besov(opt);
    } else if (*kernel) {
      if (!rate_text.empty()) {
        const auto v = split_numbers(rate_text, "--rate");
        if (v.size() != 2) throw fq::InputError("--rate: expected a,b");
        cfg["rate"] = {{"a", v[0]}, {"b", v[1]}};
      }
      if (!params_text.empty()) {
        const auto v = split_numbers(params_text, "--params");
        if (v.size() != 5) throw fq::InputError("--params: expected s,l,rho,r,alpha");
        cfg["params"] = {{"s", v[0]}, {"ell", v[1]}, {"rho", v[2]}, {"r", v[3]}, {"alpha", v[4]}};
      }
      if (!times_text.empty()) cfg["times"] = times_spec(times_text);
      if (!kernel_input.empty()) cfg["input"] = input_spec(kernel_input);
      if (allow_violation) cfg["allow_violation"] = true;
      result = fq::run_kernel(opt);
    } else if (*linear) {
      if (*linear_gap) {
        cfg["linear"]["mode"] = "gap";
        if (!xi_range.empty()) {
          const auto r = fq::parse_times(xi_range + ":log");
          cfg["linear"]["gap"]["xi_min"] = r.front();
          cfg["linear"]["gap"]["xi_max"] = r.back();
          cfg["linear"]["gap"]["count"] = r.size();
        }
        if (!binf.empty()) {
          const auto b = split_numbers(binf, "--binf");
          if (b.size() != 3) throw fq::InputError("--binf: expected bx,by,bz");
          cfg["equilibrium"]["B_inf"] = b;
        }
      } else {
        cfg["linear"]["mode"] = "decay";
        if (!decay_data.empty()) cfg["linear"]["decay"]["data"] = decay_data;
        if (!decay_times.empty()) cfg["linear"]["decay"]["times"] = times_spec(decay_times);
      }
      result = fq::run_linear(opt);
    } else if (*nonlinear) {
      result = fq::run_nonlinear(opt);
    } else if (*report) {
      std::vector<fs::path> paths(report_paths.begin(), report_paths.end());
      result = fq::run_report(paths, opt.out);
    }
    print_summary(result);
    return 0;
  } catch (const fq::HypothesisError& e) {
    std::cerr << "hypothesis error: " << e.what() << "\n";
    return 2;
  } catch (const fq::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const fq::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const fq::Json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
