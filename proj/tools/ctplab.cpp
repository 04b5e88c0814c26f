#include "ctplab/dot.hpp"
#include "ctplab/io.hpp"
#include "ctplab/verify.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace ctplab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;
constexpr int kExitCap = 3;

std::string certificate_path(const std::string& out) {
  std::filesystem::path p(out);
  if (p.extension() == ".json") p.replace_extension();
  return p.string() + ".cert.json";
}

Rational rational_flag(const std::string& text, const char* name) {
  try {
    return Rational::parse(text);
  } catch (const std::exception&) {
    throw InputError(std::string("--") + name + ": not a rational: '" + text + "'");
  }
}

VcInstance graph_flag(const std::string& g, long long k) {
  if (g == "k3") return VcInstance::triangle(k);
  if (g == "p3") return VcInstance::path3(k);
  return vc_from_json(json::parse(read_text(g)), k);
}

struct Flags {
  std::size_t cap = kDefaultWeatherCap;
  std::uint64_t seed = 1;
  std::size_t trials = 0;
  std::string alpha = "1/2";
  std::string h;
  long long precision = 32;
  std::string json_out;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--cap", f.cap, "Enumeration and belief cap");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--trials", f.trials, "Trial count");
  cmd->add_option("--alpha", f.alpha, "Sensing reduction alpha (rational)");
  cmd->add_option("--h", f.h, "Default edge cost for the dependent reduction (rational)");
  cmd->add_option("--precision", f.precision, "Bits of the dyadic epsilon");
  cmd->add_option("--json", f.json_out, "Write a JSON report here");
}

void print_breakdown(const Instance& inst, const EvalResult& r) {
  (void)inst;
  std::cout << pretty(r.expected_cost) << "\n";
  for (const auto& o : r.breakdown)
    std::cout << "  " << o.label << "  p=" << o.probability.str() << "  cost=" << o.conditional_cost.str() << "\n";
}

Policy load_policy(const Instance& inst, const std::string& spec, const std::string& params) {
  if (std::filesystem::exists(spec)) return policy_from_json(inst, json::parse(read_text(spec)));
  json p = params.empty() ? json::object() : json::parse(params);
  return reference_policy(spec, p);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact tools for the Canadian traveler problem and its hardness reductions"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  Flags flags;

  auto* reduce = app.add_subcommand("reduce", "Build a reduction instance and its certificate");
  std::string kind, input, output;
  long long k = -1;
  reduce->add_option("kind", kind, "ctpdep, ctp or sensing")->required()->check(CLI::IsMember({"ctpdep", "ctp", "sensing"}));
  reduce->add_option("input", input, "QDIMACS file, or graph JSON for sensing")->required();
  reduce->add_option("-o,--output", output, "Instance JSON path")->required();
  reduce->add_option("--k", k, "Cover budget for sensing");
  add_common(reduce, flags);

  auto* solve = app.add_subcommand("solve", "Optimal policy, or exact evaluation of a given policy");
  std::string instance_path, policy_spec, policy_params, tree_out;
  solve->add_option("instance", instance_path, "Instance JSON")->required();
  solve->add_option("--policy", policy_spec, "Reference policy name or policy JSON file");
  solve->add_option("--params", policy_params, "JSON parameters for a reference policy");
  solve->add_option("--tree", tree_out, "Write the optimal decision tree as JSON");
  add_common(solve, flags);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo cost of a policy");
  sim->add_option("instance", instance_path, "Instance JSON")->required();
  sim->add_option("--policy", policy_spec, "Reference policy name or policy JSON file")->required();
  sim->add_option("--params", policy_params, "JSON parameters for a reference policy");
  unsigned threads = 1;
  sim->add_option("--threads", threads, "Worker threads");
  add_common(sim, flags);

  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  std::string suite, L_text, graph = "k3", qbf_input;
  long long vn = 2, vm = 1;
  verify->add_option("suite", suite, "gadgets, ctpdep, ctp-cert, sensing or oracle")
      ->required()
      ->check(CLI::IsMember(verify_suite_names()));
  verify->add_option("--L", L_text, "Gadget length parameter");
  verify->add_option("--n", vn, "Variables");
  verify->add_option("--m", vm, "Clauses");
  verify->add_option("--graph", graph, "k3, p3 or a graph JSON file");
  verify->add_option("--k", k, "Cover budget");
  verify->add_option("--input", qbf_input, "QDIMACS file for the ctpdep suite");
  add_common(verify, flags);

  auto* dot = app.add_subcommand("export-dot", "Render an instance as Graphviz DOT");
  dot->add_option("instance", instance_path, "Instance JSON")->required();
  dot->add_option("-o,--output", output, "DOT path")->required();

  auto* qbf = app.add_subcommand("qbf", "Decide a QDIMACS formula");
  qbf->add_option("input", input, "QDIMACS file")->required();

  auto* gadget = app.add_subcommand("gadget", "Write an isolated gadget harness instance");
  std::string gkind, K_text;
  bool no_fallback = false;
  gadget->add_option("kind", gkind, "baiting or observation")->required()->check(CLI::IsMember({"baiting", "observation"}));
  gadget->add_option("--L", L_text, "Length parameter")->required();
  gadget->add_option("--K", K_text, "Terminal charge for the baiting harness (default L)");
  gadget->add_flag("--no-fallback", no_fallback, "Omit the cost-1 fallback edge");
  gadget->add_option("-o,--output", output, "Instance JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*reduce) {
      if (kind == "sensing") {
        auto vc = vc_from_json(json::parse(read_text(input)), k >= 0 ? std::optional<long long>(k) : std::nullopt);
        Rational alpha = rational_flag(flags.alpha, "alpha");
        auto red = vc_to_sensing(vc, alpha, flags.precision);
        write_json(output, instance_to_json(red.instance));
        json cert = certificate_to_json(red.cert);
        cert["provenance"] =
            provenance("vc_to_sensing", vc_canonical(vc), {{"alpha", alpha.str()}, {"k", vc.k}, {"precision", flags.precision}});
        write_json(certificate_path(output), cert);
        std::cout << "wrote " << output << " and " << certificate_path(output) << "\n";
        return kExitOk;
      }
      auto text = read_text(input);
      QbfFormula f;
      try {
        f = parse_qdimacs_string(text);
      } catch (const ParseError& e) {
        throw InputError(input + ": " + e.what());
      }
      if (kind == "ctpdep") {
        CtpDepOptions opts;
        if (!flags.h.empty()) opts.h = rational_flag(flags.h, "h");
        auto red = qbf_to_ctpdep(f, opts);
        write_json(output, instance_to_json(red.instance));
        json cert{{"h", red.h.str()}, {"n", f.n}, {"m", f.m()}, {"satisfiable", qbf_eval(f)}};
        cert["provenance"] = provenance("qbf_to_ctpdep", f.to_qdimacs(), {{"h", red.h.str()}});
        write_json(certificate_path(output), cert);
      } else {
        auto red = qbf_to_ctp(f);
        write_json(output, instance_to_json(red.instance));
        json cert = certificate_to_json(red.cert);
        cert["full_trip"] = red.full_trip;
        cert["provenance"] = provenance("qbf_to_ctp", f.to_qdimacs(), {{"n", red.cert.n}, {"m", red.cert.m}, {"L", red.cert.L.str()}});
        write_json(certificate_path(output), cert);
      }
      std::cout << "wrote " << output << " and " << certificate_path(output) << "\n";
      return kExitOk;
    }

    if (*solve) {
      auto inst = read_instance(instance_path);
      if (!policy_spec.empty()) {
        auto r = evaluate_exact(inst, load_policy(inst, policy_spec, policy_params), {EvalMode::Auto, flags.cap});
        print_breakdown(inst, r);
        if (!flags.json_out.empty()) {
          json bd = json::array();
          for (const auto& o : r.breakdown)
            bd.push_back({{"label", o.label}, {"probability", o.probability.str()}, {"conditional_cost", o.conditional_cost.str()}});
          write_json(flags.json_out, {{"expected_cost", r.expected_cost.str()}, {"breakdown", bd}});
        }
        return kExitOk;
      }
      auto r = solve_exact(inst, {flags.cap});
      std::string fa = r.optimal_first_action ? describe(inst, *r.optimal_first_action, r.first_belief.position) : "none";
      std::cout << pretty(r.optimal_cost) << ", " << fa << "\n";
      if (!flags.json_out.empty())
        write_json(flags.json_out, {{"optimal_cost", r.optimal_cost.str()},
                                    {"first_action", fa},
                                    {"beliefs_expanded", r.stats.beliefs_expanded}});
      if (!tree_out.empty()) write_json(tree_out, policy_to_json(inst, Policy{r.policy}, flags.cap));
      return kExitOk;
    }

    if (*sim) {
      auto inst = read_instance(instance_path);
      std::size_t trials = flags.trials == 0 ? 10000 : flags.trials;
      auto r = simulate(inst, load_policy(inst, policy_spec, policy_params), trials, flags.seed, threads);
      std::cout.precision(17);
      std::cout << "mean " << r.mean << "  stderr " << r.stderr_ << "  trials " << r.trials << "\n";
      return kExitOk;
    }

    if (*verify) {
      VerifyOptions o;
      if (!L_text.empty()) o.L = rational_flag(L_text, "L");
      o.n = vn;
      o.m = vm;
      o.graph = graph_flag(graph, k >= 0 ? k : 1);
      o.alpha = rational_flag(flags.alpha, "alpha");
      o.precision = flags.precision;
      o.seed = flags.seed;
      if (flags.trials) o.trials = flags.trials;
      o.cap = flags.cap;
      if (!qbf_input.empty()) o.formulas.push_back(read_qdimacs(qbf_input));
      auto report = run_verify(suite, o);
      report.print(std::cout);
      if (!flags.json_out.empty()) write_json(flags.json_out, report.to_json());
      return report.pass() ? kExitOk : kExitFail;
    }

    if (*dot) {
      auto inst = read_instance(instance_path);
      write_text(output, export_dot(inst));
      return kExitOk;
    }

    if (*qbf) {
      auto f = read_qdimacs(input);
      std::cout << (qbf_eval(f) ? "SAT" : "UNSAT") << "\n";
      return kExitOk;
    }

    if (*gadget) {
      Rational L = rational_flag(L_text, "L");
      std::optional<Rational> fb;
      if (!no_fallback) fb = Rational(1);
      Instance inst = gkind == "baiting"
                          ? build_baiting_harness(L, K_text.empty() ? L : rational_flag(K_text, "K"), fb)
                          : build_observation_harness(L, fb);
      write_json(output, instance_to_json(inst));
      return kExitOk;
    }
  } catch (const CapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCap;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InstanceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const PolicyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitOk;
}
