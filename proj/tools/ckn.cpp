// ckn: symmetry breaking diagrams for the CKN quotient on the cylinder.

#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ckn/commands.hpp"
#include "ckn/error.hpp"

namespace {

enum Exit { ok = 0, internal = 1, config = 2, solver = 3, io = 4 };

struct Flags {
  std::string config;
  int d = 0;
  double p = 0, L = 0, mu0_factor = 0, eps = 0, eta = 0, kappa_stop = 0;
  int ns = 0, nphi = 0;
  std::vector<double> theta;
  std::string measure_mode, out;
  std::vector<std::pair<CLI::Option*, std::function<void(ckn::RunConfig&)>>> set;

  void attach(CLI::App* sub) {
    sub->add_option("--config", config, "JSON run configuration");
    auto add = [&](const char* name, auto& target, const char* help, auto apply) {
      set.emplace_back(sub->add_option(name, target, help), apply);
    };
    add("--d", d, "dimension", [this](ckn::RunConfig& c) { c.d = d; });
    add("--p", p, "exponent", [this](ckn::RunConfig& c) { c.p = p; });
    set.emplace_back(sub->add_option("--theta", theta, "theta values (repeat or comma separated)")->delimiter(','),
                     [this](ckn::RunConfig& c) { c.theta_list = theta; });
    add("--L", L, "half-length of the truncated cylinder", [this](ckn::RunConfig& c) { c.L = L; });
    add("--ns", ns, "nodes in s (odd)", [this](ckn::RunConfig& c) { c.n_s = ns; });
    add("--nphi", nphi, "nodes in phi", [this](ckn::RunConfig& c) { c.n_phi = nphi; });
    add("--measure-mode", measure_mode, "surface or probability",
        [this](ckn::RunConfig& c) { c.measure_mode = ckn::measure_mode_from_string(measure_mode); });
    add("--mu0-factor", mu0_factor, "initialization at mu0 = factor mu_FS",
        [this](ckn::RunConfig& c) { c.mu0_factor = mu0_factor; });
    add("--eps", eps, "perturbation size", [this](ckn::RunConfig& c) { c.eps = eps; });
    add("--eta", eta, "continuation step in kappa", [this](ckn::RunConfig& c) { c.eta = eta; });
    add("--kappa-stop", kappa_stop, "end of the upward continuation",
        [this](ckn::RunConfig& c) { c.kappa_stop = kappa_stop; });
    add("--out", out, "output directory", [this](ckn::RunConfig& c) { c.out_dir = out; });
  }

  ckn::RunConfig resolve() const {
    ckn::RunConfig c = config.empty() ? ckn::RunConfig{} : ckn::load_config(config);
    for (const auto& [opt, apply] : set)
      if (opt->count() > 0) apply(c);
    c.validate();
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetry breaking of CKN extremals on the cylinder"};
  app.require_subcommand(1);
  Flags flags;
  std::function<void(const ckn::RunConfig&)> action;

  auto* sym = app.add_subcommand("symmetric-curve", "closed-form symmetric curves");
  auto* branch = app.add_subcommand("branch", "compute the non-symmetric branch");
  auto* analyze = app.add_subcommand("analyze", "crossings, envelopes and the GN level of a branch");
  auto* gn = app.add_subcommand("gn-limit", "GN ground state, J_inf and Lambda_GN");
  auto* figs = app.add_subcommand("reproduce-figures", "default sweep over p and theta");
  for (auto* s : {sym, branch, analyze, gn, figs}) flags.attach(s);
  sym->callback([&] { action = [](const ckn::RunConfig& c) { ckn::cmd_symmetric_curve(c, std::clog); }; });
  branch->callback([&] { action = [](const ckn::RunConfig& c) { ckn::cmd_branch(c, std::clog); }; });
  analyze->callback([&] { action = [](const ckn::RunConfig& c) { ckn::cmd_analyze(c, std::clog); }; });
  gn->callback([&] { action = [](const ckn::RunConfig& c) { ckn::cmd_gn_limit(c, std::clog); }; });
  figs->callback([&] { action = [](const ckn::RunConfig& c) { ckn::cmd_reproduce_figures(c, std::clog); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return config;
  }

  try {
    action(flags.resolve());
  } catch (const ckn::Error& e) {
    std::cerr << "ckn: " << e.what() << "\n";
    switch (e.category()) {
      case ckn::Error::Category::config: return config;
      case ckn::Error::Category::solver: return solver;
      case ckn::Error::Category::io: return io;
    }
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "ckn: " << e.what() << "\n";
    return io;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "ckn: " << e.what() << "\n";
    return config;
  } catch (const std::exception& e) {
    std::cerr << "ckn: internal error: " << e.what() << "\n";
    return internal;
  }
  return ok;
}
