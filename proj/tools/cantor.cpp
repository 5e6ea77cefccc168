#include <iostream>

#include <CLI11.hpp>

#include "cantor/cli.hpp"

using cantor::cli::RunConfig;

namespace {

void add_family(CLI::App* sub, RunConfig& c) {
  sub->add_option("--family", c.family, "ref2, poly:L,t, slow:s, geom:t, tower, qalpha:p/q, const:c, table:<path>[,monotone-after=N]")
      ->capture_default_str();
}

void add_policy(CLI::App* sub, RunConfig& c) {
  sub->add_option("--policy", c.policy, "min, max, mid, random[:seed], index:k")->capture_default_str();
  sub->add_option("--seed", c.seed, "seed for the random policy")->capture_default_str();
}

void add_output(CLI::App* sub, RunConfig& c, std::string& fmt) {
  sub->add_option("--format,--emit", fmt, "csv or jsonl")->capture_default_str();
  sub->add_option("-o,--output", c.output, "output file (default stdout)");
  sub->add_flag("--check", c.check, "exit 1 when any row fails its assertion");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  std::string fmt = "csv";
  CLI::App app{"Q-special digit streams, discrepancy envelopes and dimension estimators"};
  app.require_subcommand(1);

  auto* ladder = app.add_subcommand("ladder", "rows (i, nu_{i+1}, l_i, L_i)");
  add_family(ladder, cfg);
  ladder->add_option("--max-i", cfg.max_i)->capture_default_str();

  auto* digits = app.add_subcommand("digits", "rows (n, a, b, c, q_n, lo, hi, E_n)");
  add_family(digits, cfg);
  add_policy(digits, cfg);
  digits->add_option("--count", cfg.count)->capture_default_str();

  auto* value = app.add_subcommand("value", "exact convergent of x_F and a rounded decimal");
  add_family(value, cfg);
  add_policy(value, cfg);
  value->add_option("--prefix", cfg.prefix)->capture_default_str();
  value->add_option("--decimals", cfg.decimals)->capture_default_str();

  auto* validate = app.add_subcommand("validate", "check a digit prefix against the admissible windows");
  add_family(validate, cfg);
  validate->add_option("--digits", cfg.digits_path, "digits file: `digits` output or one integer per line; - for stdin");

  auto* disc = app.add_subcommand("discrepancy", "exact D*_n(y_F) at geometric checkpoints with envelopes");
  add_family(disc, cfg);
  add_policy(disc, cfg);
  disc->add_option("--max-n", cfg.max_n)->capture_default_str();
  disc->add_option("--ratio", cfg.ratio, "checkpoint ratio r: checkpoints floor(r^k)")->capture_default_str();
  disc->add_option("--psi", cfg.psi)->capture_default_str();
  disc->add_option("--M", cfg.m, "growth constant M of the nu-gap hypothesis")->capture_default_str();

  auto* aap = app.add_subcommand("aap-check", "AAP-(1/a,1/a) and D* <= 2/a for every box");
  add_family(aap, cfg);
  add_policy(aap, cfg);
  aap->add_option("--max-n", cfg.max_n)->capture_default_str();

  auto* dim = app.add_subcommand("dimension", "level-scale box ratio and Hausdorff lower bounds");
  add_family(dim, cfg);
  dim->add_option("--max-k", cfg.max_k)->capture_default_str();
  dim->add_option("--report", cfg.report, "comma list of box, hausdorff, qalpha")->capture_default_str();

  auto* qa = app.add_subcommand("qalpha", "terms of Q_alpha, or the V_k bracket check with --brackets K");
  qa->add_option("--alpha", cfg.alpha)->capture_default_str();
  qa->add_option("--terms", cfg.terms)->capture_default_str();
  qa->add_option("--brackets", cfg.brackets, "check even k <= K");

  auto* diag = app.add_subcommand("diagnose", "growth-class ratio columns");
  add_family(diag, cfg);
  diag->add_option("--max-k", cfg.max_k)->capture_default_str();

  for (auto* sub : {ladder, digits, value, validate, disc, aap, dim, qa, diag}) add_output(sub, cfg, fmt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  try {
    cfg.format = cantor::cli::parse_format(fmt);
  } catch (const cantor::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return cantor::cli::run(app.get_subcommands().front()->get_name(), cfg, std::cout, std::cerr);
}
