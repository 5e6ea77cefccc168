#pragma once

// Command dispatch behind the `cantor` tool. Every command emits CSV
// (header + rows) or JSONL (one object per row); rationals are written as
// exact numerator/denominator strings with a float companion.

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cantor/construction.hpp"
#include "cantor/dimension.hpp"
#include "cantor/discrepancy.hpp"

namespace cantor::cli {

using Row = nlohmann::ordered_json;

enum class Format { Csv, Jsonl };

struct RunConfig {
  std::string family = "ref2";
  std::string policy = "min";
  std::uint64_t seed = 0;
  Position max_n = 100000;
  std::uint64_t max_k = 20;
  std::uint64_t max_i = 10;
  Position count = 10;
  Position prefix = 10;
  unsigned decimals = 30;
  double ratio = 1.15;
  double psi = 1.1;
  double m = 1.0;
  Format format = Format::Csv;
  std::string output;  // empty: stdout
  bool check = false;
  std::string digits_path;
  std::string alpha = "1/2";
  Position terms = 10;
  std::uint64_t brackets = 0;
  std::string report = "box,hausdorff";
};

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "jsonl") return Format::Jsonl;
  throw Error(ErrorKind::Config, "unknown format '" + s + "' (csv or jsonl)");
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline Row float_field(double v) { return std::isfinite(v) ? Row(v) : Row(nullptr); }

inline Row integer_field(const Integer& x) {
  if (x >= 0 && mpz_sizeinbase(x.get_mpz_t(), 2) <= 63) return Row(to_u64(x));
  return Row(x.get_str());
}

/// Adds <key>_num, <key>_den and <key>_float.
inline void put_rational(Row& row, const std::string& key, const Rational& x) {
  row[key + "_num"] = x.get_num().get_str();
  row[key + "_den"] = x.get_den().get_str();
  row[key + "_float"] = float_field(to_double(x));
}

inline std::string magnitude_field(const Magnitude& m) {
  return m.finite() ? format_double(m.value()) : m.to_string();
}

class Emitter {
 public:
  Emitter(std::ostream& out, Format fmt) : out_(out), fmt_(fmt) {}

  void emit(const Row& row) {
    if (fmt_ == Format::Jsonl) {
      out_ << row.dump() << '\n';
      return;
    }
    if (!header_done_) {
      bool first = true;
      for (const auto& [k, v] : row.items()) {
        out_ << (first ? "" : ",") << k;
        first = false;
      }
      out_ << '\n';
      header_done_ = true;
    }
    bool first = true;
    for (const auto& [k, v] : row.items()) {
      out_ << (first ? "" : ",") << csv_cell(v);
      first = false;
    }
    out_ << '\n';
  }

 private:
  static std::string csv_cell(const Row& v) {
    std::string s;
    if (v.is_null()) return s;
    if (v.is_string()) s = v.get<std::string>();
    else if (v.is_boolean()) s = v.get<bool>() ? "true" : "false";
    else if (v.is_number_float()) s = format_double(v.get<double>());
    else s = v.dump();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }

  std::ostream& out_;
  Format fmt_;
  bool header_done_ = false;
};

/// Result of a command body: number of failed assertions (only counted in
/// --check mode) and lines for the stderr summary.
struct Outcome {
  std::uint64_t failures = 0;
  std::vector<std::string> notes;
};

namespace detail {

inline SelectionPolicy policy_of(const RunConfig& c) { return SelectionPolicy::parse(c.policy, c.seed); }

inline LadderPtr ladder_of(const RunConfig& c) {
  SequencePtr q = parse_family(c.family);
  try {
    return make_ladder(q);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
}

inline Outcome cmd_ladder(const RunConfig& c, Emitter& em) {
  auto lad = ladder_of(c);
  for (std::uint64_t i = 1; i <= c.max_i; ++i) {
    Row r;
    r["i"] = i;
    r["nu_next"] = lad->nu(i + 1);
    r["l"] = lad->l(i);
    r["L"] = lad->L(i);
    em.emit(r);
  }
  return {};
}

inline Outcome cmd_digits(const RunConfig& c, Emitter& em) {
  auto lad = ladder_of(c);
  SelectionPolicy p = policy_of(c);
  for (Position n = 1; n <= c.count; ++n) {
    DigitWindow w = digit_window(*lad, n);
    Row r;
    r["n"] = n;
    r["a"] = w.box.a;
    r["b"] = w.box.b;
    r["c"] = w.box.c;
    r["q"] = integer_field(w.q);
    r["lo"] = integer_field(w.lo);
    r["hi"] = integer_field(w.hi);
    r["E"] = integer_field(select_digit(w, p));
    em.emit(r);
  }
  return {};
}

inline Outcome cmd_value(const RunConfig& c, Emitter& em) {
  auto lad = ladder_of(c);
  if (c.prefix == 0) throw Error(ErrorKind::Config, "--prefix must be positive");
  SpecialStream s = digit_stream(lad, policy_of(c), c.prefix);
  Rational x = s.convergent(c.prefix);
  Row r;
  r["prefix"] = c.prefix;
  r["value"] = to_string(x);
  r["num"] = x.get_num().get_str();
  r["den"] = x.get_den().get_str();
  r["decimal"] = to_decimal(x, c.decimals);
  em.emit(r);
  return {};
}

/// Accepts the `digits` output (CSV with an E column, or JSONL with "E")
/// or a plain list with one integer per line.
inline std::vector<Integer> read_digits(std::istream& in) {
  std::vector<Integer> out;
  std::string line;
  std::optional<std::size_t> e_col;
  bool first = true;
  auto parse_int = [](const std::string& s) {
    try {
      return Integer(s);
    } catch (const std::invalid_argument&) {
      throw Error(ErrorKind::Config, "not an integer digit: '" + s + "'");
    }
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '{') {
      Row j;
      try {
        j = Row::parse(line);
      } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::Config, "bad JSONL line: " + line);
      }
      if (!j.contains("E")) throw Error(ErrorKind::Config, "JSONL row without \"E\"");
      out.push_back(j["E"].is_string() ? parse_int(j["E"].get<std::string>()) : parse_int(j["E"].dump()));
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (first && cells.size() > 1) {
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i] == "E") e_col = i;
      if (!e_col) throw Error(ErrorKind::Config, "CSV header without an E column");
      first = false;
      continue;
    }
    first = false;
    std::size_t col = e_col.value_or(0);
    if (col >= cells.size()) throw Error(ErrorKind::Config, "short CSV row: " + line);
    out.push_back(parse_int(cells[col]));
  }
  return out;
}

inline Outcome cmd_validate(const RunConfig& c, Emitter& em) {
  auto lad = ladder_of(c);
  std::vector<Integer> digits;
  if (c.digits_path.empty() || c.digits_path == "-") {
    digits = read_digits(std::cin);
  } else {
    std::ifstream in(c.digits_path);
    if (!in) throw Error(ErrorKind::Config, "cannot open '" + c.digits_path + "'");
    digits = read_digits(in);
  }
  PrefixVerdict v = validate_prefix(*lad, digits);
  Outcome o;
  for (const auto& p : v.positions) {
    Row r;
    r["n"] = p.n;
    r["E"] = integer_field(digits[p.n - 1]);
    r["valid"] = p.valid;
    r["reason"] = p.reason;
    em.emit(r);
    if (!p.valid) ++o.failures;
  }
  o.notes.push_back(v.valid ? "prefix valid (" + std::to_string(digits.size()) + " digits)"
                            : "prefix invalid at n = " + std::to_string(*v.first_invalid()));
  return o;
}

inline Outcome cmd_discrepancy(const RunConfig& c, Emitter& em) {
  auto lad = ladder_of(c);
  SpecialStream s(lad, policy_of(c));
  auto checkpoints = checkpoint_schedule(c.max_n, c.ratio);
  auto rows = envelope_report(s, checkpoints, {c.psi, c.m});
  Outcome o;
  for (const auto& e : rows) {
    Row r;
    r["n"] = e.n;
    r["i"] = e.i;
    put_rational(r, "Dstar", e.dstar);
    r["eps_bar_num"] = e.eps_bar.get_num().get_str();
    r["eps_bar_den"] = e.eps_bar.get_den().get_str();
    r["eps_bar_float"] = float_field(to_double(e.eps_bar));
    r["env_bdiscr3"] = e.env_bdiscr3;
    r["env_sqrt8"] = e.env_sqrt8;
    r["hypotheses"] = e.hypotheses_hold;
    em.emit(r);
    if (e.hypotheses_hold && !(e.dstar < e.eps_bar)) ++o.failures;
  }
  auto n0 = [&](auto pred) {
    auto v = empirical_crossover(std::span<const EnvelopeRow>(rows), pred);
    return v ? std::to_string(*v) : std::string("none");
  };
  o.notes.push_back("N0 sqrt8 envelope: " +
                    n0([](const EnvelopeRow& r) { return to_double(r.dstar) < r.env_sqrt8; }));
  o.notes.push_back("N0 constant-M envelope: " +
                    n0([](const EnvelopeRow& r) { return to_double(r.dstar) < r.env_bdiscr3; }));
  return o;
}

inline Outcome cmd_aap_check(const RunConfig& c, Emitter& em) {
  auto lad = ladder_of(c);
  SpecialStream s = digit_stream(lad, policy_of(c), c.max_n);
  Outcome o;
  std::uint64_t boxes = 0;
  for (std::uint64_t a = 1;; ++a) {
    bool any = false;
    for (std::uint64_t b = 1; b <= lad->l(a); ++b) {
      Position first = lad->phi({a, b, 1});
      if (first + a - 1 > c.max_n) break;
      any = true;
      BoxReport br = box_check(s, a, b);
      Row r;
      r["a"] = a;
      r["b"] = b;
      r["first"] = first;
      r["aap"] = a == 1 ? Row("trivial") : Row(br.aap && br.aap->feasible);
      if (br.aap && br.aap->feasible) {
        r["eta_lo"] = to_string(br.aap->eta_lo);
        r["eta_hi"] = to_string(br.aap->eta_hi);
      } else {
        r["eta_lo"] = nullptr;
        r["eta_hi"] = nullptr;
      }
      put_rational(r, "Dstar", br.dstar);
      r["bound"] = to_string(br.bound);
      r["ok"] = br.ok;
      r["diagnostic"] = br.diagnostic;
      em.emit(r);
      ++boxes;
      if (!br.ok) ++o.failures;
    }
    if (!any) break;
  }
  o.notes.push_back(std::to_string(boxes) + " boxes checked, " + std::to_string(o.failures) + " failing");
  return o;
}

inline bool has_report(const std::string& list, const std::string& item) {
  std::stringstream ss(list);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (tok == item) return true;
  return false;
}

inline Outcome cmd_dimension(const RunConfig& c, Emitter& em) {
  {
    std::stringstream ss(c.report);
    for (std::string tok; std::getline(ss, tok, ',');)
      if (tok != "box" && tok != "hausdorff" && tok != "qalpha")
        throw Error(ErrorKind::Config, "unknown report '" + tok + "'");
  }
  auto lad = ladder_of(c);
  const bool box = has_report(c.report, "box");
  const bool hd = has_report(c.report, "hausdorff");
  const bool qa = has_report(c.report, "qalpha");
  std::optional<QAlphaFamily> fam;
  if (qa) {
    if (c.family.rfind("qalpha:", 0) != 0) throw Error(ErrorKind::Config, "report qalpha needs a qalpha:p/q family");
    fam = qalpha_build(parse_rational(c.family.substr(7)), 0);
    lad = make_ladder(fam->sequence());
  }
  LevelTable t(lad);
  const bool ones = lad->all_ones_through(c.max_k);
  for (std::uint64_t k = 1; k <= c.max_k; ++k) {
    LevelRow lr = level_row(t, k);
    Row r;
    r["k"] = k;
    r["A"] = lr.A;
    r["gamma"] = lr.gamma;
    if (box) {
      r["log_omega"] = magnitude_field(lr.log_omega);
      r["log_q"] = magnitude_field(lr.log_q);
      r["box"] = float_field(lr.box);
    }
    if (hd) {
      r["hausdorff"] = lr.hausdorff ? float_field(*lr.hausdorff) : Row(nullptr);
      r["hausdorff_closed_form"] = ones && k >= 3 ? float_field(hausdorff_lower_estofhd(*lad, k)) : Row(nullptr);
    }
    if (qa) {
      const double lp = fam->log_p(k);
      r["target"] = k % 2 == 0 ? to_double(fam->alpha) : 1.0;
      r["product_ratio"] = float_field(lp / (lp + fam->log_v(k)));
    }
    r["separation"] = lr.separation;
    r["flagged"] = lr.flagged;
    em.emit(r);
  }
  Outcome o;
  for (const auto& [key, value] : lad->sequence().metadata())
    if (key == "t")
      o.notes.push_back("polynomial family (t = " + value + "): level-scale box ratios tend to (t-1)/t, while the "
                        "stated box dimension is 1; intermediate scales are not covered by these estimators");
  return o;
}

inline Outcome cmd_qalpha(const RunConfig& c, Emitter& em) {
  Rational alpha;
  try {
    alpha = parse_rational(c.alpha);
    if (alpha <= 0 || alpha >= 1) throw Error(ErrorKind::Config, "alpha must lie in (0,1)");
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
  Outcome o;
  if (c.brackets > 0) {
    QAlphaFamily fam = qalpha_build(alpha, tau(c.brackets));
    for (std::uint64_t k = 2; k <= c.brackets; k += 2) {
      BracketResult q = qident_check(fam, k);
      Row r;
      r["k"] = k;
      r["log_P_prev"] = q.log_p_prev;
      r["log_V"] = q.log_v;
      r["lower"] = q.lower;
      r["upper"] = q.upper;
      r["holds"] = q.holds;
      em.emit(r);
      if (!q.holds) ++o.failures;
    }
    return o;
  }
  QAlphaFamily fam = qalpha_build(alpha, c.terms);
  for (Position n = 1; n <= c.terms; ++n) {
    Row r;
    r["n"] = n;
    auto v = fam.exact(n);
    r["q"] = v ? integer_field(*v) : Row(nullptr);
    r["log_q"] = fam.log_term(n);
    em.emit(r);
  }
  return o;
}

inline Outcome cmd_diagnose(const RunConfig& c, Emitter& em) {
  SequencePtr q = parse_family(c.family);
  for (const auto& g : growth_diagnostics(q, c.max_k)) {
    Row r;
    r["k"] = g.k;
    r["nicely_edges"] = float_field(g.nicely_edges);
    r["nicely_starts"] = float_field(g.nicely_starts);
    r["quickly"] = float_field(g.quickly);
    r["max_log_omega"] = magnitude_field(g.max_log_omega);
    em.emit(r);
  }
  return {};
}

}  // namespace detail

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"ladder",   "digits",      "value",     "validate", "discrepancy",
                                              "aap-check", "dimension", "qalpha", "diagnose"};
  return names;
}

/// Runs one command. Exit status: 2 on configuration errors, 1 on failed
/// assertions in --check mode or on computation errors, 0 otherwise.
inline int run(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    std::ofstream file;
    std::ostream* sink = &out;
    if (!cfg.output.empty() && cfg.output != "-") {
      file.open(cfg.output);
      if (!file) throw Error(ErrorKind::Config, "cannot write '" + cfg.output + "'");
      sink = &file;
    }
    Emitter em(*sink, cfg.format);
    Outcome o;
    if (command == "ladder") o = detail::cmd_ladder(cfg, em);
    else if (command == "digits") o = detail::cmd_digits(cfg, em);
    else if (command == "value") o = detail::cmd_value(cfg, em);
    else if (command == "validate") o = detail::cmd_validate(cfg, em);
    else if (command == "discrepancy") o = detail::cmd_discrepancy(cfg, em);
    else if (command == "aap-check") o = detail::cmd_aap_check(cfg, em);
    else if (command == "dimension") o = detail::cmd_dimension(cfg, em);
    else if (command == "qalpha") o = detail::cmd_qalpha(cfg, em);
    else if (command == "diagnose") o = detail::cmd_diagnose(cfg, em);
    else throw Error(ErrorKind::Config, "unknown command '" + command + "'");
    sink->flush();
    for (const auto& note : o.notes) err << note << '\n';
    if (cfg.check && o.failures > 0) {
      err << "check failed: " << o.failures << " assertion(s)\n";
      return 1;
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::Config:
      case ErrorKind::InvalidArgument:
      case ErrorKind::NotInfiniteInLimit: return 2;
      default: return 1;
    }
  }
}

}  // namespace cantor::cli
