#include "bowen/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "bowen/config.hpp"
#include "bowen/errors.hpp"
#include "bowen/io.hpp"
#include "bowen/parallel.hpp"

namespace bowen {

namespace {

struct Options {
  std::string config_path;
  std::string out_path;
  int threads = 0;
  std::optional<std::uint64_t> seed;
  std::optional<int> depth;
  bool verbose = false;
};

struct Context {
  RunConfig cfg;
  Options opts;
  std::ostream& out;
  std::ostream& err;

  void log(const std::string& msg) const {
    if (opts.verbose) err << "[bowen] " << msg << "\n";
  }
};

std::string fmt(double x) { return format_double(x); }

std::string fmt(Cx z) { return "(" + fmt(z.real() + 0.0) + ", " + fmt(z.imag() + 0.0) + ")"; }

std::string fmt(const SpherePoint& p) { return p.is_infinity() ? "inf" : fmt(p.value()); }

SpherePoint basepoint_for(const Context& c, const MultiMap& mm) {
  if (c.cfg.basepoint) return SpherePoint::finite(*c.cfg.basepoint);
  return select_seed(mm).point;
}

// Writes CSV to --out when given, otherwise to standard output.
void emit_csv(const Context& c, const CsvWriter& csv) {
  if (c.opts.out_path.empty()) {
    c.out << csv.str();
  } else {
    write_file_atomic(c.opts.out_path, csv.str());
    c.log("wrote " + c.opts.out_path);
  }
}

int cmd_julia(Context& c) {
  const MultiMap mm = make_multimap(c.cfg);
  const PointCloud cloud = julia_backward_cloud(mm, c.cfg.cloud.depth, c.cfg.cloud.cap, c.cfg.rng_seed);
  const Rect vp = c.cfg.render.viewport ? *c.cfg.render.viewport : cloud_bounds(cloud);
  const Image img = render_cloud(cloud, vp, c.cfg.render.width, c.cfg.render.height,
                                 c.cfg.render.depth_coloring);
  const std::string path = c.opts.out_path.empty() ? c.cfg.render.output : c.opts.out_path;
  write_file_atomic(path, img.to_ppm());

  double rmin = INFINITY, rmax = 0.0;
  std::size_t at_infinity = 0;
  for (const auto& e : cloud.points) {
    if (e.point.is_infinity()) {
      ++at_infinity;
      continue;
    }
    rmin = std::min(rmin, e.point.modulus());
    rmax = std::max(rmax, e.point.modulus());
  }
  const Rect box = cloud_bounds(cloud, 0.0);
  c.out << "points       " << cloud.points.size() << "\n"
        << "at_infinity  " << at_infinity << "\n"
        << "depth        " << cloud.meta.depth << "\n"
        << "cap          " << cloud.meta.cap << "\n"
        << "seed_point   " << fmt(cloud.meta.seed) << "\n"
        << "rng_seed     " << cloud.meta.rng_seed << "\n"
        << "bbox         [" << fmt(box.xmin) << ", " << fmt(box.xmax) << "] x [" << fmt(box.ymin)
        << ", " << fmt(box.ymax) << "]\n"
        << "radii        [" << fmt(rmin) << ", " << fmt(rmax) << "]\n"
        << "image        " << path << " (" << img.width << "x" << img.height << ")\n";
  return kExitOk;
}

int cmd_bowen(Context& c) {
  const MultiMap mm = make_multimap(c.cfg);
  const BowenResult r = bowen_parameter(mm, make_bowen_config(c.cfg));
  const double err = r.delta_error();
  const std::string verdict = r.hyperbolic ? to_string(*r.hyperbolic) : "skipped";
  c.out << "delta        " << fmt(r.delta) << "\n"
        << "delta_error  " << fmt(err) << "\n"
        << "bracket      [" << fmt(r.t_lo) << ", " << fmt(r.t_hi) << "]\n"
        << "pressure     " << fmt(r.pressure_at_delta) << "\n"
        << "residual     " << fmt(r.residual) << "\n"
        << "depth        " << r.depth << "\n"
        << "iterations   " << r.iterations << "\n"
        << "basepoint    " << fmt(r.basepoint) << "\n"
        << "hyperbolic   " << verdict << "\n";
  if (r.delta > 2.0) {
    c.out << "note: delta > 2, so this system cannot satisfy the open set condition "
             "(the Julia set would have Hausdorff dimension delta, above the sphere's 2)";
    if (r.delta - err <= 2.0) c.out << "; the error bar reaches 2, so treat this as tentative";
    c.out << "\n";
  }
  if (!c.opts.out_path.empty()) {
    CsvWriter csv({"delta", "delta_error", "t_lo", "t_hi", "residual", "depth", "hyperbolic"});
    csv.field(r.delta).field(err).field(r.t_lo).field(r.t_hi).field(r.residual);
    csv.field(static_cast<long long>(r.depth)).field(verdict).end_row();
    write_file_atomic(c.opts.out_path, csv.str());
  }
  return kExitOk;
}

int cmd_pressure(Context& c) {
  const MultiMap mm = make_multimap(c.cfg);
  const BowenConfig b = make_bowen_config(c.cfg);
  TransferSums sums(mm, basepoint_for(c, mm), b.pressure.cap, b.pressure.rng_seed);
  CsvWriter csv({"t", "value", "residual", "depth"});
  for (double t : c.cfg.t_values) {
    const PressureEstimate p = sums.pressure(t, b.pressure.depth, b.pressure.early_stop);
    csv.field(t).field(p.value).field(p.residual).field(static_cast<long long>(p.depth)).end_row();
  }
  emit_csv(c, csv);
  return kExitOk;
}

// value: partial sum over word lengths 1..depth; residual: share of the last term.
int cmd_poincare(Context& c) {
  const MultiMap mm = make_multimap(c.cfg);
  const BowenConfig b = make_bowen_config(c.cfg);
  TransferSums sums(mm, basepoint_for(c, mm), b.pressure.cap, b.pressure.rng_seed);
  const int n_max = b.pressure.depth;
  CsvWriter csv({"t", "value", "residual", "depth"});
  for (double t : c.cfg.t_values) {
    double total = 0.0, comp = 0.0, last = 0.0;
    for (int n = 1; n <= n_max; ++n) {
      last = std::exp(sums.log_level_sum(n, t));
      const double y = last - comp;
      const double s = total + y;
      comp = (s - total) - y;
      total = s;
    }
    csv.field(t).field(total).field(total > 0.0 ? last / total : 0.0);
    csv.field(static_cast<long long>(n_max)).end_row();
  }
  emit_csv(c, csv);
  return kExitOk;
}

int cmd_lyap(Context& c) {
  const MultiMap mm = make_multimap(c.cfg);
  const BowenConfig b = make_bowen_config(c.cfg);
  const SpherePoint z = basepoint_for(c, mm);
  CsvWriter csv({"t", "value", "residual", "depth", "entropy"});
  for (double t : c.cfg.t_values) {
    const SpectrumDiagnostics d = lyapunov_and_entropy(mm, t, c.cfg.lyap_h, b.pressure, z);
    csv.field(t).field(d.lyapunov).field(d.residual).field(static_cast<long long>(d.depth));
    csv.field(d.entropy).end_row();
  }
  emit_csv(c, csv);
  return kExitOk;
}

const char* variant_label(OscVariant v) {
  switch (v) {
    case OscVariant::Plain:
      return "plain";
    case OscVariant::Separating:
      return "separating";
    default:
      return "strongly_separating";
  }
}

int cmd_osc(Context& c) {
  if (!c.cfg.region) throw ConfigError("osc needs a 'region'");
  const MultiMap mm = make_multimap(c.cfg);
  const Region u(*c.cfg.region);
  const VerificationReport rep = osc_check(mm, u, c.cfg.osc);
  c.out << "verdict      " << to_string(rep.verdict) << "\n"
        << "variant      " << variant_label(c.cfg.osc.variant) << "\n"
        << "grid_n       " << c.cfg.osc.grid_n << "\n"
        << "grid_step    " << fmt(rep.margin) << "\n";
  for (const auto& [k, v] : rep.parameters) c.out << k << " = " << v << "\n";
  for (const auto& w : rep.witnesses) c.out << "witness      " << fmt(w.point) << ": " << w.detail << "\n";
  if (!c.opts.out_path.empty()) {
    CsvWriter csv({"verdict", "variant", "grid_n", "witness_re", "witness_im"});
    csv.field(to_string(rep.verdict)).field(variant_label(c.cfg.osc.variant));
    csv.field(static_cast<long long>(c.cfg.osc.grid_n));
    if (rep.witnesses.empty() || rep.witnesses.front().point.is_infinity()) {
      csv.empty_field().empty_field();
    } else {
      const Cx z = rep.witnesses.front().point.value();
      csv.field(z.real()).field(z.imag());
    }
    csv.end_row();
    write_file_atomic(c.opts.out_path, csv.str());
  }
  return rep.verdict == Verdict::Fail ? kExitOscFail : kExitOk;
}

int cmd_sweep(Context& c) {
  if (!c.cfg.family) throw ConfigError("sweep needs a 'family'");
  if (!c.cfg.grid) throw ConfigError("sweep needs a 'grid'");
  const FamilySpec fam = make_family(*c.cfg.family);
  const auto start = std::chrono::steady_clock::now();
  const SweepTable table = sweep_delta(fam, *c.cfg.grid, make_bowen_config(c.cfg));
  c.log("sweep took " +
        std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()) +
        " s");

  CsvWriter csv({"re_lambda", "im_lambda", "delta", "pressure_residual", "depth", "status"});
  std::size_t ok_rows = 0;
  for (const SweepRow& r : table.rows) {
    csv.field(r.lambda.real()).field(r.lambda.imag());
    if (r.status == RowStatus::Ok) {
      ++ok_rows;
      csv.field(*r.delta).field(r.pressure_residual).field(static_cast<long long>(r.depth));
    } else {
      csv.empty_field().empty_field().empty_field();
    }
    csv.field(to_string(r.status)).end_row();
  }
  const std::string path = c.opts.out_path.empty() ? c.cfg.sweep.output : c.opts.out_path;
  write_file_atomic(path, csv.str());

  std::map<std::string, std::size_t> by_status;
  for (const SweepRow& r : table.rows) ++by_status[to_string(r.status)];
  c.out << "rows         " << table.rows.size() << " (" << ok_rows << " ok)\n";
  for (const auto& [k, n] : by_status) c.out << "status       " << k << ": " << n << "\n";
  c.out << "csv          " << path << "\n";

  const SubmeanReport sm = submean_diagnostic(table, c.cfg.sweep.submean_radius, c.cfg.sweep.tol_sub);
  c.out << "submean      checked " << sm.points_checked << ", tol_sub " << fmt(sm.tol_sub)
        << ", violations " << sm.violations << "\n";
  if (sm.points_checked > 0) {
    c.out << "  worst delta - ring mean       " << fmt(sm.worst_sub) << " at " << fmt(sm.worst_sub_at) << "\n"
          << "  worst ring mean(1/delta) - 1/delta  " << fmt(sm.worst_super) << " at "
          << fmt(sm.worst_super_at) << "\n";
  }

  std::vector<SweepLine> lines = c.cfg.sweep.lines;
  if (lines.empty()) {
    lines.push_back({LineAxis::Row, table.grid.im_steps / 2});
    lines.push_back({LineAxis::Column, table.grid.re_steps / 2});
  }
  for (const SweepLine& line : lines) {
    const std::string name =
        std::string(line.axis == LineAxis::Row ? "row " : "column ") + std::to_string(line.index);
    try {
      const SmoothnessReport s = smoothness_diagnostic(table, line, c.cfg.sweep.fit_degree);
      c.out << "smoothness   " << name << ": points " << s.points << ", max residual "
            << fmt(s.max_residual) << ", error scale " << fmt(s.error_scale) << ", ratio "
            << fmt(s.ratio) << (s.flagged ? " FLAGGED" : "") << "\n";
      if (s.min_laplacian_gap) {
        c.out << "  min delta*Lap(delta) - 2|grad delta|^2  " << fmt(*s.min_laplacian_gap)
              << " at " << fmt(s.laplacian_at) << " (noise " << fmt(s.laplacian_noise) << ")\n";
      }
    } catch (const InsufficientPoints& e) {
      c.out << "smoothness   " << name << ": " << e.what() << "\n";
    }
  }
  return kExitOk;
}

int cmd_boxdim(Context& c) {
  const MultiMap mm = make_multimap(c.cfg);
  const PointCloud cloud = julia_backward_cloud(mm, c.cfg.cloud.depth, c.cfg.cloud.cap, c.cfg.rng_seed);
  const BoxCountResult r = box_dimension(cloud, c.cfg.boxdim.scales, c.cfg.boxdim.viewport);
  c.out << "points       " << cloud.points.size() << "\n"
        << "slope        " << fmt(r.slope) << "\n"
        << "r_squared    " << fmt(r.r_squared) << "\n";
  CsvWriter csv({"scale", "count"});
  for (std::size_t k = 0; k < r.scales.size(); ++k) {
    c.out << "  scale " << fmt(r.scales[k]) << "  count " << r.counts[k] << "\n";
    csv.field(r.scales[k]).field(static_cast<long long>(r.counts[k])).end_row();
  }
  if (!c.opts.out_path.empty()) write_file_atomic(c.opts.out_path, csv.str());
  return kExitOk;
}

int dispatch(const std::string& name, Context& c) {
  static const std::map<std::string, int (*)(Context&)> table = {
      {"julia", cmd_julia},   {"bowen", cmd_bowen}, {"pressure", cmd_pressure},
      {"poincare", cmd_poincare}, {"lyap", cmd_lyap}, {"osc", cmd_osc},
      {"sweep", cmd_sweep},   {"boxdim", cmd_boxdim}};
  return table.at(name)(c);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bowen parameters, pressure and Julia sets of rational semigroups", "bowen"};
  app.require_subcommand(1);
  Options opts;
  std::uint64_t seed = 0;
  int depth = 0;

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"julia", "render the backward-orbit Julia cloud to a P6 image"},
      {"bowen", "Bowen parameter (zero of the pressure)"},
      {"pressure", "pressure P(t) for the configured t values, as CSV"},
      {"poincare", "truncated Poincare series for the configured t values, as CSV"},
      {"lyap", "Lyapunov exponent and entropy for the configured t values, as CSV"},
      {"osc", "grid test of the open set condition on the configured region"},
      {"sweep", "Bowen parameter over a lambda grid, as CSV, with diagnostics"},
      {"boxdim", "box-counting dimension of the Julia cloud"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "config file (JSON)")->required();
    sub->add_option("--out", opts.out_path, "output file");
    sub->add_option("--threads", opts.threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seed, "override rng_seed");
    sub->add_option("--depth", depth, "override the tree and cloud depth")->check(CLI::Range(0, 64));
    sub->add_flag("--verbose", opts.verbose, "log progress to stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitConfig;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--seed")) opts.seed = seed;
  if (chosen->count("--depth")) opts.depth = depth;

  try {
    Context c{load_config(opts.config_path), opts, out, err};
    if (opts.seed) c.cfg.rng_seed = *opts.seed;
    if (opts.depth) {
      c.cfg.cloud.depth = *opts.depth;
      if (*opts.depth >= 2) c.cfg.thermo.pressure.depth = *opts.depth;
    }
    set_thread_count(static_cast<unsigned>(opts.threads));
    if (opts.verbose) {
      c.log("threads " + std::to_string(thread_count()));
      err << emit_config(c.cfg);
    }
    return dispatch(chosen->get_name(), c);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NoRepellingSeed& e) {
    err << "no repelling seed: " << e.what() << "\n";
    return kExitNoRepellingSeed;
  } catch (const NoSignChange& e) {
    err << "no sign change: " << e.what() << "\n";
    return kExitNoSignChange;
  } catch (const CriticalPreimage& e) {
    err << "critical preimage: " << e.what() << "\n";
    return kExitCriticalPreimage;
  } catch (const NotHyperbolic& e) {
    err << "not hyperbolic: " << e.what() << " (set thermo.force to skip the check)\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace bowen
