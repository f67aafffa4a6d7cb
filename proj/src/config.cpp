#include "bowen/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bowen/errors.hpp"
#include "json.hpp"

namespace bowen {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

// Object reader that rejects keys nobody asked for.
class Obj {
 public:
  Obj(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(where_, "expected an object");
  }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  const json& need(const char* key) {
    const json* v = find(key);
    if (!v) fail(where_, std::string("missing key '") + key + "'");
    return *v;
  }
  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(where_, "unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

double to_double(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(where, "expected a finite number");
  return x;
}

long long to_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  return v.get<long long>();
}

bool to_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) fail(where, "expected true or false");
  return v.get<bool>();
}

std::string to_str(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

Cx to_cx(const json& v, const std::string& where) {
  if (v.is_number()) return {to_double(v, where), 0.0};
  if (!v.is_array() || v.size() != 2) fail(where, "expected a complex number [re, im]");
  return {to_double(v[0], where + "[0]"), to_double(v[1], where + "[1]")};
}

std::vector<Cx> to_cx_list(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected a list of complex numbers");
  std::vector<Cx> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(to_cx(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Rect to_rect(const json& v, const std::string& where) {
  Obj o(v, where);
  Rect r{to_double(o.need("xmin"), o.path("xmin")), to_double(o.need("xmax"), o.path("xmax")),
         to_double(o.need("ymin"), o.path("ymin")), to_double(o.need("ymax"), o.path("ymax"))};
  o.finish();
  if (!(r.xmin < r.xmax) || !(r.ymin < r.ymax)) fail(where, "empty rectangle");
  return r;
}

template <class F>
void opt(Obj& o, const char* key, F&& assign) {
  if (const json* v = o.find(key)) assign(*v, o.path(key));
}

ojson cx_json(Cx z) { return ojson::array({z.real(), z.imag()}); }

ojson cx_list_json(const std::vector<Cx>& v) {
  ojson a = ojson::array();
  for (Cx z : v) a.push_back(cx_json(z));
  return a;
}

ojson rect_json(const Rect& r) {
  return ojson{{"xmin", r.xmin}, {"xmax", r.xmax}, {"ymin", r.ymin}, {"ymax", r.ymax}};
}

Region::Shape to_shape(const json& v, const std::string& where) {
  Obj o(v, where);
  const std::string type = to_str(o.need("type"), o.path("type"));
  Region::Shape shape;
  if (type == "disc") {
    shape = Disc{to_cx(o.need("center"), o.path("center")), to_double(o.need("r"), o.path("r"))};
  } else if (type == "annulus") {
    shape = Annulus{to_cx(o.need("center"), o.path("center")),
                    to_double(o.need("r1"), o.path("r1")), to_double(o.need("r2"), o.path("r2"))};
  } else if (type == "complement_disc") {
    shape = ComplementDisc{to_cx(o.need("center"), o.path("center")),
                           to_double(o.need("r"), o.path("r"))};
  } else if (type == "triangle") {
    const auto pts = to_cx_list(o.need("vertices"), o.path("vertices"));
    if (pts.size() != 3) fail(o.path("vertices"), "expected three vertices");
    shape = Triangle{pts[0], pts[1], pts[2]};
  } else {
    fail(o.path("type"), "unknown region type '" + type + "'");
  }
  o.finish();
  try {
    Region check(shape);
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  return shape;
}

ojson shape_json(const Region::Shape& s) {
  return std::visit(
      [](const auto& sh) -> ojson {
        using T = std::decay_t<decltype(sh)>;
        if constexpr (std::is_same_v<T, Disc>) {
          return ojson{{"type", "disc"}, {"center", cx_json(sh.center)}, {"r", sh.r}};
        } else if constexpr (std::is_same_v<T, Annulus>) {
          return ojson{{"type", "annulus"}, {"center", cx_json(sh.center)}, {"r1", sh.r1},
                       {"r2", sh.r2}};
        } else if constexpr (std::is_same_v<T, ComplementDisc>) {
          return ojson{{"type", "complement_disc"}, {"center", cx_json(sh.center)}, {"r", sh.r}};
        } else {
          return ojson{{"type", "triangle"},
                       {"vertices", cx_list_json({sh.p1, sh.p2, sh.p3})}};
        }
      },
      s);
}

std::vector<std::vector<Cx>> to_lambda_polys(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where, "expected a non-empty list of lambda polynomials");
  std::vector<std::vector<Cx>> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    out.push_back(to_cx_list(v[k], where + "[" + std::to_string(k) + "]"));
  }
  return out;
}

FamilyConfig to_family(const json& v, const std::string& where) {
  Obj o(v, where);
  FamilyConfig fc;
  const json& gens = o.need("generators");
  if (!gens.is_array() || gens.empty()) fail(o.path("generators"), "expected a non-empty list");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    Obj g(gens[i], o.path("generators") + "[" + std::to_string(i) + "]");
    FamilyConfig::Generator gen;
    gen.num = to_lambda_polys(g.need("num"), g.path("num"));
    opt(g, "den", [&](const json& x, const std::string& w) { gen.den = to_lambda_polys(x, w); });
    g.finish();
    fc.generators.push_back(std::move(gen));
  }
  opt(o, "domain", [&](const json& x, const std::string& w) {
    Obj d(x, w);
    const std::string type = to_str(d.need("type"), d.path("type"));
    if (type == "rect") {
      fc.domain = Rect{to_double(d.need("xmin"), d.path("xmin")),
                       to_double(d.need("xmax"), d.path("xmax")),
                       to_double(d.need("ymin"), d.path("ymin")),
                       to_double(d.need("ymax"), d.path("ymax"))};
    } else if (type == "annulus") {
      ParameterAnnulus a{Cx(0.0, 0.0), 0.0, 0.0};
      opt(d, "center", [&](const json& c, const std::string& cw) { a.center = to_cx(c, cw); });
      a.r1 = to_double(d.need("r1"), d.path("r1"));
      a.r2 = to_double(d.need("r2"), d.path("r2"));
      if (a.r1 < 0.0 || a.r2 < a.r1) fail(w, "need 0 <= r1 <= r2");
      fc.domain = a;
    } else {
      fail(d.path("type"), "unknown domain type '" + type + "'");
    }
    d.finish();
  });
  opt(o, "excluded", [&](const json& x, const std::string& w) { fc.excluded = to_cx_list(x, w); });
  o.finish();
  return fc;
}

ojson family_json(const FamilyConfig& fc) {
  ojson gens = ojson::array();
  auto polys = [](const std::vector<std::vector<Cx>>& p) {
    ojson a = ojson::array();
    for (const auto& c : p) a.push_back(cx_list_json(c));
    return a;
  };
  for (const auto& g : fc.generators) gens.push_back(ojson{{"num", polys(g.num)}, {"den", polys(g.den)}});
  ojson domain;
  if (const auto* r = std::get_if<Rect>(&fc.domain)) {
    domain = ojson{{"type", "rect"}, {"xmin", r->xmin}, {"xmax", r->xmax}, {"ymin", r->ymin},
                   {"ymax", r->ymax}};
  } else {
    const auto& a = std::get<ParameterAnnulus>(fc.domain);
    domain = ojson{{"type", "annulus"}, {"center", cx_json(a.center)}, {"r1", a.r1}, {"r2", a.r2}};
  }
  return ojson{{"generators", gens}, {"domain", domain}, {"excluded", cx_list_json(fc.excluded)}};
}

const char* variant_name(OscVariant v) {
  switch (v) {
    case OscVariant::Plain:
      return "plain";
    case OscVariant::Separating:
      return "separating";
    default:
      return "strongly_separating";
  }
}

int positive_int(const json& v, const std::string& where, long long lo, long long hi) {
  const long long x = to_int(v, where);
  if (x < lo || x > hi) {
    fail(where, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(x);
}

double positive_double(const json& v, const std::string& where) {
  const double x = to_double(v, where);
  if (!(x > 0.0)) fail(where, "must be positive");
  return x;
}

RunConfig from_json(const json& root) {
  RunConfig cfg;
  Obj o(root, "config");

  opt(o, "rng_seed", [&](const json& v, const std::string& w) {
    if (v.is_number_unsigned()) {
      cfg.rng_seed = v.get<std::uint64_t>();
    } else {
      const long long x = to_int(v, w);
      if (x < 0) fail(w, "must be non-negative");
      cfg.rng_seed = static_cast<std::uint64_t>(x);
    }
  });

  opt(o, "generators", [&](const json& v, const std::string& w) {
    if (!v.is_array()) fail(w, "expected a list of maps");
    for (std::size_t i = 0; i < v.size(); ++i) {
      Obj g(v[i], w + "[" + std::to_string(i) + "]");
      MapSpec m;
      m.num = to_cx_list(g.need("num"), g.path("num"));
      opt(g, "den", [&](const json& x, const std::string& gw) { m.den = to_cx_list(x, gw); });
      g.finish();
      cfg.generators.push_back(std::move(m));
    }
  });
  opt(o, "family", [&](const json& v, const std::string& w) {
    if (!v.is_null()) cfg.family = to_family(v, w);
  });
  opt(o, "lambda", [&](const json& v, const std::string& w) {
    if (!v.is_null()) cfg.lambda = to_cx(v, w);
  });
  opt(o, "basepoint", [&](const json& v, const std::string& w) {
    if (!v.is_null()) cfg.basepoint = to_cx(v, w);
  });
  opt(o, "region", [&](const json& v, const std::string& w) {
    if (!v.is_null()) cfg.region = to_shape(v, w);
  });

  opt(o, "thermo", [&](const json& v, const std::string& w) {
    Obj t(v, w);
    BowenConfig& b = cfg.thermo;
    opt(t, "depth", [&](const json& x, const std::string& p) { b.pressure.depth = positive_int(x, p, 2, 64); });
    opt(t, "cap", [&](const json& x, const std::string& p) {
      b.pressure.cap = static_cast<std::size_t>(positive_int(x, p, 1, 100000000));
    });
    opt(t, "early_stop", [&](const json& x, const std::string& p) { b.pressure.early_stop = to_double(x, p); });
    opt(t, "tol_t", [&](const json& x, const std::string& p) { b.tol_t = positive_double(x, p); });
    opt(t, "tol_p", [&](const json& x, const std::string& p) { b.tol_p = positive_double(x, p); });
    opt(t, "force", [&](const json& x, const std::string& p) { b.force = to_bool(x, p); });
    opt(t, "hyperbolic_depth", [&](const json& x, const std::string& p) { b.hyperbolic_depth = positive_int(x, p, 0, 64); });
    opt(t, "hyperbolic_margin", [&](const json& x, const std::string& p) { b.hyperbolic_margin = positive_double(x, p); });
    opt(t, "hyperbolic_cap", [&](const json& x, const std::string& p) {
      b.hyperbolic_cap = static_cast<std::size_t>(positive_int(x, p, 1, 100000000));
    });
    opt(t, "t_max", [&](const json& x, const std::string& p) { b.t_max = positive_double(x, p); });
    opt(t, "max_iterations", [&](const json& x, const std::string& p) { b.max_iterations = positive_int(x, p, 1, 100000); });
    t.finish();
  });

  opt(o, "t_values", [&](const json& v, const std::string& w) {
    if (!v.is_array() || v.empty()) fail(w, "expected a non-empty list of numbers");
    cfg.t_values.clear();
    for (std::size_t i = 0; i < v.size(); ++i) cfg.t_values.push_back(to_double(v[i], w));
  });
  opt(o, "lyap_h", [&](const json& v, const std::string& w) { cfg.lyap_h = positive_double(v, w); });

  opt(o, "cloud", [&](const json& v, const std::string& w) {
    Obj c(v, w);
    opt(c, "depth", [&](const json& x, const std::string& p) { cfg.cloud.depth = positive_int(x, p, 0, 64); });
    opt(c, "cap", [&](const json& x, const std::string& p) {
      cfg.cloud.cap = static_cast<std::size_t>(positive_int(x, p, 1, 100000000));
    });
    c.finish();
  });

  opt(o, "render", [&](const json& v, const std::string& w) {
    Obj r(v, w);
    opt(r, "viewport", [&](const json& x, const std::string& p) {
      if (!x.is_null()) cfg.render.viewport = to_rect(x, p);
    });
    opt(r, "width", [&](const json& x, const std::string& p) { cfg.render.width = positive_int(x, p, 1, 16384); });
    opt(r, "height", [&](const json& x, const std::string& p) { cfg.render.height = positive_int(x, p, 1, 16384); });
    opt(r, "depth_coloring", [&](const json& x, const std::string& p) { cfg.render.depth_coloring = to_bool(x, p); });
    opt(r, "output", [&](const json& x, const std::string& p) { cfg.render.output = to_str(x, p); });
    r.finish();
  });

  opt(o, "osc", [&](const json& v, const std::string& w) {
    Obj s(v, w);
    opt(s, "grid_n", [&](const json& x, const std::string& p) { cfg.osc.grid_n = positive_int(x, p, 64, 1 << 14); });
    opt(s, "variant", [&](const json& x, const std::string& p) {
      const std::string name = to_str(x, p);
      if (name == "plain") cfg.osc.variant = OscVariant::Plain;
      else if (name == "separating") cfg.osc.variant = OscVariant::Separating;
      else if (name == "strongly_separating") cfg.osc.variant = OscVariant::StronglySeparating;
      else fail(p, "unknown variant '" + name + "'");
    });
    opt(s, "epsilon", [&](const json& x, const std::string& p) { cfg.osc.epsilon = positive_double(x, p); });
    opt(s, "enlarge", [&](const json& x, const std::string& p) {
      cfg.osc.enlarge = to_double(x, p);
      if (cfg.osc.enlarge < 1.0) fail(p, "must be >= 1");
    });
    s.finish();
  });

  opt(o, "boxdim", [&](const json& v, const std::string& w) {
    Obj b(v, w);
    opt(b, "scales", [&](const json& x, const std::string& p) { cfg.boxdim.scales = positive_int(x, p, 2, 20); });
    opt(b, "viewport", [&](const json& x, const std::string& p) {
      if (!x.is_null()) cfg.boxdim.viewport = to_rect(x, p);
    });
    b.finish();
  });

  opt(o, "grid", [&](const json& v, const std::string& w) {
    if (v.is_null()) return;
    Obj g(v, w);
    GridSpec gs;
    gs.re_min = to_double(g.need("re_min"), g.path("re_min"));
    gs.re_max = to_double(g.need("re_max"), g.path("re_max"));
    gs.re_steps = positive_int(g.need("re_steps"), g.path("re_steps"), 1, 100000);
    gs.im_min = to_double(g.need("im_min"), g.path("im_min"));
    gs.im_max = to_double(g.need("im_max"), g.path("im_max"));
    gs.im_steps = positive_int(g.need("im_steps"), g.path("im_steps"), 1, 100000);
    g.finish();
    if (gs.re_max < gs.re_min || gs.im_max < gs.im_min) fail(w, "max must not be below min");
    cfg.grid = gs;
  });

  opt(o, "sweep", [&](const json& v, const std::string& w) {
    Obj s(v, w);
    opt(s, "submean_radius", [&](const json& x, const std::string& p) { cfg.sweep.submean_radius = positive_int(x, p, 1, 100000); });
    opt(s, "tol_sub", [&](const json& x, const std::string& p) {
      if (!x.is_null()) cfg.sweep.tol_sub = to_double(x, p);
    });
    opt(s, "lines", [&](const json& x, const std::string& p) {
      if (!x.is_array()) fail(p, "expected a list");
      for (std::size_t i = 0; i < x.size(); ++i) {
        Obj l(x[i], p + "[" + std::to_string(i) + "]");
        SweepLine line;
        const std::string axis = to_str(l.need("axis"), l.path("axis"));
        if (axis == "row") line.axis = LineAxis::Row;
        else if (axis == "column") line.axis = LineAxis::Column;
        else fail(l.path("axis"), "expected 'row' or 'column'");
        line.index = positive_int(l.need("index"), l.path("index"), 0, 100000);
        l.finish();
        cfg.sweep.lines.push_back(line);
      }
    });
    opt(s, "fit_degree", [&](const json& x, const std::string& p) { cfg.sweep.fit_degree = positive_int(x, p, 0, 32); });
    opt(s, "output", [&](const json& x, const std::string& p) { cfg.sweep.output = to_str(x, p); });
    s.finish();
  });

  o.finish();

  if (cfg.grid) {
    for (const SweepLine& l : cfg.sweep.lines) {
      const int limit = l.axis == LineAxis::Row ? cfg.grid->im_steps : cfg.grid->re_steps;
      if (l.index >= limit) fail("config.sweep.lines", "line index outside the grid");
    }
  }
  return cfg;
}

ojson to_json(const RunConfig& cfg) {
  ojson j;
  j["rng_seed"] = cfg.rng_seed;
  ojson gens = ojson::array();
  for (const auto& g : cfg.generators) gens.push_back(ojson{{"num", cx_list_json(g.num)}, {"den", cx_list_json(g.den)}});
  j["generators"] = gens;
  j["family"] = cfg.family ? family_json(*cfg.family) : ojson(nullptr);
  j["lambda"] = cfg.lambda ? cx_json(*cfg.lambda) : ojson(nullptr);
  j["basepoint"] = cfg.basepoint ? cx_json(*cfg.basepoint) : ojson(nullptr);
  j["region"] = cfg.region ? shape_json(*cfg.region) : ojson(nullptr);
  const BowenConfig& b = cfg.thermo;
  j["thermo"] = ojson{{"depth", b.pressure.depth},
                      {"cap", b.pressure.cap},
                      {"early_stop", b.pressure.early_stop},
                      {"tol_t", b.tol_t},
                      {"tol_p", b.tol_p},
                      {"force", b.force},
                      {"hyperbolic_depth", b.hyperbolic_depth},
                      {"hyperbolic_margin", b.hyperbolic_margin},
                      {"hyperbolic_cap", b.hyperbolic_cap},
                      {"t_max", b.t_max},
                      {"max_iterations", b.max_iterations}};
  j["t_values"] = cfg.t_values;
  j["lyap_h"] = cfg.lyap_h;
  j["cloud"] = ojson{{"depth", cfg.cloud.depth}, {"cap", cfg.cloud.cap}};
  j["render"] = ojson{{"viewport", cfg.render.viewport ? rect_json(*cfg.render.viewport) : ojson(nullptr)},
                      {"width", cfg.render.width},
                      {"height", cfg.render.height},
                      {"depth_coloring", cfg.render.depth_coloring},
                      {"output", cfg.render.output}};
  j["osc"] = ojson{{"grid_n", cfg.osc.grid_n},
                   {"variant", variant_name(cfg.osc.variant)},
                   {"epsilon", cfg.osc.epsilon},
                   {"enlarge", cfg.osc.enlarge}};
  j["boxdim"] = ojson{{"scales", cfg.boxdim.scales},
                      {"viewport", cfg.boxdim.viewport ? rect_json(*cfg.boxdim.viewport) : ojson(nullptr)}};
  if (cfg.grid) {
    const GridSpec& g = *cfg.grid;
    j["grid"] = ojson{{"re_min", g.re_min}, {"re_max", g.re_max}, {"re_steps", g.re_steps},
                      {"im_min", g.im_min}, {"im_max", g.im_max}, {"im_steps", g.im_steps}};
  } else {
    j["grid"] = nullptr;
  }
  ojson lines = ojson::array();
  for (const SweepLine& l : cfg.sweep.lines) {
    lines.push_back(ojson{{"axis", l.axis == LineAxis::Row ? "row" : "column"}, {"index", l.index}});
  }
  j["sweep"] = ojson{{"submean_radius", cfg.sweep.submean_radius},
                     {"tol_sub", cfg.sweep.tol_sub ? ojson(*cfg.sweep.tol_sub) : ojson(nullptr)},
                     {"lines", lines},
                     {"fit_degree", cfg.sweep.fit_degree},
                     {"output", cfg.sweep.output}};
  return j;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return from_json(root);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

FamilySpec make_family(const FamilyConfig& fc) {
  FamilySpec fam;
  for (const auto& g : fc.generators) {
    FamilyMap m;
    for (const auto& c : g.num) m.num.emplace_back(c);
    for (const auto& c : g.den) m.den.emplace_back(c);
    fam.generators.push_back(std::move(m));
  }
  fam.domain = fc.domain;
  fam.excluded = fc.excluded;
  return fam;
}

MultiMap make_multimap(const RunConfig& cfg) {
  if (!cfg.generators.empty()) {
    std::vector<RationalMap> maps;
    for (std::size_t i = 0; i < cfg.generators.size(); ++i) {
      try {
        maps.emplace_back(Polynomial(cfg.generators[i].num), Polynomial(cfg.generators[i].den));
      } catch (const InvalidMap& e) {
        throw ConfigError("generator " + std::to_string(i) + ": " + e.what());
      }
    }
    return MultiMap(std::move(maps));
  }
  if (cfg.family && cfg.lambda) {
    try {
      return instantiate(make_family(*cfg.family), *cfg.lambda);
    } catch (const InvalidInstance& e) {
      throw ConfigError(std::string("family instance: ") + e.what());
    }
  }
  throw ConfigError("config needs 'generators', or 'family' together with 'lambda'");
}

BowenConfig make_bowen_config(const RunConfig& cfg) {
  BowenConfig b = cfg.thermo;
  b.pressure.rng_seed = cfg.rng_seed;
  return b;
}

}  // namespace bowen
