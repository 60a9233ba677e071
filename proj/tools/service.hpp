#pragma once

// Result payloads shared by the command line and the line service. Every
// method takes JSON params and returns a JSON payload; the CLI prints the
// payload as a record (or as JSON with --json), the service wraps it in a
// response. One code path means both surfaces return the same bytes.

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "skizze/deform.hpp"
#include "skizze/moves.hpp"
#include "skizze/operad.hpp"
#include "skizze/render.hpp"
#include "skizze/tracer.hpp"

namespace skizze::service {

using Json = nlohmann::ordered_json;

/// Failures that exist only at the protocol level.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(std::string kind, const std::string& what) : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

struct Caps {
  int trace = 8;
  int poset = 4;
  int compose = 4;
};

// ------------------------------------------------------------- records ---

namespace detail {

inline bool plain(const std::string& s, bool in_list) {
  if (s.empty()) return false;
  for (char c : s)
    if (std::isspace(static_cast<unsigned char>(c)) || c == '"' || (in_list && c == ',')) return false;
  return true;
}

inline std::string scalar(const Json& v, bool in_list) {
  if (v.is_string()) {
    auto s = v.get<std::string>();
    return plain(s, in_list) ? s : Json(s).dump();
  }
  return v.dump();
}

inline bool inline_list(const Json& a) {
  for (const auto& e : a)
    if (e.is_structured() || (e.is_string() && !plain(e.get<std::string>(), true))) return false;
  return true;
}

inline void write_record(std::ostream& os, const std::string& name, const Json& obj, int indent) {
  os << std::string(static_cast<std::size_t>(indent), ' ') << name;
  std::vector<std::pair<std::string, const Json*>> nested;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const Json& v = it.value();
    if (v.is_object() || (v.is_array() && !inline_list(v))) {
      nested.emplace_back(it.key(), &v);
      continue;
    }
    os << ' ' << it.key() << ':';
    if (v.is_array()) {
      if (v.empty()) os << "[]";
      bool first = true;
      for (const auto& e : v) {
        os << (first ? "" : ",") << scalar(e, true);
        first = false;
      }
    } else {
      os << scalar(v, false);
    }
  }
  os << '\n';
  for (const auto& [key, v] : nested) {
    if (v->is_object()) {
      write_record(os, key, *v, indent + 2);
      continue;
    }
    for (const auto& e : *v) {
      if (e.is_object())
        write_record(os, key, e, indent + 2);
      else
        os << std::string(static_cast<std::size_t>(indent + 2), ' ') << key << ':' << scalar(e, false) << '\n';
    }
  }
}

}  // namespace detail

/// Record syntax: one line per object, `name key:value key:value ...`.
/// Scalars that are empty or contain blanks or quotes are JSON-quoted; lists of
/// plain scalars are comma-joined (an empty list is `[]`); nested objects and lists of objects follow
/// on their own lines, indented two spaces and named by their key.
inline std::string to_record(const std::string& name, const Json& payload) {
  std::ostringstream os;
  detail::write_record(os, name, payload, 0);
  return os.str();
}

// -------------------------------------------------------------- params ---

namespace detail {

inline const Json& need(const Json& params, const char* key) {
  if (!params.is_object() || !params.contains(key))
    throw Error(ErrorKind::ParseError, std::string("missing parameter '") + key + "'");
  return params.at(key);
}

inline std::string str(const Json& params, const char* key) {
  const auto& v = need(params, key);
  if (!v.is_string()) throw Error(ErrorKind::ParseError, std::string("parameter '") + key + "' must be a string");
  return v.get<std::string>();
}

inline double real(const Json& params, const char* key) {
  const auto& v = need(params, key);
  if (!v.is_number()) throw Error(ErrorKind::ParseError, std::string("parameter '") + key + "' must be a number");
  return v.get<double>();
}

inline int integer(const Json& params, const char* key) {
  const auto& v = need(params, key);
  if (!v.is_number_integer()) throw Error(ErrorKind::ParseError, std::string("parameter '") + key + "' must be an integer");
  return v.get<int>();
}

inline std::optional<double> opt_real(const Json& params, const char* key) {
  if (!params.is_object() || !params.contains(key)) return std::nullopt;
  return real(params, key);
}

inline int cap(const Json& params, int fallback) {
  if (!params.is_object() || !params.contains("cap")) return fallback;
  return integer(params, "cap");
}

inline std::vector<Complex> parse_points(std::string_view text) {
  std::vector<Complex> z;
  for (auto part : split(trim(text), ',')) z.push_back(parse_complex(trim(part)));
  return z;
}

/// `poly` in coefficient text, or `roots` as a re:im list.
inline Polynomial polynomial(const Json& params) {
  if (params.is_object() && params.contains("poly")) return parse_polynomial(str(params, "poly"));
  if (params.is_object() && params.contains("roots")) {
    auto z = parse_points(str(params, "roots"));
    if (z.empty()) throw Error(ErrorKind::ParseError, "empty root list");
    return from_roots(z);
  }
  throw Error(ErrorKind::ParseError, "missing parameter 'poly' (or 'roots')");
}

inline TraceConfig trace_config(const Json& params) {
  TraceConfig cfg;
  if (auto v = opt_real(params, "axis_tol")) cfg.axis_tol = *v;
  if (auto v = opt_real(params, "cluster_radius")) cfg.cluster_radius = *v;
  return cfg;
}

inline void check_degree(const Polynomial& p, int limit) {
  if (p.degree() > limit)
    throw Error(ErrorKind::CapExceeded, "degree " + std::to_string(p.degree()) + " above cap " + std::to_string(limit));
}

inline std::string vertex_kind(VertexKind k) { return k == VertexKind::Root ? "root" : k == VertexKind::Crit ? "crit" : "leaf"; }
inline std::string color_name(Color c) { return c == Color::Red ? "red" : "blue"; }

inline Json points(const std::vector<Complex>& z) {
  Json a = Json::array();
  for (auto w : z) a.push_back(format_complex(w));
  return a;
}

inline Json event_json(const WallEvent& e) {
  Json j;
  j["t"] = e.t;
  j["kind"] = std::string(to_string(e.kind));
  j["indices"] = e.indices;
  j["wall"] = e.wall_code;
  return j;
}

}  // namespace detail

// ------------------------------------------------------------- methods ---

inline Json roots(const Json& params, const Caps& caps = {}) {
  auto p = detail::polynomial(params);
  detail::check_degree(p, detail::cap(params, caps.trace));
  RootOptions opt;
  if (auto v = detail::opt_real(params, "cluster_radius")) opt.cluster_radius = *v;
  Json out;
  out["degree"] = p.degree();
  out["roots"] = Json::array();
  for (const auto& r : find_roots(p, opt)) out["roots"].push_back({{"at", format_complex(r.point)}, {"multiplicity", r.multiplicity}});
  out["critical"] = Json::array();
  for (const auto& c : critical_data(p, opt))
    out["critical"].push_back(
        {{"at", format_complex(c.point)}, {"value", format_complex(c.value)}, {"multiplicity", c.multiplicity}});
  return out;
}

inline Json classify(const Json& params, const Caps& caps = {}) {
  auto p = detail::polynomial(params);
  detail::check_degree(p, detail::cap(params, caps.trace));
  auto r = skizze::classify(p, detail::trace_config(params));
  Json out;
  out["n"] = p.degree();
  out["codim"] = codim(r.graph);
  out["generic"] = is_generic(r.graph);
  out["code"] = r.code;
  return out;
}

inline Json trace(const Json& params, const Caps& caps = {}) {
  auto p = detail::polynomial(params);
  detail::check_degree(p, detail::cap(params, caps.trace));
  auto s = skizze::trace(p, detail::trace_config(params));
  Json out;
  out["n"] = p.degree();
  out["radius"] = s.radius;
  out["code"] = canonical_code(extract_graph(s));
  out["vertices"] = Json::array();
  for (std::size_t v = 0; v < s.vertices.size(); ++v) {
    const auto& sv = s.vertices[v];
    Json j;
    j["id"] = "v" + std::to_string(v);
    j["kind"] = detail::vertex_kind(sv.kind);
    j["at"] = format_complex(sv.position);
    j["multiplicity"] = sv.multiplicity;
    if (sv.kind == VertexKind::Crit) j["color"] = detail::color_name(sv.color);
    out["vertices"].push_back(j);
  }
  out["leaves"] = Json::array();
  for (double a : s.leaf_angle) out["leaves"].push_back(a);
  out["arcs"] = Json::array();
  for (const auto& a : s.arcs) {
    Json j;
    j["color"] = detail::color_name(a.color);
    j["from"] = "v" + std::to_string(a.start.id);
    j["to"] = a.end.kind == EndKind::Leaf ? "L" + std::to_string(a.end.id) : "v" + std::to_string(a.end.id);
    j["points"] = detail::points(a.polyline);
    out["arcs"].push_back(j);
  }
  return out;
}

inline Json enumerate(const Json& params, const Caps& caps = {}) {
  int n = detail::integer(params, "n");
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be positive");
  int limit = detail::cap(params, caps.poset);
  if (n > limit) throw Error(ErrorKind::CapExceeded, "n=" + std::to_string(n) + " above cap " + std::to_string(limit));
  auto codes = enumerate_generic(n);
  std::sort(codes.begin(), codes.end());
  Json out;
  out["n"] = n;
  out["count"] = codes.size();
  out["codes"] = codes;
  return out;
}

/// Posets are built once per process and shared; construction is serialized.
inline std::shared_ptr<const Poset> cached_poset(int n, int limit) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const Poset>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) {
    if (n > limit) throw Error(ErrorKind::CapExceeded, "n=" + std::to_string(n) + " above cap " + std::to_string(limit));
    return it->second;
  }
  PosetOptions opt;
  opt.cap = limit;
  auto p = std::make_shared<const Poset>(build_poset(n, opt));
  cache.emplace(n, p);
  return p;
}

inline Json poset(const Json& params, const Caps& caps = {}) {
  int n = detail::integer(params, "n");
  auto p = cached_poset(n, detail::cap(params, caps.poset));
  std::map<std::string, int> kinds;
  for (const auto& c : p->covers) ++kinds[to_string(c.kind)];
  Json out;
  out["n"] = n;
  out["nodes"] = p->nodes.size();
  out["covers"] = p->covers.size();
  out["generic"] = enumerate_generic(n).size();
  out["moves"] = Json::object();
  for (const auto& [k, c] : kinds) out["moves"][k] = c;
  out["maximal"] = p->maximal;
  return out;
}

inline Json poset_neighbors(const Json& params, const Caps& caps = {}) {
  CanonicalCode code = detail::str(params, "code");
  auto g = decode(code);
  auto p = cached_poset(g.n, detail::cap(params, caps.poset));
  if (!p->nodes.count(code)) throw Error(ErrorKind::InvalidArgument, "code is not a node of the n=" + std::to_string(g.n) + " poset");
  Json out;
  out["code"] = code;
  out["n"] = g.n;
  out["codim"] = codim(g);
  out["parents"] = Json::array();
  for (const auto* c : p->parents_of(code)) out["parents"].push_back({{"kind", to_string(c->kind)}, {"code", c->parent}});
  out["children"] = Json::array();
  for (const auto* c : p->children_of(code)) out["children"].push_back({{"kind", to_string(c->kind)}, {"code", c->child}});
  return out;
}

/// `P0..P1` with mode coeff (coefficients move linearly) or root (matched roots move linearly).
inline CoeffPath parse_path(const std::string& spec, const std::string& mode) {
  auto dots = spec.find("..");
  if (dots == std::string::npos) throw Error(ErrorKind::ParseError, "path must be P0..P1");
  auto p0 = parse_polynomial(spec.substr(0, dots));
  auto p1 = parse_polynomial(spec.substr(dots + 2));
  if (p0.degree() != p1.degree()) throw Error(ErrorKind::InvalidArgument, "path endpoints differ in degree");
  if (mode == "coeff") return CoeffPath::linear(p0, p1);
  if (mode == "root") return CoeffPath::root_linear(p0, p1);
  throw Error(ErrorKind::ParseError, "mode must be coeff or root, got '" + mode + "'");
}

inline TimelineOptions timeline_options(const Json& params) {
  TimelineOptions opt;
  if (params.contains("samples")) opt.deform.samples = detail::integer(params, "samples");
  if (opt.deform.samples < 4) throw Error(ErrorKind::InvalidArgument, "samples must be at least 4");
  return opt;
}

inline CoeffPath path_param(const Json& params, const Caps& caps) {
  std::string mode = params.contains("mode") ? detail::str(params, "mode") : std::string("coeff");
  auto path = parse_path(detail::str(params, "path"), mode);
  int limit = detail::cap(params, caps.trace);
  if (path.degree() > limit)
    throw Error(ErrorKind::CapExceeded, "degree " + std::to_string(path.degree()) + " above cap " + std::to_string(limit));
  return path;
}

inline Json timeline_json(const Timeline& tl) {
  Json out;
  out["n"] = tl.n;
  out["events"] = Json::array();
  for (std::size_t i = 0; i < tl.events.size(); ++i) {
    auto j = detail::event_json(tl.events[i]);
    if (i < tl.order.size() && tl.order[i].checked) j["order"] = tl.order[i].before_ok && tl.order[i].after_ok ? "ok" : "violated";
    out["events"].push_back(j);
  }
  out["segments"] = Json::array();
  for (const auto& s : tl.segments) out["segments"].push_back({{"from", s.t0}, {"to", s.t1}, {"code", s.code}});
  out["warnings"] = tl.warnings;
  return out;
}

inline Json deform(const Json& params, const Caps& caps = {}) {
  auto path = path_param(params, caps);
  return timeline_json(stratum_timeline(path, timeline_options(params)));
}

inline Json configuration_json(const Configuration& x) {
  Json out;
  out["configuration"] = format_configuration(x);
  out["polynomial"] = format_polynomial(x.polynomial());
  return out;
}

/// parts: {"p": "a=re:im,b=re:im", ...}
inline std::map<std::string, Configuration> parts_param(const Json& params) {
  const auto& v = detail::need(params, "parts");
  if (!v.is_object()) throw Error(ErrorKind::ParseError, "parameter 'parts' must map base labels to configurations");
  std::map<std::string, Configuration> parts;
  for (auto it = v.begin(); it != v.end(); ++it) {
    if (!it.value().is_string()) throw Error(ErrorKind::ParseError, "part '" + it.key() + "' must be a configuration string");
    parts[it.key()] = parse_configuration(it.value().get<std::string>());
  }
  return parts;
}

inline Json report_json(const CompositionReport& r) {
  Json out;
  out["passed"] = r.passed;
  out["inconclusive"] = r.inconclusive;
  out["epsilon"] = r.epsilon;
  out["halvings"] = r.halvings;
  out["contraction_ok"] = r.contraction_ok;
  out["case3_reachable"] = r.case3_reachable;
  out["base"] = r.base;
  out["contracted"] = r.contracted;
  out["composed"] = r.composed;
  out["parts"] = Json::array();
  for (const auto& p : r.parts)
    out["parts"].push_back({{"label", p.base_label},
                            {"match", p.match},
                            {"disc_radius", p.disc_radius},
                            {"in_disc", p.in_disc},
                            {"expected", p.expected}});
  out["diagnostics"] = r.diagnostics;
  return out;
}

inline Json compose(const Json& params, const Caps& caps = {}) {
  auto base = parse_configuration(detail::str(params, "base"));
  auto parts = parts_param(params);
  double eps = detail::real(params, "eps");
  auto v = WeakPartition::from_parts(base, parts);
  int limit = detail::cap(params, caps.compose);
  if (static_cast<int>(v.assignment.size()) > limit)
    throw Error(ErrorKind::CapExceeded,
                "total degree " + std::to_string(v.assignment.size()) + " above cap " + std::to_string(limit));
  Json out = configuration_json(skizze::compose(base, parts, v, eps));
  if (params.contains("verify") && params.at("verify").is_boolean() && params.at("verify").get<bool>()) {
    ComposeOptions opt;
    opt.degree_cap = limit;
    out["verify"] = report_json(verify_composition(base, parts, eps, opt));
  }
  return out;
}

inline Json doubling(const Json& params, const Caps& = {}) {
  auto x = parse_configuration(detail::str(params, "config"));
  std::string label = detail::str(params, "label");
  Complex dir = params.contains("dir") ? parse_complex(detail::str(params, "dir")) : Complex(1.0);
  std::string fresh = params.contains("new_label") ? detail::str(params, "new_label") : std::string();
  return configuration_json(skizze::doubling(x, label, dir, detail::real(params, "eps"), fresh));
}

inline Json forget(const Json& params, const Caps& = {}) {
  auto x = parse_configuration(detail::str(params, "config"));
  return configuration_json(forgetting(x, detail::str(params, "label")));
}

inline Json render(const Json& params, const Caps& caps = {}) {
  auto p = detail::polynomial(params);
  detail::check_degree(p, detail::cap(params, caps.trace));
  RenderSpec spec;
  if (params.contains("size")) spec.size = detail::integer(params, "size");
  if (spec.size < 16 || spec.size > 8192) throw Error(ErrorKind::InvalidArgument, "size must lie in [16, 8192]");
  auto r = render_svg(skizze::trace(p, detail::trace_config(params)), spec);
  Json out;
  out["red_strokes"] = r.red_strokes;
  out["blue_strokes"] = r.blue_strokes;
  out["leaves"] = r.leaves;
  out["svg"] = r.svg;
  return out;
}

// ------------------------------------------------------------- service ---

/// One instance per connection: requests are handled in order and deform
/// sessions live as long as the connection.
class Service {
 public:
  explicit Service(Caps caps = {}) : caps_(caps) {}

  Json call(const std::string& method, const Json& params) {
    if (method == "classify") return classify(params, caps_);
    if (method == "trace") return trace(params, caps_);
    if (method == "roots") return roots(params, caps_);
    if (method == "enumerate") return enumerate(params, caps_);
    if (method == "poset") return poset(params, caps_);
    if (method == "poset.neighbors") return poset_neighbors(params, caps_);
    if (method == "deform") return deform(params, caps_);
    if (method == "deform.start") return deform_start(params);
    if (method == "deform.step") return deform_step(params);
    if (method == "compose") return compose(params, caps_);
    if (method == "double") return doubling(params, caps_);
    if (method == "forget") return forget(params, caps_);
    if (method == "render") return render(params, caps_);
    throw ServiceError("unknown-method", "no method '" + method + "'");
  }

  /// One request line in, one response line out (without the newline).
  std::string handle(const std::string& line) {
    Json id = nullptr;
    Json response;
    try {
      Json req;
      try {
        req = Json::parse(line);
      } catch (const Json::exception& e) {
        throw ServiceError("malformed-request", std::string("not JSON: ") + e.what());
      }
      if (!req.is_object()) throw ServiceError("malformed-request", "request must be an object");
      if (req.contains("id")) id = req["id"];
      if (!req.contains("method") || !req["method"].is_string())
        throw ServiceError("malformed-request", "request needs a string 'method'");
      Json params = req.contains("params") ? req["params"] : Json::object();
      if (!params.is_object()) throw ServiceError("malformed-request", "'params' must be an object");
      Json result = call(req["method"].get<std::string>(), params);
      response["id"] = id;
      response["result"] = std::move(result);
    } catch (const ServiceError& e) {
      response = error_response(id, e.kind(), e.what());
    } catch (const Error& e) {
      response = error_response(id, std::string(to_string(e.kind())), e.what());
    } catch (const Json::exception& e) {
      response = error_response(id, "parse-error", e.what());
    } catch (const std::exception& e) {
      response = error_response(id, "internal", e.what());
    }
    return response.dump();
  }

 private:
  struct Session {
    CoeffPath path;
    Timeline timeline;
    double t = 0.0;
  };

  static Json error_response(const Json& id, const std::string& kind, const std::string& message) {
    Json r;
    r["id"] = id;
    r["error"] = {{"kind", kind}, {"message", message}};
    return r;
  }

  Json state(int id, const Session& s, const std::vector<WallEvent>& crossed) const {
    Json out;
    out["session"] = id;
    out["t"] = s.t;
    const Segment* seg = &s.timeline.segments.front();
    for (const auto& g : s.timeline.segments)
      if (g.t0 <= s.t && s.t <= g.t1) {
        seg = &g;
        break;
      }
    out["code"] = seg->code;
    out["roots"] = detail::points(expand_roots(find_roots(s.path.at(s.t))));
    out["events"] = Json::array();
    for (const auto& e : crossed) out["events"].push_back(detail::event_json(e));
    return out;
  }

  Json deform_start(const Json& params) {
    auto path = path_param(params, caps_);
    auto tl = stratum_timeline(path, timeline_options(params));
    int id = next_++;
    auto& s = sessions_.emplace(id, Session{std::move(path), std::move(tl), 0.0}).first->second;
    Json out = state(id, s, {});
    out["walls"] = s.timeline.events.size();
    return out;
  }

  Json deform_step(const Json& params) {
    int id = detail::integer(params, "session");
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ServiceError("unknown-session", "no session " + std::to_string(id));
    double dt = detail::real(params, "dt");
    if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
    auto& s = it->second;
    if (s.t + dt > 1.0 + 1e-12)
      throw ServiceError("path-exhausted", "step to t=" + format_real(s.t + dt) + " passes the end of the path");
    double t1 = std::min(1.0, s.t + dt);
    std::vector<WallEvent> crossed;
    for (const auto& e : s.timeline.events)
      if (e.t > s.t && e.t <= t1) crossed.push_back(e);
    s.t = t1;
    return state(id, s, crossed);
  }

  Caps caps_;
  std::map<int, Session> sessions_;
  int next_ = 1;
};

/// Exit status for a library failure: 2 bad input, 3 numeric trouble, 4 cap.
inline int exit_status(ErrorKind k) {
  switch (k) {
    case ErrorKind::ParseError:
    case ErrorKind::InvalidArgument:
      return 2;
    case ErrorKind::CapExceeded:
      return 4;
    default:
      return 3;
  }
}

}  // namespace skizze::service
