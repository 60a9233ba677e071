// skizze: command-line front end. Every verb builds the same JSON params the
// service takes and prints the shared payload.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "server.hpp"
#include "service.hpp"

using skizze::service::Json;
namespace svc = skizze::service;

namespace {

struct Common {
  bool json = false;
  int cap = -1;
  double axis_tol = -1;
  double cluster_radius = -1;
};

void add_common(CLI::App* cmd, Common& c, bool tracing) {
  cmd->add_flag("--json", c.json, "print the payload as one JSON line");
  cmd->add_option("--cap", c.cap, "override the size cap for this verb");
  if (tracing) {
    cmd->add_option("--axis-tol", c.axis_tol, "relative on-axis tolerance for critical values");
    cmd->add_option("--cluster-radius", c.cluster_radius, "merge roots closer than this");
  }
}

void apply_common(Json& params, const Common& c) {
  if (c.cap >= 0) params["cap"] = c.cap;
  if (c.axis_tol > 0) params["axis_tol"] = c.axis_tol;
  if (c.cluster_radius > 0) params["cluster_radius"] = c.cluster_radius;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw skizze::Error(skizze::ErrorKind::InvalidArgument, "cannot write '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gauss-skizze toolkit: classify, trace, enumerate, deform and compose"};
  app.require_subcommand(1);

  Common common;
  std::string poly, roots_text, out_file, catalog, neighbors, path, mode = "coeff", base, config, label, dir, new_label, listen;
  std::vector<std::string> parts;
  int n = 0, samples = 256, size = 640;
  double eps = 0.0;
  bool verify = false, use_stdio = false;

  auto poly_options = [&](CLI::App* cmd) {
    auto* p = cmd->add_option("--poly", poly, "coefficients re:im from the leading 1:0 down, comma separated");
    auto* r = cmd->add_option("--roots", roots_text, "roots re:im, comma separated");
    p->excludes(r);
  };

  auto* roots_cmd = app.add_subcommand("roots", "roots and critical points");
  poly_options(roots_cmd);
  add_common(roots_cmd, common, true);

  auto* classify_cmd = app.add_subcommand("classify", "canonical code of the skizze");
  poly_options(classify_cmd);
  add_common(classify_cmd, common, true);

  auto* trace_cmd = app.add_subcommand("trace", "traced vertices and arcs");
  poly_options(trace_cmd);
  add_common(trace_cmd, common, true);

  auto* enum_cmd = app.add_subcommand("enumerate-generic", "codes of the generic strata");
  enum_cmd->add_option("--n", n, "degree")->required();
  add_common(enum_cmd, common, false);

  auto* poset_cmd = app.add_subcommand("poset", "Whitehead-move poset summary, catalog or neighbours");
  poset_cmd->add_option("--n", n, "degree");
  poset_cmd->add_option("--catalog", catalog, "write the catalog to this file");
  poset_cmd->add_option("--neighbors", neighbors, "covers above and below this code");
  add_common(poset_cmd, common, false);

  auto* deform_cmd = app.add_subcommand("deform", "walls crossed along a path and the strata between them");
  deform_cmd->add_option("--path", path, "P0..P1")->required();
  deform_cmd->add_option("--mode", mode, "coeff or root")->check(CLI::IsMember({"coeff", "root"}));
  deform_cmd->add_option("--samples", samples, "initial grid size");
  add_common(deform_cmd, common, false);

  auto* compose_cmd = app.add_subcommand("compose", "insert scaled parts at base points");
  compose_cmd->add_option("--base", base, "base configuration label=re:im,...")->required();
  compose_cmd->add_option("--part", parts, "p:label=re:im,... for base label p (repeatable)")->required();
  compose_cmd->add_option("--eps", eps, "scale")->required();
  compose_cmd->add_flag("--verify", verify, "check compatibility with contraction");
  add_common(compose_cmd, common, false);

  auto* double_cmd = app.add_subcommand("double", "insert a point next to a label");
  double_cmd->add_option("--config", config, "configuration")->required();
  double_cmd->add_option("--label", label, "point to double")->required();
  double_cmd->add_option("--dir", dir, "direction re:im");
  double_cmd->add_option("--eps", eps, "distance")->required();
  double_cmd->add_option("--new-label", new_label, "label of the new point");
  add_common(double_cmd, common, false);

  auto* forget_cmd = app.add_subcommand("forget", "drop a point");
  forget_cmd->add_option("--config", config, "configuration")->required();
  forget_cmd->add_option("--label", label, "point to drop")->required();
  add_common(forget_cmd, common, false);

  auto* render_cmd = app.add_subcommand("render", "SVG diagram of the skizze");
  poly_options(render_cmd);
  render_cmd->add_option("--out", out_file, "SVG file")->required();
  render_cmd->add_option("--size", size, "canvas size in pixels");
  add_common(render_cmd, common, true);

  auto* serve_cmd = app.add_subcommand("serve", "newline-delimited JSON service");
  serve_cmd->add_flag("--stdio", use_stdio, "serve standard input/output (default)");
  serve_cmd->add_option("--listen", listen, "host:port for a TCP listener");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    svc::Caps caps;
    if (serve_cmd->parsed()) {
      if (listen.empty()) {
        svc::serve_stream(std::cin, std::cout, caps);
        return 0;
      }
      auto colon = listen.rfind(':');
      if (colon == std::string::npos) throw skizze::Error(skizze::ErrorKind::ParseError, "--listen needs host:port");
      int port = 0;
      try {
        port = std::stoi(listen.substr(colon + 1));
      } catch (const std::exception&) {
        throw skizze::Error(skizze::ErrorKind::ParseError, "bad port in '" + listen + "'");
      }
      svc::TcpServer server(caps);
      int bound = server.bind(listen.substr(0, colon), port);
      std::cerr << "listening on " << listen.substr(0, colon) << ':' << bound << std::endl;
      server.run();
      return 0;
    }

    Json params = Json::object();
    if (!poly.empty()) params["poly"] = poly;
    if (!roots_text.empty()) params["roots"] = roots_text;
    apply_common(params, common);

    std::string verb;
    Json payload;
    if (roots_cmd->parsed()) {
      verb = "roots";
      payload = svc::roots(params, caps);
    } else if (classify_cmd->parsed()) {
      verb = "classify";
      payload = svc::classify(params, caps);
    } else if (trace_cmd->parsed()) {
      verb = "trace";
      payload = svc::trace(params, caps);
    } else if (enum_cmd->parsed()) {
      verb = "enumerate-generic";
      params["n"] = n;
      payload = svc::enumerate(params, caps);
    } else if (poset_cmd->parsed()) {
      verb = "poset";
      if (!neighbors.empty()) {
        params["code"] = neighbors;
        payload = svc::poset_neighbors(params, caps);
      } else {
        if (n < 1) throw skizze::Error(skizze::ErrorKind::ParseError, "poset needs --n or --neighbors");
        params["n"] = n;
        payload = svc::poset(params, caps);
        if (!catalog.empty()) {
          write_file(catalog, skizze::format_catalog(*svc::cached_poset(n, common.cap >= 0 ? common.cap : caps.poset)));
          payload["catalog"] = catalog;
        }
      }
    } else if (deform_cmd->parsed()) {
      verb = "deform";
      params["path"] = path;
      params["mode"] = mode;
      params["samples"] = samples;
      payload = svc::deform(params, caps);
    } else if (compose_cmd->parsed()) {
      verb = "compose";
      params["base"] = base;
      params["parts"] = Json::object();
      for (const auto& p : parts) {
        auto colon = p.find(':');
        if (colon == std::string::npos || colon == 0)
          throw skizze::Error(skizze::ErrorKind::ParseError, "--part needs p:label=re:im,..., got '" + p + "'");
        params["parts"][p.substr(0, colon)] = p.substr(colon + 1);
      }
      params["eps"] = eps;
      if (verify) params["verify"] = true;
      payload = svc::compose(params, caps);
    } else if (double_cmd->parsed()) {
      verb = "double";
      params["config"] = config;
      params["label"] = label;
      params["eps"] = eps;
      if (!dir.empty()) params["dir"] = dir;
      if (!new_label.empty()) params["new_label"] = new_label;
      payload = svc::doubling(params, caps);
    } else if (forget_cmd->parsed()) {
      verb = "forget";
      params["config"] = config;
      params["label"] = label;
      payload = svc::forget(params, caps);
    } else if (render_cmd->parsed()) {
      verb = "render";
      params["size"] = size;
      payload = svc::render(params, caps);
      write_file(out_file, payload["svg"].get<std::string>());
      payload.erase("svg");
      payload["file"] = out_file;
    }

    if (common.json)
      std::cout << payload.dump() << '\n';
    else
      std::cout << svc::to_record(verb, payload);
    return 0;
  } catch (const skizze::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return svc::exit_status(e.kind());
  } catch (const svc::ServiceError& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << '\n';
    return 2;
  }
}
