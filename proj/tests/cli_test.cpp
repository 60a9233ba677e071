#include <gtest/gtest.h>
#include <sys/socket.h>
#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "graphs.hpp"
#include "server.hpp"
#include "service.hpp"
#include "skizze/moves.hpp"

using namespace skizze;
using service::Json;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

// runs the built CLI through the shell; stderr is discarded
Run cli(const std::string& args, const std::string& input = {}) {
  std::string cmd = std::string(SKIZZE_CLI) + " " + args + " 2>/dev/null";
  if (!input.empty()) {
    std::string file = testing::TempDir() + "skizze_in.txt";
    std::ofstream(file) << input;
    cmd = std::string(SKIZZE_CLI) + " " + args + " < " + file + " 2>/dev/null";
  }
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t k;
  while ((k = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, k);
  int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string q(const std::string& s) { return "'" + s + "'"; }

int count(const std::string& text, const std::string& needle) {
  int c = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++c;
  return c;
}

Json request(service::Service& svc, const Json& req) { return Json::parse(svc.handle(req.dump())); }

}  // namespace

TEST(Record, ScalarsListsAndNesting) {
  Json j;
  j["n"] = 2;
  j["ok"] = true;
  j["code"] = "n1|T[L0 r:R4 L1 L2 L3]";
  j["poly"] = "1:0,0:0";
  j["idx"] = {0, 1};
  j["empty"] = "";
  j["kids"] = Json::array({{{"a", 1}}, {{"a", 2}}});
  j["codes"] = {"x y", "z"};
  j["sub"] = {{"t", 0.5}};
  j["none"] = Json::array();
  EXPECT_EQ(service::to_record("rec", j),
            "rec n:2 ok:true code:\"n1|T[L0 r:R4 L1 L2 L3]\" poly:1:0,0:0 idx:0,1 empty:\"\" none:[]\n"
            "  kids a:1\n"
            "  kids a:2\n"
            "  codes:\"x y\"\n"
            "  codes:z\n"
            "  sub t:0.5\n");
}

TEST(Cli, ClassifyPrintsTheCode) {
  auto r = cli("classify --poly 1:0,0:0,-1:0");
  EXPECT_EQ(r.status, 0);
  auto code = canonical_code(fixtures::z2_minus_1());
  EXPECT_NE(r.out.find("code:\"" + code + "\""), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("codim:1"), std::string::npos);
}

TEST(Cli, EnumerateGenericMatchesTracedQuadrants) {
  auto r = cli("enumerate-generic --n 2 --json");
  ASSERT_EQ(r.status, 0);
  auto j = Json::parse(r.out);
  std::vector<std::string> codes = j["codes"];
  ASSERT_EQ(codes.size(), 4u);
  EXPECT_TRUE(std::is_sorted(codes.begin(), codes.end()));
  // one traced z^2 - c per open quadrant of c
  std::set<std::string> traced;
  for (double th : {0.25, 0.75, 1.25, 1.75})
    traced.insert(classify(Polynomial::monic({1.0, 0.0, -std::polar(1.0, th * std::numbers::pi)})).code);
  EXPECT_EQ(std::set<std::string>(codes.begin(), codes.end()), traced);
}

TEST(Cli, RenderDrawsAxesBranchesAndLeaves) {
  std::string file = testing::TempDir() + "z2.svg";
  auto r = cli("render --poly 1:0,0:0,-1:0 --out " + file);
  ASSERT_EQ(r.status, 0);
  std::ifstream f(file);
  std::stringstream ss;
  ss << f.rdbuf();
  std::string svg = ss.str();
  EXPECT_EQ(count(svg, "class=\"stroke red\""), 2);
  EXPECT_EQ(count(svg, "class=\"stroke blue\""), 2);
  EXPECT_EQ(count(svg, "class=\"leaf\""), 8);
  EXPECT_EQ(count(svg, "class=\"root\""), 2);
  EXPECT_EQ(count(svg, "class=\"crit\""), 1);
  for (char c : std::string("ABCD")) EXPECT_GT(count(svg, std::string("class=\"face ") + c + "\""), 0) << c;
  // red strokes are the two coordinate axes: every vertex has Re or Im ~ 0
  std::regex path("class=\"stroke red\"[^>]*d=\"M([^\"]*)\"");
  int axes = 0;
  for (std::sregex_iterator it(svg.begin(), svg.end(), path), end; it != end; ++it) {
    std::string d = (*it)[1];
    std::istringstream is(d);
    std::string tok;
    double xmin = 1e9, xmax = -1e9, ymin = 1e9, ymax = -1e9;
    while (is >> tok) {
      if (tok[0] == 'L') tok = tok.substr(1);
      double x = std::stod(tok.substr(0, tok.find(','))), y = std::stod(tok.substr(tok.find(',') + 1));
      xmin = std::min(xmin, x), xmax = std::max(xmax, x), ymin = std::min(ymin, y), ymax = std::max(ymax, y);
    }
    if (xmax - xmin < 0.5 || ymax - ymin < 0.5) ++axes;
  }
  EXPECT_EQ(axes, 2);
}

TEST(Cli, ExitStatuses) {
  EXPECT_EQ(cli("classify --poly 2:0,1:0").status, 2);
  EXPECT_EQ(cli("classify --poly nonsense").status, 2);
  EXPECT_EQ(cli("classify --bogus").status, 2);
  EXPECT_EQ(cli("classify --roots 0:0,1:0,2:0,3:0,4:0,5:0,6:0,7:0,8:0").status, 4);
  EXPECT_EQ(cli("poset --n 5").status, 4);
  EXPECT_EQ(cli("compose --base p=0:0 --part p:a=0:0,b=1:0,c=2:0,d=3:0,e=4:0 --eps 0.1").status, 4);
  EXPECT_EQ(cli("double --config a=0:0,b=1:0 --label a --dir 0:0 --eps 0.1").status, 3);
  EXPECT_EQ(cli("classify --roots 0:0,1:0,2:0,3:0,4:0,5:0,6:0,7:0,8:0 --cap 9").status, 0);
}

TEST(Cli, OperadVerbs) {
  auto r = cli("compose --base p=0:0,q=10:0 --part p:a=-1:0,b=1:0 --part q:c=0:0 --eps 0.1 --verify --json");
  ASSERT_EQ(r.status, 0);
  auto j = Json::parse(r.out);
  auto x = parse_configuration(j["configuration"].get<std::string>());
  EXPECT_NEAR(std::abs(x.at("a") + 0.1), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(x.at("b") - 0.1), 0.0, 1e-15);
  EXPECT_EQ(x.at("c"), Complex(10.0));
  EXPECT_TRUE(j["verify"]["passed"].get<bool>());

  r = cli("double --config a=0:0,b=10:0 --label a --eps 0.01 --json");
  EXPECT_EQ(Json::parse(r.out)["configuration"], "a=0:0,a'=0.01:0,b=10:0");
  r = cli("forget --config a=0:0,b=1:0,c=5:0 --label b --json");
  auto f = Json::parse(r.out);
  EXPECT_EQ(f["configuration"], "a=0:0,c=5:0");
  EXPECT_EQ(parse_polynomial(f["polynomial"].get<std::string>()).coeffs(), (std::vector<Complex>{1.0, -5.0, 0.0}));
}

TEST(Cli, PosetCatalogAndNeighbors) {
  std::string file = testing::TempDir() + "n2.catalog";
  auto r = cli("poset --n 2 --catalog " + file + " --json");
  ASSERT_EQ(r.status, 0);
  auto j = Json::parse(r.out);
  EXPECT_EQ(j["nodes"], 9);
  std::ifstream f(file);
  std::stringstream ss;
  ss << f.rdbuf();
  auto p = parse_catalog(ss.str());
  EXPECT_EQ(p.nodes.size(), 9u);
  EXPECT_EQ(p.maximal, maximal_element(2));

  r = cli("poset --neighbors " + q(maximal_element(2)) + " --json");
  auto nb = Json::parse(r.out);
  EXPECT_TRUE(nb["parents"].empty());
  EXPECT_FALSE(nb["children"].empty());
}

TEST(Service, ClassifyEchoesTheId) {
  service::Service svc;
  auto r = request(svc, {{"id", 1}, {"method", "classify"}, {"params", {{"poly", "1:0,0:0,-1:0"}}}});
  EXPECT_EQ(r["id"], 1);
  EXPECT_EQ(r["result"]["code"], canonical_code(fixtures::z2_minus_1()));
  auto s = request(svc, {{"id", "abc"}, {"method", "classify"}, {"params", {{"roots", "1:0,-1:0"}}}});
  EXPECT_EQ(s["id"], "abc");
  EXPECT_EQ(s["result"], r["result"]);
}

TEST(Service, ErrorsKeepTheConnection) {
  std::istringstream in(
      "{\"id\":7,\"method\":\"nope\"}\n"
      "not json\n"
      "{\"id\":8,\"method\":\"classify\",\"params\":{\"poly\":\"2:0,1:0\"}}\n"
      "{\"id\":9,\"method\":\"classify\"}\n"
      "{\"id\":10,\"method\":\"enumerate\",\"params\":{\"n\":1}}\n");
  std::ostringstream out;
  service::serve_stream(in, out);
  std::istringstream lines(out.str());
  std::vector<Json> rs;
  std::string line;
  while (std::getline(lines, line)) rs.push_back(Json::parse(line));
  ASSERT_EQ(rs.size(), 5u);
  EXPECT_EQ(rs[0]["id"], 7);
  EXPECT_EQ(rs[0]["error"]["kind"], "unknown-method");
  EXPECT_TRUE(rs[1]["id"].is_null());
  EXPECT_EQ(rs[1]["error"]["kind"], "malformed-request");
  EXPECT_EQ(rs[2]["id"], 8);
  EXPECT_EQ(rs[2]["error"]["kind"], "parse-error");
  EXPECT_EQ(rs[3]["error"]["kind"], "parse-error");
  EXPECT_EQ(rs[4]["id"], 10);
  EXPECT_EQ(rs[4]["result"]["count"], 1);
}

TEST(Service, DeformSessionSteps) {
  // z^2 - c with c from 1+0.5i to 1-0.5i: the critical value -c is real at t = 1/2
  service::Service svc;
  auto start = request(svc, {{"id", 1},
                             {"method", "deform.start"},
                             {"params", {{"path", "1:0,0:0,-1:-0.5..1:0,0:0,-1:0.5"}, {"mode", "coeff"}, {"samples", 64}}}});
  ASSERT_TRUE(start.contains("result")) << start.dump();
  int sid = start["result"]["session"];
  EXPECT_EQ(start["result"]["walls"], 1);
  auto step = [&](double dt) {
    return request(svc, {{"id", 2}, {"method", "deform.step"}, {"params", {{"session", sid}, {"dt", dt}}}});
  };
  auto a = step(0.25);
  EXPECT_EQ(a["result"]["events"].size(), 0u);
  EXPECT_EQ(a["result"]["code"], start["result"]["code"]);
  auto b = step(0.5);
  ASSERT_EQ(b["result"]["events"].size(), 1u);
  EXPECT_EQ(b["result"]["events"][0]["kind"], "critical-value-real");
  EXPECT_NEAR(b["result"]["events"][0]["t"].get<double>(), 0.5, 1e-8);
  EXPECT_NE(b["result"]["code"], a["result"]["code"]);
  // the traced code at t = 3/4 agrees with the session's segment code
  Complex c(1.0, -0.25);
  EXPECT_EQ(b["result"]["code"], classify(Polynomial::monic({1.0, 0.0, -c})).code);
  EXPECT_EQ(step(0.5)["error"]["kind"], "path-exhausted");
  auto end = step(0.25);
  EXPECT_DOUBLE_EQ(end["result"]["t"].get<double>(), 1.0);
  EXPECT_EQ(step(1e-3)["error"]["kind"], "path-exhausted");
  auto bad = request(svc, {{"id", 3}, {"method", "deform.step"}, {"params", {{"session", 99}, {"dt", 0.1}}}});
  EXPECT_EQ(bad["error"]["kind"], "unknown-session");
}

TEST(Service, PosetNeighborsAgreeWithTheCovers) {
  service::Service svc;
  auto p = build_poset(2);
  for (const auto& code : p.nodes) {
    auto r = request(svc, {{"id", 1}, {"method", "poset.neighbors"}, {"params", {{"code", code}}}});
    ASSERT_TRUE(r.contains("result")) << r.dump();
    EXPECT_EQ(r["result"]["parents"].size(), p.parents_of(code).size());
    EXPECT_EQ(r["result"]["children"].size(), p.children_of(code).size());
  }
}

TEST(Parity, CliAndServiceReturnTheSameBytes) {
  struct Case {
    std::string args;
    Json req;
  };
  const std::string z3 = "1:0,0.5:-0.25,-1:0.75,0.3:0.1";
  std::vector<Case> cases{
      {"classify --poly " + z3 + " --json", {{"method", "classify"}, {"params", {{"poly", z3}}}}},
      {"trace --poly " + z3 + " --json", {{"method", "trace"}, {"params", {{"poly", z3}}}}},
      {"roots --roots 1:1,-2:0.5 --json", {{"method", "roots"}, {"params", {{"roots", "1:1,-2:0.5"}}}}},
      {"enumerate-generic --n 3 --json", {{"method", "enumerate"}, {"params", {{"n", 3}}}}},
      {"poset --neighbors " + q(maximal_element(2)) + " --json",
       {{"method", "poset.neighbors"}, {"params", {{"code", maximal_element(2)}}}}},
      {"deform --path 1:0,0:0,-1:-0.5..1:0,0:0,-1:0.5 --mode root --samples 64 --json",
       {{"method", "deform"}, {"params", {{"path", "1:0,0:0,-1:-0.5..1:0,0:0,-1:0.5"}, {"mode", "root"}, {"samples", 64}}}}},
      {"forget --config a=0:0,b=1:0 --label a --json",
       {{"method", "forget"}, {"params", {{"config", "a=0:0,b=1:0"}, {"label", "a"}}}}},
  };
  service::Service svc;
  for (auto& c : cases) {
    auto r = cli(c.args);
    ASSERT_EQ(r.status, 0) << c.args;
    c.req["id"] = 1;
    auto resp = Json::parse(svc.handle(c.req.dump()));
    ASSERT_TRUE(resp.contains("result")) << resp.dump();
    EXPECT_EQ(r.out, resp["result"].dump() + "\n") << c.args;
  }
}

TEST(Parity, StdioServeMatchesInProcess) {
  std::string line = R"({"id":5,"method":"classify","params":{"poly":"1:0,0:0,-1:0"}})";
  auto r = cli("serve --stdio", line + "\n");
  EXPECT_EQ(r.status, 0);
  service::Service svc;
  EXPECT_EQ(r.out, svc.handle(line) + "\n");
}

TEST(Determinism, RepeatedRunsAreIdentical) {
  for (const std::string args : {"classify --roots 0.3:0.2,-1:0.5,0.8:-0.9", "deform --path 1:0,0:0,-1:-0.5..1:0,0:0,-1:0.5",
                                  "poset --n 3 --json"}) {
    auto a = cli(args), b = cli(args);
    EXPECT_EQ(a.status, 0);
    EXPECT_EQ(a.out, b.out) << args;
  }
}

TEST(Tcp, ConcurrentConnections) {
  service::TcpServer server;
  int port = server.bind("127.0.0.1", 0);
  std::thread loop([&] { server.run(); });

  auto client = [&](int base, std::vector<Json>& replies) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    ASSERT_EQ(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
    std::string msg;
    msg += Json({{"id", base}, {"method", "classify"}, {"params", {{"roots", "1:0,-1:0.25"}}}}).dump() + "\n";
    msg += "garbage\n";
    msg += Json({{"id", base + 1}, {"method", "enumerate"}, {"params", {{"n", 2}}}}).dump() + "\n";
    ASSERT_EQ(::send(fd, msg.data(), msg.size(), 0), static_cast<ssize_t>(msg.size()));
    std::string buf;
    char chunk[4096];
    while (std::count(buf.begin(), buf.end(), '\n') < 3) {
      auto k = ::recv(fd, chunk, sizeof chunk, 0);
      if (k <= 0) break;
      buf.append(chunk, static_cast<std::size_t>(k));
    }
    ::close(fd);
    std::istringstream is(buf);
    std::string line;
    while (std::getline(is, line)) replies.push_back(Json::parse(line));
  };
  std::vector<Json> r1, r2;
  std::thread a([&] { client(100, r1); }), b([&] { client(200, r2); });
  a.join();
  b.join();
  server.stop();
  loop.join();
  for (auto* rs : {&r1, &r2}) {
    ASSERT_EQ(rs->size(), 3u);
    EXPECT_TRUE((*rs)[0].contains("result"));
    EXPECT_EQ((*rs)[1]["error"]["kind"], "malformed-request");
    EXPECT_EQ((*rs)[2]["result"]["count"], 4);
  }
  EXPECT_EQ(r1[0]["id"], 100);
  EXPECT_EQ(r2[2]["id"], 201);
  EXPECT_EQ(r1[0]["result"], r2[0]["result"]);
}
