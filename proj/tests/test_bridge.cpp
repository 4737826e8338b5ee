#include <doctest.h>

#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "tamp/bridge/server.hpp"
#include "tamp/bridge/session.hpp"
#include "tamp/envs/demo_io.hpp"

using namespace tamp;
using namespace tamp::bridge;
namespace beast = boost::beast;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;
using envs::StickButtonEnv;

namespace {

std::string temp_path(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("tamp_bridge_" + name);
  std::filesystem::remove(p);
  return p.string();
}

Object find(const State& x, const std::string& type) {
  for (Object o : x.objects()) {
    if (o.type().name() == type) return o;
  }
  FAIL("no object of type " << type);
  return x.objects().front();
}

// Synchronous websocket client for the service.
class Client {
 public:
  explicit Client(unsigned short port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/ws");
  }
  Message call(const Message& m) {
    ws_.text(true);
    ws_.write(asio::buffer(serialize(m)));
    beast::flat_buffer buf;
    ws_.read(buf);
    return parse(beast::buffers_to_string(buf.data()));
  }
  beast::websocket::stream<tcp::socket>& ws() { return ws_; }

 private:
  asio::io_context ioc_;
  beast::websocket::stream<tcp::socket> ws_;
};

std::string http_get(unsigned short port, const std::string& target, int* status) {
  asio::io_context ioc;
  tcp::socket sock(ioc);
  tcp::resolver resolver(ioc);
  asio::connect(sock, resolver.resolve("127.0.0.1", std::to_string(port)));
  beast::http::request<beast::http::empty_body> req{beast::http::verb::get, target, 11};
  req.set(beast::http::field::host, "127.0.0.1");
  beast::http::write(sock, req);
  beast::flat_buffer buf;
  beast::http::response<beast::http::string_body> res;
  beast::http::read(sock, buf, res);
  *status = static_cast<int>(res.result_int());
  return res.body();
}

}  // namespace

TEST_CASE("protocol: every message type round-trips") {
  Snapshot snap;
  snap.session = "s1";
  snap.objects = {{"robot", "robot", {{"x", 0.25}, {"y", 0.1}}}};
  snap.atoms = {"AboveNoButton(robot)"};
  snap.goal = {"Pressed(button0)"};
  snap.reachable_zone = {0, 1, 0, 0.5};
  snap.arena = {0, 1, 0, 1};
  snap.geometry = {{"max_step", 0.1}};
  snap.status = "active";
  snap.steps = 4;
  std::vector<Message> all{Start{},
                           Start{42},
                           snap,
                           Input{Input::Kind::kMove, 0.3, 0.1 + 0.2},
                           Input{Input::Kind::kPressKey, {}, {}},
                           ActionMsg{{0.1, -0.05, 1.0}},
                           Finish{"save"},
                           Finish{"discarded"},
                           ErrorMsg{"session_state", "nope"}};
  for (const auto& m : all) {
    std::string text = serialize(m);
    CHECK(parse(text) == m);
    CHECK(serialize(parse(text)) == text);
  }
  for (const char* bad :
       {"", "[]", R"({"type":"warp"})", R"({"type":"input","kind":"move","x":1})",
        R"({"type":"input","kind":"press_key","x":1})", R"({"type":"start","seed":-1})",
        R"({"type":"finish","outcome":"maybe"})", R"({"type":"action","vector":[1],"extra":0})",
        R"({"type":"action","vector":["a"]})"}) {
    std::string text = bad;
    CAPTURE(text);
    CHECK_THROWS_AS(parse(text), ProtocolError);
  }
}

TEST_CASE("session: snapshots are deterministic and mirror the abstract state") {
  DemoSession a("a", 11), b("a", 11);
  CHECK(a.snapshot() == b.snapshot());
  Snapshot s = a.snapshot();
  const State& x = a.recording().states.back();
  REQUIRE(s.objects.size() == x.objects().size());
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    Object o = x.objects()[i];
    CHECK(s.objects[i].name == o.name());
    CHECK(s.objects[i].type == o.type().name());
    REQUIRE(s.objects[i].features.size() == o.type().dim());
    for (std::size_t f = 0; f < o.type().dim(); ++f) CHECK(s.objects[i].features[f].second == x.get(o, f));
  }
  // Recompute the atoms independently.
  std::vector<std::string> atoms;
  for (const auto& p : a.env().predicates()) {
    for_each_typed_tuple(p.arg_types(), x.objects(), true, [&](std::span<const Object> objs) {
      if (p.holds(x, objs)) atoms.push_back(to_string(GroundAtom(p, {objs.begin(), objs.end()})));
    });
  }
  std::sort(atoms.begin(), atoms.end());
  CHECK(s.atoms == atoms);
  CHECK(s.reachable_zone.y_hi == a.env().config().reach_y);
  CHECK(s.status == "active");
}

TEST_CASE("session: move clipping and press_key grasp") {
  DemoSession s("s", 3);
  const auto& c = s.env().config();
  const State& x0 = s.recording().states.back();
  Object robot = find(x0, "robot");
  double rx = x0.get(robot, StickButtonEnv::kRX), ry = x0.get(robot, StickButtonEnv::kRY);

  Action still = s.translate(Input{Input::Kind::kMove, rx, ry});
  CHECK(still == Action{0.0, 0.0, 0.0});
  Action far = s.translate(Input{Input::Kind::kMove, rx > 0.5 ? 0.0 : 1.0, 1.0});
  CHECK(std::hypot(far[0], far[1]) == doctest::Approx(c.max_step).epsilon(1e-12));
  CHECK(s.translate(Input{Input::Kind::kPressKey, {}, {}}) == Action{0.0, 0.0, 1.0});

  // Walk to a grasp point on the stick, then press any key.
  Object stick = find(x0, "stick");
  double gx = x0.get(stick, StickButtonEnv::kSX);
  double gy = std::min(x0.get(stick, StickButtonEnv::kSY) + 0.3, c.reach_y - 0.01);
  for (int i = 0; i < 40 && s.status() == Status::kActive; ++i) s.apply(Input{Input::Kind::kMove, gx, gy});
  const State& at = s.recording().states.back();
  CHECK(at.get(robot, StickButtonEnv::kRX) == doctest::Approx(gx));
  Snapshot after = s.apply(Input{Input::Kind::kPressKey, {}, {}});
  bool grasped = std::any_of(after.atoms.begin(), after.atoms.end(),
                             [](const std::string& a) { return a.rfind("Grasped(", 0) == 0; });
  CHECK(grasped);
  CHECK(after.steps == s.recording().actions.size());
  // Every recorded step replays.
  auto replayed = envs::replay(s.env(), s.recording().task.init, s.recording().actions);
  CHECK(replayed.back() == s.recording().states.back());
}

TEST_CASE("session: state errors, save and discard") {
  DemoSession s("s", 5);
  CHECK_THROWS_AS(s.finish("save"), SessionError);
  CHECK_THROWS_AS(s.apply(ActionMsg{{0.0, 0.0}}), SessionError);
  auto demo = s.env().scripted_demo(s.recording().task);
  REQUIRE(demo.has_value());
  for (const auto& u : demo->actions) s.apply(ActionMsg{u});
  CHECK(s.status() == Status::kDone);
  try {
    s.apply(ActionMsg{{0.0, 0.0, 0.0}});
    FAIL("input accepted after done");
  } catch (const SessionError& e) {
    CHECK(e.code() == "session_state");
  }
  auto saved = s.finish("save");
  REQUIRE(saved.has_value());
  CHECK(envs::validate_demo(s.env(), *saved, s.env().predicates()).empty());

  DemoSession d("d", 5);
  CHECK_FALSE(d.finish("discard").has_value());
  CHECK(d.status() == Status::kAbandoned);
}

TEST_CASE("server: headless client records a demonstration over raw actions") {
  ServerOptions opt;
  opt.port = 0;
  opt.demos_path = temp_path("demos.jsonl");
  Server server(opt);
  unsigned short port = server.start();

  int status = 0;
  CHECK(http_get(port, "/", &status).find("docs/protocol.md") != std::string::npos);
  CHECK(status == 200);
  http_get(port, "/missing.js", &status);
  CHECK(status == 404);

  {
    Client c(port);
    auto err = c.call(Input{Input::Kind::kPressKey, {}, {}});
    REQUIRE(std::holds_alternative<ErrorMsg>(err));
    CHECK(std::get<ErrorMsg>(err).code == "no_session");
    CHECK(std::get<ErrorMsg>(c.call(Snapshot{})).code == "bad_message");

    auto first = std::get<Snapshot>(c.call(Start{9}));
    CHECK(first.status == "active");
    CHECK(std::get<ErrorMsg>(c.call(Start{9})).code == "session_state");
    CHECK(std::get<ErrorMsg>(c.call(Finish{"save"})).code == "session_state");

    const auto& env = envs::get_environment("stick_button");
    auto demo = env.scripted_demo(env.sample_task(9, envs::Profile::kTrain));
    REQUIRE(demo.has_value());
    Snapshot last;
    for (const auto& u : demo->actions) last = std::get<Snapshot>(c.call(ActionMsg{u}));
    CHECK(last.status == "done");
    CHECK(std::get<Finish>(c.call(Finish{"save"})).outcome == "saved");

    // A discarded second session leaves the file alone.
    std::get<Snapshot>(c.call(Start{}));
    CHECK(std::get<Finish>(c.call(Finish{"discard"})).outcome == "discarded");
    c.ws().close(beast::websocket::close_code::normal);
  }
  CHECK(server.saved() == 1);
  const auto& env = envs::get_environment("stick_button");
  auto loaded = envs::read_demos_file(opt.demos_path, env, env.predicates());
  REQUIRE(loaded.size() == 1);
  auto demo = env.scripted_demo(env.sample_task(9, envs::Profile::kTrain));
  CHECK(loaded[0].actions == demo->actions);
  server.stop();
}

TEST_CASE("server: idle sessions are closed") {
  ServerOptions opt;
  opt.port = 0;
  opt.demos_path = temp_path("idle.jsonl");
  opt.idle_timeout_s = 0.3;
  Server server(opt);
  unsigned short port = server.start();
  Client c(port);
  std::get<Snapshot>(c.call(Start{1}));
  std::this_thread::sleep_for(std::chrono::milliseconds(1200));
  beast::error_code ec;
  c.ws().write(asio::buffer(serialize(Input{Input::Kind::kPressKey, {}, {}})), ec);
  beast::flat_buffer buf;
  if (!ec) c.ws().read(buf, ec);
  CHECK(ec);
  server.stop();
  CHECK_FALSE(std::filesystem::exists(opt.demos_path));
}

TEST_CASE("server: stop() ends open connections") {
  ServerOptions opt;
  opt.port = 0;
  opt.demos_path = temp_path("stop.jsonl");
  Server server(opt);
  unsigned short port = server.start();
  Client c(port);
  std::get<Snapshot>(c.call(Start{1}));
  server.stop();  // returns although the client never closed
  CHECK(server.saved() == 0);
}
