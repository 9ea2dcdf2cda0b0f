#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

#include "ckn/error.hpp"
#include "ckn/io.hpp"
#include "ckn/symmetric.hpp"

using namespace ckn;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("ckn_unit_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int count(const std::string& text, const std::string& needle) {
  int n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("config round trip") {
  RunConfig c;
  c.p = 2.78;
  c.theta_list = {5.0 / 7.0, 0.8, 1.0};
  c.measure_mode = MeasureMode::probability;
  c.n_s = 121;
  c.eps = 0.1;
  c.kappa_stop = 12.345678901234567;
  c.tolerances.max_iter = 77;
  c.out_dir = "some/where";
  c.run_id = "fixed";
  auto back = config_from_json(nlohmann::json::parse(to_json(c).dump()));
  CHECK(back == c);
  CHECK(config_from_json(to_json(RunConfig{})) == RunConfig{});

  auto dir = scratch("config");
  atomic_write(dir / "c.json", to_json(c).dump(2));
  CHECK(load_config(dir / "c.json") == c);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
  atomic_write(dir / "bad.json", "{ not json");
  CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"dimension", 5}}), ConfigError);
}

TEST_CASE("config validation") {
  auto bad = [](auto edit) {
    RunConfig c;
    edit(c);
    return c;
  };
  CHECK_NOTHROW(RunConfig{}.validate());
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.theta_list = {0.7}; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.theta_list = {}; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.n_s = 240; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.L = -1.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.p = 3.5; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.eta = 0.0; }).validate(), ConfigError);

  RunConfig a, b;
  b.out_dir = "elsewhere";
  CHECK(a.effective_run_id() == b.effective_run_id());
  b.p = 2.7;
  CHECK(a.effective_run_id() != b.effective_run_id());
}

TEST_CASE("checkpoint round trip is bitwise") {
  auto g = build_grid(10.0, 33, 9, make_params(5, 2.8));
  Field u(g);
  std::mt19937_64 rng(5);
  for (double& v : u.values()) v = std::bit_cast<double>(rng() & 0x7fefffffffffffffull) * ((rng() & 1) ? 1 : -1);
  u.values()[0] = -0.0;
  u.values()[1] = std::numeric_limits<double>::denorm_min();

  auto ck = Checkpoint::from_field(u);
  const std::string bytes = encode_checkpoint(ck);
  auto back = decode_checkpoint(bytes);
  CHECK(encode_checkpoint(back) == bytes);
  auto f = back.to_field(g);
  for (std::size_t k = 0; k < u.values().size(); ++k)
    CHECK(std::bit_cast<std::uint64_t>(f.values()[k]) == std::bit_cast<std::uint64_t>(u.values()[k]));
  CHECK(bytes.substr(0, 8) == "CKNFIELD");
  CHECK(bytes.size() == 8 + 4 + 4 + 8 + 4 + 8 + 4 + 4 + 8 * u.values().size() + 4);

  auto dir = scratch("checkpoint");
  save_checkpoint(dir / "u.ckpt", ck);
  CHECK(read_file(dir / "u.ckpt") == bytes);
  CHECK(encode_checkpoint(load_checkpoint(dir / "u.ckpt")) == bytes);

  std::string flipped = bytes;
  flipped[100] ^= 0x01;
  CHECK_THROWS_AS(decode_checkpoint(flipped), IoError);
  CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 9)), IoError);
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(magic), IoError);
  CHECK_THROWS_AS(load_checkpoint(dir / "none.ckpt"), IoError);

  auto other = build_grid(10.0, 35, 9, make_params(5, 2.8));
  CHECK_THROWS_AS(back.to_field(other), InvalidSizeError);
}

TEST_CASE("numbers and tables round trip") {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 1000; ++k) {
    const double x = std::bit_cast<double>(rng() & 0x7fefffffffffffffull);
    CsvTable t;
    t.columns = {"x"};
    t.rows = {{format_number(x)}};
    CHECK(std::bit_cast<std::uint64_t>(t.number(0, "x")) == std::bit_cast<std::uint64_t>(x));
  }
  RunConfig c;
  const std::string text = format_csv(csv_preamble(c, "# extra: 1\n# extra: 2\n"), {"a", "b"},
                                      {{"1", "nan"}, {"-inf", "2.5e-300"}});
  auto t = parse_csv(text);
  CHECK(format_csv(t) == text);
  CHECK(t.meta.at("format") == "ckn-csv 1");
  CHECK(t.meta.at("run_id") == c.effective_run_id());
  CHECK(t.meta.at("params").find("p=2.8") != std::string::npos);
  CHECK(std::isnan(t.number(0, "b")));
  CHECK(t.number(1, "a") == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(t.column("c"), IoError);
  CHECK_THROWS_AS(parse_csv("# only comments\n"), IoError);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), IoError);
}

TEST_CASE("diagram has one dashed and one solid polyline") {
  auto pr = make_params(5, 2.8, 0.8);
  auto mus = log_grid(1.0, 20.0, 30);
  auto sym = map_to_theta(symmetric_curve(mus, 0.8, pr), 0.8, pr);
  ThetaCurve ns = sym;
  for (auto& pt : ns.points) {
    pt.J *= 0.99;
    pt.symmetric = pt.mu < 4.0;
  }
  std::vector<double> grid;
  for (int k = 0; k < 50; ++k) grid.push_back(1.0 + 0.2 * k);
  std::vector<ThetaCurve> both{sym, ns};
  auto env = min_envelope(both, grid);
  const std::string svg = render_diagram(sym, ns, env, std::nullopt, "p=2.8 & theta<1");
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(count(svg, "<polyline") == 2);
  CHECK(count(svg, "stroke-dasharray") == 1);
  CHECK(count(svg, "<svg") == 1);
  CHECK(count(svg, "</svg>") == 1);
  CHECK(svg.find("& ") == std::string::npos);
}

TEST_CASE("atomic writes") {
  auto dir = scratch("atomic");
  atomic_write(dir / "nested" / "f.txt", "one");
  atomic_write(dir / "nested" / "f.txt", "two");
  CHECK(read_file(dir / "nested" / "f.txt") == "two");
  CHECK_FALSE(fs::exists(dir / "nested" / "f.txt.tmp"));
  CHECK_THROWS_AS(read_file(dir / "absent"), IoError);
}
