#include "ckn/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <system_error>

#include <boost/crc.hpp>

#include "ckn/error.hpp"
#include "ckn/symmetric.hpp"

namespace ckn {

namespace fs = std::filesystem;
using nlohmann::json;

// --- files -----------------------------------------------------------------

void atomic_write(const fs::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// --- configuration -----------------------------------------------------------

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (d < 2) fail("d must be at least 2");
  if (!(p > 2.0)) fail("p must exceed 2");
  if (d > 2 && !(p < 2.0 * d / (d - 2.0))) fail("p must be below 2d/(d-2)");
  if (theta_list.empty()) fail("theta_list is empty");
  const double tc = theta_critical(p, d);
  for (double t : theta_list)
    if (!(t >= tc - 1e-12 && t <= 1.0)) {
      std::ostringstream os;
      os << "theta " << t << " outside [" << tc << ", 1]";
      fail(os.str());
    }
  if (!(L > 0.0)) fail("L must be positive");
  if (n_s < 16 || n_phi < 8) fail("grid too small (n_s >= 16, n_phi >= 8)");
  if (n_s % 2 == 0) fail("n_s must be odd so that s = 0 is a node");
  if (s_grading < 0.0 || phi_grading < 0.0) fail("grading must be non-negative");
  if (!(mu0_factor > 0.0)) fail("mu0_factor must be positive");
  if (eps && !(*eps >= 0.0)) fail("eps must be non-negative");
  if (eta && !(*eta > 0.0)) fail("eta must be positive");
  if (kappa_stop && !(*kappa_stop > 0.0)) fail("kappa_stop must be positive");
  if (sym_mu_min && !(*sym_mu_min > 0.0)) fail("sym_mu_min must be positive");
  if (sym_mu_max && !(*sym_mu_max > sym_mu_min.value_or(0.0))) fail("sym_mu_max must exceed sym_mu_min");
  if (sym_count < 2) fail("sym_count must be at least 2");
  if (!(tolerances.potential_tol > 0.0) || !(tolerances.lambda_tol > 0.0) || !(tolerances.eigen_tol > 0.0))
    fail("tolerances must be positive");
  if (tolerances.max_iter < 1 || tolerances.max_descent_steps < 1) fail("iteration caps must be positive");
}

ProblemParams RunConfig::params() const { return make_params(d, p, 1.0, measure_mode); }

namespace {

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null())
    out.reset();
  else
    out = j.at(key).get<T>();
}

std::uint32_t crc32(std::string_view bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

}  // namespace

std::string RunConfig::effective_run_id() const {
  if (!run_id.empty()) return run_id;
  json j = to_json(*this);
  j.erase("run_id");
  j.erase("out_dir");
  std::ostringstream os;
  os << "run-" << std::hex;
  os.width(8);
  os.fill('0');
  os << crc32(j.dump());
  return os.str();
}

json to_json(const RunConfig& c) {
  return json{{"d", c.d},
              {"p", c.p},
              {"theta_list", c.theta_list},
              {"measure_mode", to_string(c.measure_mode)},
              {"L", c.L},
              {"n_s", c.n_s},
              {"n_phi", c.n_phi},
              {"s_grading", c.s_grading},
              {"phi_grading", c.phi_grading},
              {"mu0_factor", c.mu0_factor},
              {"eps", opt(c.eps)},
              {"eta", opt(c.eta)},
              {"kappa_stop", opt(c.kappa_stop)},
              {"sym_mu_min", opt(c.sym_mu_min)},
              {"sym_mu_max", opt(c.sym_mu_max)},
              {"sym_count", c.sym_count},
              {"tolerances",
               {{"potential_tol", c.tolerances.potential_tol},
                {"lambda_tol", c.tolerances.lambda_tol},
                {"eigen_tol", c.tolerances.eigen_tol},
                {"max_iter", c.tolerances.max_iter},
                {"max_descent_steps", c.tolerances.max_descent_steps}}},
              {"out_dir", c.out_dir.string()},
              {"run_id", c.run_id}};
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  static const std::set<std::string> known{
      "d",          "p",          "theta_list", "measure_mode", "L",         "n_s",
      "n_phi",      "s_grading",  "phi_grading", "mu0_factor",  "eps",       "eta",
      "kappa_stop", "sym_mu_min", "sym_mu_max", "sym_count",    "tolerances", "out_dir",
      "run_id"};
  for (const auto& [k, v] : j.items())
    if (!known.contains(k)) throw ConfigError("config: unknown key '" + k + "'");
  RunConfig c;
  try {
    if (j.contains("d")) c.d = j.at("d").get<int>();
    if (j.contains("p")) c.p = j.at("p").get<double>();
    if (j.contains("theta_list")) {
      const json& t = j.at("theta_list");
      c.theta_list = t.is_array() ? t.get<std::vector<double>>() : std::vector<double>{t.get<double>()};
    }
    if (j.contains("measure_mode")) c.measure_mode = measure_mode_from_string(j.at("measure_mode").get<std::string>());
    if (j.contains("L")) c.L = j.at("L").get<double>();
    if (j.contains("n_s")) c.n_s = j.at("n_s").get<int>();
    if (j.contains("n_phi")) c.n_phi = j.at("n_phi").get<int>();
    if (j.contains("s_grading")) c.s_grading = j.at("s_grading").get<double>();
    if (j.contains("phi_grading")) c.phi_grading = j.at("phi_grading").get<double>();
    if (j.contains("mu0_factor")) c.mu0_factor = j.at("mu0_factor").get<double>();
    read_opt(j, "eps", c.eps);
    read_opt(j, "eta", c.eta);
    read_opt(j, "kappa_stop", c.kappa_stop);
    read_opt(j, "sym_mu_min", c.sym_mu_min);
    read_opt(j, "sym_mu_max", c.sym_mu_max);
    if (j.contains("sym_count")) c.sym_count = j.at("sym_count").get<int>();
    if (j.contains("tolerances")) {
      const json& t = j.at("tolerances");
      Tolerances& o = c.tolerances;
      o.potential_tol = t.value("potential_tol", o.potential_tol);
      o.lambda_tol = t.value("lambda_tol", o.lambda_tol);
      o.eigen_tol = t.value("eigen_tol", o.eigen_tol);
      o.max_iter = t.value("max_iter", o.max_iter);
      o.max_descent_steps = t.value("max_descent_steps", o.max_descent_steps);
    }
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("run_id")) c.run_id = j.at("run_id").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError&) {
    throw ConfigError("config: cannot read " + path.string());
  }
  try {
    return config_from_json(json::parse(text));
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
}

// --- checkpoints -------------------------------------------------------------

namespace {

constexpr std::string_view kMagic = "CKNFIELD";

void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xffu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xffu));
}

void put_f64(std::string& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }

class Reader {
 public:
  explicit Reader(std::string_view b) : b_(b) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= std::uint32_t(static_cast<unsigned char>(b_[pos_ + k])) << (8 * k);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= std::uint64_t(static_cast<unsigned char>(b_[pos_ + k])) << (8 * k);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw IoError("checkpoint: truncated file");
  }
  std::string_view b_;
  std::size_t pos_ = 0;
};

}  // namespace

Checkpoint Checkpoint::from_field(const Field& u) {
  const CylinderGrid& g = u.grid();
  const auto v = u.values();
  return {g.params().d, g.params().p, g.params().measure_mode, g.half_length(), g.n_s(), g.n_phi(), {v.begin(), v.end()}};
}

Field Checkpoint::to_field(const GridPtr& grid) const {
  const CylinderGrid& g = *grid;
  if (g.params().d != d || g.params().p != p || g.params().measure_mode != measure_mode || g.half_length() != L ||
      g.n_s() != n_s || g.n_phi() != n_phi)
    throw InvalidSizeError("checkpoint: header does not match the grid");
  return Field(grid, values);
}

std::string encode_checkpoint(const Checkpoint& c) {
  if (c.values.size() != static_cast<std::size_t>(c.n_s) * c.n_phi)
    throw InvalidSizeError("checkpoint: value count does not match n_s n_phi");
  std::string out(kMagic);
  out.reserve(64 + 8 * c.values.size());
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(c.d));
  put_f64(out, c.p);
  put_u32(out, c.measure_mode == MeasureMode::surface ? 1u : 0u);
  put_f64(out, c.L);
  put_u32(out, static_cast<std::uint32_t>(c.n_s));
  put_u32(out, static_cast<std::uint32_t>(c.n_phi));
  for (double x : c.values) put_f64(out, x);
  put_u32(out, crc32(out));
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(kMagic.size()) != kMagic) throw IoError("checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kFormatVersion) throw IoError("checkpoint: unsupported version " + std::to_string(version));
  Checkpoint c;
  c.d = static_cast<int>(r.u32());
  c.p = r.f64();
  const std::uint32_t mode = r.u32();
  if (mode > 1) throw IoError("checkpoint: bad measure mode");
  c.measure_mode = mode == 1 ? MeasureMode::surface : MeasureMode::probability;
  c.L = r.f64();
  c.n_s = static_cast<int>(r.u32());
  c.n_phi = static_cast<int>(r.u32());
  const std::size_t n = static_cast<std::size_t>(c.n_s) * static_cast<std::size_t>(c.n_phi);
  if (bytes.size() != r.pos() + 8 * n + 4) throw IoError("checkpoint: size does not match the header");
  c.values.resize(n);
  for (double& x : c.values) x = r.f64();
  const std::size_t body = r.pos();
  if (r.u32() != crc32(bytes.substr(0, body))) throw IoError("checkpoint: checksum mismatch");
  return c;
}

void save_checkpoint(const fs::path& path, const Checkpoint& c) { atomic_write(path, encode_checkpoint(c)); }

Checkpoint load_checkpoint(const fs::path& path) { return decode_checkpoint(read_file(path)); }

// --- CSV -----------------------------------------------------------------------

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::size_t CsvTable::column(std::string_view name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw IoError("csv: no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

double CsvTable::number(std::size_t row, std::string_view name) const {
  const std::string& s = rows.at(row).at(column(name));
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IoError("csv: '" + s + "' in column " + std::string(name) + " is not a number");
  return x;
}

std::string csv_preamble(const RunConfig& c, std::string_view extra) {
  std::ostringstream os;
  os << "# format: ckn-csv " << kFormatVersion << "\n";
  os << "# run_id: " << c.effective_run_id() << "\n";
  os << "# params: d=" << c.d << " p=" << format_number(c.p) << " measure_mode=" << to_string(c.measure_mode)
     << " L=" << format_number(c.L) << " n_s=" << c.n_s << " n_phi=" << c.n_phi << " theta=";
  for (std::size_t k = 0; k < c.theta_list.size(); ++k) os << (k ? "," : "") << format_number(c.theta_list[k]);
  os << "\n";
  if (!extra.empty()) os << extra;
  return os.str();
}

std::string format_csv(const std::string& preamble, const std::vector<std::string>& columns,
                       const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  os << preamble;
  for (std::size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << columns[k];
  os << "\n";
  for (const auto& r : rows) {
    if (r.size() != columns.size()) throw InvalidSizeError("csv: row width does not match the header");
    for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << r[k];
    os << "\n";
  }
  return os.str();
}

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line);
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        auto trim = [](std::string s) {
          const auto a = s.find_first_not_of(' ');
          const auto b = s.find_last_not_of(' ');
          return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        t.meta[trim(line.substr(1, colon - 1))] = trim(line.substr(colon + 1));
      }
      continue;
    }
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (!header) {
      t.columns = std::move(cells);
      header = true;
    } else {
      if (cells.size() != t.columns.size()) throw IoError("csv: ragged row");
      t.rows.push_back(std::move(cells));
    }
  }
  if (!header) throw IoError("csv: missing header row");
  return t;
}

std::string format_csv(const CsvTable& table) {
  std::string preamble;
  for (const auto& c : table.comments) preamble += c + "\n";
  return format_csv(preamble, table.columns, table.rows);
}

std::string field_csv(const std::string& preamble, const Field& u) {
  const CylinderGrid& g = u.grid();
  const auto s = g.s_nodes();
  const auto phi = g.phi_nodes();
  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<std::size_t>(g.n_s()) * g.n_phi());
  for (int i = 0; i < g.n_s(); ++i)
    for (int j = 0; j < g.n_phi(); ++j) rows.push_back({format_number(s[i]), format_number(phi[j]), format_number(u(i, j))});
  return format_csv(preamble, {"s", "phi", "u"}, rows);
}

// --- SVG -----------------------------------------------------------------------

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double x, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << x;
  return os.str();
}

}  // namespace

std::string render_diagram(const ThetaCurve& sym, const ThetaCurve& nonsym, const Envelope& env,
                           const std::optional<Crossing>& crossing, std::string_view title) {
  constexpr double W = 640, H = 480, ml = 80, mr = 20, mt = 40, mb = 60;
  std::vector<ThetaPoint> ns;
  for (const ThetaPoint& q : nonsym.points)
    if (!q.symmetric) ns.push_back(q);

  // Window: the non-symmetric curve with a margin, or the whole symmetric
  // curve when there is none.
  double l0 = INFINITY, l1 = -INFINITY, j0 = INFINITY, j1 = -INFINITY;
  const auto& frame = ns.size() >= 2 ? ns : sym.points;
  for (const ThetaPoint& q : frame) {
    l0 = std::min(l0, q.Lambda);
    l1 = std::max(l1, q.Lambda);
  }
  if (!(l1 > l0)) {
    l0 -= 1.0;
    l1 += 1.0;
  }
  const double pad = 0.15 * (l1 - l0);
  l0 -= pad;
  l1 += pad;
  auto inside = [&](const ThetaPoint& q) { return q.Lambda >= l0 && q.Lambda <= l1; };
  for (const std::vector<ThetaPoint>* c : {&sym.points, static_cast<const std::vector<ThetaPoint>*>(&ns)})
    for (const ThetaPoint& q : *c)
      if (inside(q)) {
        j0 = std::min(j0, q.J);
        j1 = std::max(j1, q.J);
      }
  if (!(j1 > j0)) {
    j0 -= 1.0;
    j1 += 1.0;
  }
  const double jpad = 0.08 * (j1 - j0);
  j0 -= jpad;
  j1 += jpad;

  auto X = [&](double L) { return ml + (L - l0) / (l1 - l0) * (W - ml - mr); };
  auto Y = [&](double J) { return H - mb - (J - j0) / (j1 - j0) * (H - mt - mb); };
  auto pts = [&](const std::vector<ThetaPoint>& c) {
    std::ostringstream os;
    bool first = true;
    for (const ThetaPoint& q : c) {
      if (!inside(q) || q.J < j0 || q.J > j1) continue;
      os << (first ? "" : " ") << fixed(X(q.Lambda), 2) << "," << fixed(Y(q.J), 2);
      first = false;
    }
    return os.str();
  };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << " " << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << xml_escape(title) << "</text>\n";
  // Axes and ticks.
  os << "<g stroke=\"black\" stroke-width=\"1\">\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb << "\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb << "\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double xl = X(l0 + k * (l1 - l0) / 5);
    const double yj = Y(j0 + k * (j1 - j0) / 5);
    os << "<line x1=\"" << fixed(xl, 2) << "\" y1=\"" << H - mb << "\" x2=\"" << fixed(xl, 2) << "\" y2=\""
       << H - mb + 5 << "\"/>\n";
    os << "<line x1=\"" << ml - 5 << "\" y1=\"" << fixed(yj, 2) << "\" x2=\"" << ml << "\" y2=\"" << fixed(yj, 2)
       << "\"/>\n";
  }
  os << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double lv = l0 + k * (l1 - l0) / 5;
    const double jv = j0 + k * (j1 - j0) / 5;
    os << "<text x=\"" << fixed(X(lv), 2) << "\" y=\"" << H - mb + 18 << "\" text-anchor=\"middle\">" << fixed(lv, 4)
       << "</text>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << fixed(Y(jv) + 4, 2) << "\" text-anchor=\"end\">" << fixed(jv, 4)
       << "</text>\n";
  }
  os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">Lambda</text>\n";
  os << "<text x=\"20\" y=\"" << (mt + H - mb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << (mt + H - mb) / 2 << ")\">J</text>\n</g>\n";

  os << "<polyline class=\"symmetric\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" "
        "stroke-dasharray=\"6,4\" points=\""
     << pts(sym.points) << "\"/>\n";
  os << "<polyline class=\"non-symmetric\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"" << pts(ns)
     << "\"/>\n";

  std::ostringstream d;
  bool pen = false;
  for (const EnvelopePoint& e : env.points) {
    if (e.Lambda < l0 || e.Lambda > l1 || e.J < j0 || e.J > j1) {
      pen = false;
      continue;
    }
    d << (pen ? " L" : (d.tellp() > 0 ? " M" : "M")) << fixed(X(e.Lambda), 2) << "," << fixed(Y(e.J), 2);
    pen = true;
  }
  if (d.tellp() > 0)
    os << "<path class=\"envelope\" fill=\"none\" stroke=\"black\" stroke-opacity=\"0.6\" stroke-width=\"4\" d=\""
       << d.str() << "\"/>\n";
  if (crossing)
    os << "<circle class=\"crossing\" cx=\"" << fixed(X(crossing->Lambda1), 2) << "\" cy=\""
       << fixed(Y(crossing->J1), 2) << "\" r=\"4\" fill=\"none\" stroke=\"black\"/>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace ckn
