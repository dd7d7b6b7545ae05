#include "tscopf/network.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tscopf/textio.hpp"

namespace tscopf {

int NetworkCase::bus_index(int id) const {
  auto it = bus_idx_.find(id);
  if (it == bus_idx_.end()) throw SemanticError("unknown bus " + std::to_string(id));
  return it->second;
}

int NetworkCase::gen_index(int id) const {
  auto it = gen_idx_.find(id);
  if (it == gen_idx_.end()) throw SemanticError("unknown generator " + std::to_string(id));
  return it->second;
}

int NetworkCase::zone_index(int zone_id) const {
  auto it = zone_idx_.find(zone_id);
  if (it == zone_idx_.end()) throw SemanticError("unknown zone " + std::to_string(zone_id));
  return it->second;
}

void NetworkCase::finalize() {
  bus_idx_.clear();
  gen_idx_.clear();
  zone_idx_.clear();
  zone_ids_.clear();
  for (int i = 0; i < n(); ++i) {
    if (!bus_idx_.emplace(buses[i].id, i).second)
      throw SemanticError("duplicate bus id " + std::to_string(buses[i].id));
  }
  for (int j = 0; j < m(); ++j) {
    if (!gen_idx_.emplace(gens[j].id, j).second)
      throw SemanticError("duplicate generator id " + std::to_string(gens[j].id));
  }
  std::set<int> zs;
  for (const auto& b : buses) zs.insert(b.zone);
  zone_ids_.assign(zs.begin(), zs.end());
  for (int k = 0; k < num_zones(); ++k) zone_idx_[zone_ids_[k]] = k;

  M_ = Eigen::MatrixXd::Zero(n(), m());
  Z_ = Eigen::MatrixXd::Zero(num_zones(), m());
  for (int j = 0; j < m(); ++j) {
    int bi = bus_index(gens[j].bus);
    M_(bi, j) = 1.0;
    Z_(zone_index(buses[bi].zone), j) = 1.0;
  }
  // reference checks for branches and loads
  for (const auto& br : branches) {
    bus_index(br.from);
    bus_index(br.to);
  }
  for (const auto& ld : loads) bus_index(ld.bus);
}

Eigen::VectorXd NetworkCase::d_pu() const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n());
  for (const auto& ld : loads) d(bus_index(ld.bus)) += ld.d_mw / base_mva;
  return d;
}

Eigen::VectorXd NetworkCase::l_pu() const {
  Eigen::VectorXd l = Eigen::VectorXd::Zero(n());
  for (const auto& ld : loads) l(bus_index(ld.bus)) += ld.l_mvar / base_mva;
  return l;
}

Eigen::VectorXd NetworkCase::gmin_pu() const {
  Eigen::VectorXd v(m());
  for (int j = 0; j < m(); ++j) v(j) = gens[j].gmin / base_mva;
  return v;
}
Eigen::VectorXd NetworkCase::gmax_pu() const {
  Eigen::VectorXd v(m());
  for (int j = 0; j < m(); ++j) v(j) = gens[j].gmax / base_mva;
  return v;
}
Eigen::VectorXd NetworkCase::rmin_pu() const {
  Eigen::VectorXd v(m());
  for (int j = 0; j < m(); ++j) v(j) = gens[j].rmin / base_mva;
  return v;
}
Eigen::VectorXd NetworkCase::rmax_pu() const {
  Eigen::VectorXd v(m());
  for (int j = 0; j < m(); ++j) v(j) = gens[j].rmax / base_mva;
  return v;
}

double NetworkCase::cost(const Eigen::VectorXd& g_pu) const {
  double c = 0.0;
  for (int j = 0; j < m(); ++j) {
    double mw = g_pu(j) * base_mva;
    c += gens[j].c2 * mw * mw + gens[j].c1 * mw + gens[j].c0;
  }
  return c;
}

Eigen::VectorXd NetworkCase::cost_gradient(const Eigen::VectorXd& g_pu) const {
  Eigen::VectorXd grad(m());
  for (int j = 0; j < m(); ++j) {
    double mw = g_pu(j) * base_mva;
    grad(j) = (2.0 * gens[j].c2 * mw + gens[j].c1) * base_mva;  // d$/d(pu)
  }
  return grad;
}

Eigen::VectorXd NetworkCase::cost_hessian_diag() const {
  Eigen::VectorXd h(m());
  for (int j = 0; j < m(); ++j) h(j) = 2.0 * gens[j].c2 * base_mva * base_mva;
  return h;
}

namespace {

struct FieldMap {
  std::map<std::string, double> vals;
  std::set<std::string> seen;
  int line;
};

FieldMap read_block(Tokenizer& tk, const std::vector<std::string>& allowed) {
  FieldMap fm;
  fm.line = tk.line();
  tk.expect("{");
  while (tk.peek() != "}") {
    int ln = tk.line();
    std::string key = tk.next();
    bool ok = false;
    for (const auto& a : allowed) ok = ok || a == key;
    if (!ok) throw ParseError(ln, "unknown field '" + key + "'");
    if (!fm.seen.insert(key).second) throw ParseError(ln, "duplicate field '" + key + "'");
    fm.vals[key] = tk.next_number();
  }
  tk.expect("}");
  return fm;
}

double get(const FieldMap& fm, const std::string& key) {
  auto it = fm.vals.find(key);
  if (it == fm.vals.end()) throw ParseError(fm.line, "missing field '" + key + "'");
  return it->second;
}

double get_or(const FieldMap& fm, const std::string& key, double dflt) {
  auto it = fm.vals.find(key);
  return it == fm.vals.end() ? dflt : it->second;
}

NetworkCase parse_impl(const std::string& text) {
  Tokenizer tk(text);
  NetworkCase c;
  bool have_base = false;
  while (!tk.done()) {
    int ln = tk.line();
    std::string sec = tk.next();
    if (sec == "base_mva") {
      c.base_mva = tk.next_number();
      have_base = true;
    } else if (sec == "frequency") {
      auto fm = read_block(tk, {"nominal_hz", "min_hz"});
      c.nominal_hz = get(fm, "nominal_hz");
      c.min_hz = get(fm, "min_hz");
    } else if (sec == "bus") {
      auto fm = read_block(tk, {"id", "vmin", "vmax", "zone"});
      Bus b;
      b.id = static_cast<int>(get(fm, "id"));
      b.vmin = get(fm, "vmin");
      b.vmax = get(fm, "vmax");
      b.zone = static_cast<int>(get_or(fm, "zone", 1));
      c.buses.push_back(b);
    } else if (sec == "branch") {
      auto fm = read_block(tk, {"from", "to", "r", "x", "b", "smax", "tap", "shift"});
      Branch br;
      br.from = static_cast<int>(get(fm, "from"));
      br.to = static_cast<int>(get(fm, "to"));
      br.r = get(fm, "r");
      br.x = get(fm, "x");
      br.b = get_or(fm, "b", 0.0);
      br.smax = get(fm, "smax");
      br.tap = get_or(fm, "tap", 1.0);
      br.shift = get_or(fm, "shift", 0.0);
      c.branches.push_back(br);
    } else if (sec == "gen") {
      auto fm = read_block(tk, {"id", "bus", "gmin", "gmax", "rmin", "rmax", "c2", "c1", "c0",
                                "droop", "inertia_s", "damping", "tgov_s"});
      Generator g;
      g.id = static_cast<int>(get(fm, "id"));
      g.bus = static_cast<int>(get(fm, "bus"));
      g.gmin = get(fm, "gmin");
      g.gmax = get(fm, "gmax");
      g.rmin = get(fm, "rmin");
      g.rmax = get(fm, "rmax");
      g.c2 = get(fm, "c2");
      g.c1 = get(fm, "c1");
      g.c0 = get(fm, "c0");
      g.droop = get(fm, "droop");
      g.inertia_s = get(fm, "inertia_s");
      g.damping = get_or(fm, "damping", 0.0);
      g.tgov_s = get_or(fm, "tgov_s", 0.5);
      c.gens.push_back(g);
    } else if (sec == "load") {
      auto fm = read_block(tk, {"bus", "d_mw", "l_mvar"});
      LoadPoint ld;
      ld.bus = static_cast<int>(get(fm, "bus"));
      ld.d_mw = get(fm, "d_mw");
      ld.l_mvar = get(fm, "l_mvar");
      c.loads.push_back(ld);
    } else {
      throw ParseError(ln, "unknown section '" + sec + "'");
    }
  }
  if (!have_base) throw ParseError(1, "missing base_mva");
  if (c.buses.empty()) throw ParseError(1, "case has no buses");
  c.finalize();
  return c;
}

// Union-find connectivity over branches.
int uf_find(std::vector<int>& p, int i) {
  while (p[i] != i) i = p[i] = p[p[i]];
  return i;
}

}  // namespace

NetworkCase parse_case_lenient(const std::string& text) { return parse_impl(text); }

NetworkCase parse_case(const std::string& text) {
  NetworkCase c = parse_impl(text);
  auto viol = validate_case(c);
  if (!viol.empty()) throw SemanticError(viol.front());
  return c;
}

std::string serialize_case(const NetworkCase& c) {
  std::ostringstream os;
  os << "base_mva " << fmt17(c.base_mva) << "\n";
  os << "frequency { nominal_hz " << fmt17(c.nominal_hz) << " min_hz " << fmt17(c.min_hz)
     << " }\n";
  for (const auto& b : c.buses)
    os << "bus { id " << b.id << " vmin " << fmt17(b.vmin) << " vmax " << fmt17(b.vmax)
       << " zone " << b.zone << " }\n";
  for (const auto& br : c.branches)
    os << "branch { from " << br.from << " to " << br.to << " r " << fmt17(br.r) << " x "
       << fmt17(br.x) << " b " << fmt17(br.b) << " smax " << fmt17(br.smax) << " tap "
       << fmt17(br.tap) << " shift " << fmt17(br.shift) << " }\n";
  for (const auto& g : c.gens)
    os << "gen { id " << g.id << " bus " << g.bus << " gmin " << fmt17(g.gmin) << " gmax "
       << fmt17(g.gmax) << " rmin " << fmt17(g.rmin) << " rmax " << fmt17(g.rmax) << " c2 "
       << fmt17(g.c2) << " c1 " << fmt17(g.c1) << " c0 " << fmt17(g.c0) << " droop "
       << fmt17(g.droop) << " inertia_s " << fmt17(g.inertia_s) << " damping "
       << fmt17(g.damping) << " tgov_s " << fmt17(g.tgov_s) << " }\n";
  for (const auto& ld : c.loads)
    os << "load { bus " << ld.bus << " d_mw " << fmt17(ld.d_mw) << " l_mvar "
       << fmt17(ld.l_mvar) << " }\n";
  return os.str();
}

std::vector<std::string> validate_case(const NetworkCase& c) {
  std::vector<std::string> v;
  auto bad = [&](const std::string& msg) { v.push_back(msg); };
  if (!(c.base_mva > 0)) bad("base_mva must be positive");
  if (!(c.nominal_hz > 0)) bad("nominal frequency must be positive");
  if (!(c.min_hz >= 0 && c.min_hz <= c.nominal_hz))
    bad("min frequency must lie in [0, nominal]");
  for (const auto& b : c.buses) {
    std::string tag = "bus " + std::to_string(b.id) + ": ";
    if (!(b.vmin > 0)) bad(tag + "vmin must be positive");
    if (!(b.vmin <= b.vmax)) bad(tag + "vmin exceeds vmax");
  }
  for (size_t k = 0; k < c.branches.size(); ++k) {
    const auto& br = c.branches[k];
    std::string tag = "branch " + std::to_string(k + 1) + ": ";
    if (br.x == 0.0) bad(tag + "zero reactance");
    if (!(br.smax > 0)) bad(tag + "smax must be positive");
    if (br.from == br.to) bad(tag + "from equals to");
    if (!(br.tap > 0)) bad(tag + "tap must be positive");
  }
  for (const auto& g : c.gens) {
    std::string tag = "gen " + std::to_string(g.id) + ": ";
    if (!(g.gmin <= g.gmax)) bad(tag + "gmin exceeds gmax");
    if (!(g.rmin <= g.rmax)) bad(tag + "rmin exceeds rmax");
    if (g.c2 < 0) bad(tag + "c2 must be nonnegative (convex cost)");
    if (!(g.droop > 0)) bad(tag + "droop must be positive");
    if (!(g.inertia_s > 0)) bad(tag + "inertia must be positive");
    if (!(g.tgov_s > 0)) bad(tag + "governor time constant must be positive");
  }
  for (const auto& ld : c.loads) {
    if (!std::isfinite(ld.d_mw) || !std::isfinite(ld.l_mvar))
      bad("load at bus " + std::to_string(ld.bus) + ": non-finite value");
  }
  // connectivity
  if (c.n() > 1) {
    std::vector<int> parent(c.n());
    for (int i = 0; i < c.n(); ++i) parent[i] = i;
    for (const auto& br : c.branches) {
      int a = uf_find(parent, c.bus_index(br.from));
      int b = uf_find(parent, c.bus_index(br.to));
      parent[a] = b;
    }
    int root = uf_find(parent, 0);
    for (int i = 1; i < c.n(); ++i)
      if (uf_find(parent, i) != root) {
        bad("island detected: bus " + std::to_string(c.buses[i].id) +
            " not connected to bus " + std::to_string(c.buses[0].id));
        break;
      }
  }
  return v;
}

Eigen::MatrixXcd admittance_matrix(const NetworkCase& c) {
  using cd = std::complex<double>;
  Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(c.n(), c.n());
  for (const auto& br : c.branches) {
    if (br.x == 0.0) throw SemanticError("zero-reactance branch " + std::to_string(br.from) +
                                         "-" + std::to_string(br.to));
    int f = c.bus_index(br.from);
    int t = c.bus_index(br.to);
    cd ys = 1.0 / cd(br.r, br.x);
    cd ysh(0.0, br.b / 2.0);
    cd tap = std::polar(br.tap, br.shift);
    Y(f, f) += (ys + ysh) / (br.tap * br.tap);
    Y(t, t) += ys + ysh;
    Y(f, t) += -ys / std::conj(tap);
    Y(t, f) += -ys / tap;
  }
  return Y;
}

NetworkCase load_case_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SemanticError("cannot open case file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_case(ss.str());
}

}  // namespace tscopf
