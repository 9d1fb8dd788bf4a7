#include "lrbgk/snapshot.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

namespace lrbgk {

namespace {

constexpr char kMagic[8] = {'L', 'R', 'B', 'G', 'K', 'S', 'N', '1'};

template <class T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ConfigError("truncated snapshot file");
  return v;
}

void put_block(std::ofstream& os, const Eigen::MatrixXd& m) {
  os.write(reinterpret_cast<const char*>(m.data()), std::streamsize(m.size() * sizeof(double)));
}

void get_block(std::ifstream& is, Eigen::MatrixXd& m) {
  is.read(reinterpret_cast<char*>(m.data()), std::streamsize(m.size() * sizeof(double)));
  if (!is) throw ConfigError("truncated snapshot file");
}

void put_field(std::ofstream& os, const Field& f) {
  os.write(reinterpret_cast<const char*>(f.data()), std::streamsize(f.size() * sizeof(double)));
}

Field get_field(std::ifstream& is, Index n) {
  Field f(n);
  is.read(reinterpret_cast<char*>(f.data()), std::streamsize(n * sizeof(double)));
  if (!is) throw ConfigError("truncated snapshot file");
  return f;
}

void write_raw(const std::string& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  put_field(os, f);
}

}  // namespace

void write_snapshot(const std::string& path, const Snapshot& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  const SpatialGrid& g = s.state.xgrid;
  const VelocityGrid& v = s.state.vgrid;
  os.write(kMagic, sizeof(kMagic));
  put<std::int64_t>(os, g.nx);
  put<std::int64_t>(os, g.ny);
  for (double b : {g.ax, g.bx, g.ay, g.by}) put(os, b);
  put<std::int64_t>(os, v.nv);
  put(os, v.av);
  put(os, v.bv);
  put<std::int64_t>(os, s.state.rank());
  put(os, s.time);
  put_field(os, s.mom.rho);
  put_field(os, s.mom.u.x);
  put_field(os, s.mom.u.y);
  if (s.state.rank() > 0) {
    put_block(os, s.state.X);
    put_block(os, s.state.S);
    put_block(os, s.state.V);
  }
  if (!os) throw ConfigError("write failed for " + path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open snapshot " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw ConfigError(path + " is not a snapshot file");
  Snapshot s;
  const Index nx = get<std::int64_t>(is), ny = get<std::int64_t>(is);
  const double ax = get<double>(is), bx = get<double>(is), ay = get<double>(is), by = get<double>(is);
  s.state.xgrid = make_spatial_grid(nx, ny, ax, bx, ay, by);
  const Index nv = get<std::int64_t>(is);
  const double av = get<double>(is), bv = get<double>(is);
  const Index r = get<std::int64_t>(is);
  if (nv > 0) s.state.vgrid = make_velocity_grid(nv, av, bv);
  s.time = get<double>(is);
  const Index n = s.state.xgrid.size();
  s.mom.rho = get_field(is, n);
  s.mom.u.x = get_field(is, n);
  s.mom.u.y = get_field(is, n);
  if (r > 0) {
    if (nv <= 0) throw ConfigError("snapshot has rank but no velocity grid");
    s.state.X.resize(n, r);
    s.state.S.resize(r, r);
    s.state.V.resize(s.state.vgrid.size(), r);
    get_block(is, s.state.X);
    get_block(is, s.state.S);
    get_block(is, s.state.V);
  } else {
    s.state.S.resize(0, 0);
  }
  return s;
}

void write_field_dump(const std::string& path, const SpatialGrid& g, const Field& f, double time,
                      const std::string& name) {
  write_raw(path, f);
  std::ofstream h(path + ".hdr");
  h << std::setprecision(17) << "name " << name << "\nkind spatial\ndims " << g.nx << ' ' << g.ny << "\nbounds "
    << g.ax << ' ' << g.bx << ' ' << g.ay << ' ' << g.by << "\ntime " << time
    << "\nlayout float64 little-endian, first index fastest\n";
}

void write_field_dump(const std::string& path, const VelocityGrid& g, const Field& f, double time,
                      const std::string& name) {
  write_raw(path, f);
  std::ofstream h(path + ".hdr");
  h << std::setprecision(17) << "name " << name << "\nkind velocity\ndims " << g.nv << ' ' << g.nv << "\nbounds "
    << g.av << ' ' << g.bv << ' ' << g.av << ' ' << g.bv << "\ntime " << time
    << "\nlayout float64 little-endian, first index fastest\n";
}

Field restrict_to(const SpatialGrid& fine, const Field& f, const SpatialGrid& coarse) {
  if (fine.nx % coarse.nx != 0 || fine.ny % coarse.ny != 0)
    throw ConfigError("grid sizes are not integer multiples");
  const double tol = 1e-12 * (std::abs(fine.bx - fine.ax) + std::abs(fine.by - fine.ay));
  if (std::abs(fine.ax - coarse.ax) > tol || std::abs(fine.bx - coarse.bx) > tol ||
      std::abs(fine.ay - coarse.ay) > tol || std::abs(fine.by - coarse.by) > tol)
    throw ConfigError("grids cover different domains");
  const Index sx = fine.nx / coarse.nx, sy = fine.ny / coarse.ny;
  Field out(coarse.size());
  for (Index j = 0; j < coarse.ny; ++j)
    for (Index i = 0; i < coarse.nx; ++i) out(coarse.idx(i, j)) = f(fine.idx(i * sx, j * sy));
  return out;
}

double moment_error(const SpatialGrid& ga, const MomentState& a, const SpatialGrid& gb, const MomentState& b) {
  const bool a_coarse = ga.size() <= gb.size();
  const SpatialGrid& gc = a_coarse ? ga : gb;
  const SpatialGrid& gf = a_coarse ? gb : ga;
  const MomentState& mc = a_coarse ? a : b;
  const MomentState& mf = a_coarse ? b : a;
  const Field rho = restrict_to(gf, mf.rho, gc);
  const Field mx = restrict_to(gf, mf.rho.cwiseProduct(mf.u.x).eval(), gc);
  const Field my = restrict_to(gf, mf.rho.cwiseProduct(mf.u.y).eval(), gc);
  const double e_rho = (rho - mc.rho).cwiseAbs().maxCoeff();
  const double e_mx = (mx - mc.rho.cwiseProduct(mc.u.x)).cwiseAbs().maxCoeff();
  const double e_my = (my - mc.rho.cwiseProduct(mc.u.y)).cwiseAbs().maxCoeff();
  return std::max({e_rho, e_mx, e_my});
}

}  // namespace lrbgk
