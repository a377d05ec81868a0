#include "rbstab/reduced_operators.hpp"

#include "element_loop.hpp"

#include <sstream>

namespace rbstab
{

using namespace detail;

namespace
{

ReducedAffineMatrix project(const AffineMatrix &op, const Mat &left, const Mat &right)
{
  ReducedAffineMatrix out;
  out.rows = static_cast<int>(left.cols());
  out.cols = static_cast<int>(right.cols());
  for (const auto &t : op.terms)
    out.add(t.theta, left.transpose() * (t.term * right));
  return out;
}

// Accumulates the quadrature factor rows of the trilinear and SUPG forms in
// batches and multiplies them out bucket by bucket.
class TensorBuilder
{
public:
  TensorBuilder(int nv, int np, bool supg, std::optional<double> fixed, int batch)
    : nv_(nv), np_(np), supg_(supg), fixed_(fixed), batch_(batch)
  {
    const int nn = nv * nv;
    for (int i = 0; i < 2; ++i)
    {
      conv_[i] = Mat::Zero(nn, nv);
      e1_[i] = supg ? Mat::Zero(nv, nn) : Mat();
    }
    if (supg)
    {
      for (int i = 0; i < 4; ++i)
        e2_[i] = Mat::Zero(nv, nn);
      for (int i = 0; i < 3; ++i)
      {
        e3_[i] = Mat::Zero(nn, nn);
        e4_[i] = Mat::Zero(np, nn);
        f3_[i] = Mat::Zero(nn, np);
      }
    }
    reset();
  }

  void reset()
  {
    const int nn = nv_ * nv_;
    tx_.setZero(batch_, nn);
    ty_.setZero(batch_, nn);
    vk_.setZero(batch_, nv_);
    wg_.setZero(batch_);
    ws_.setZero(batch_);
    if (supg_)
    {
      lxx_.setZero(batch_, nv_);
      lyy_.setZero(batch_, nv_);
      gx_.setZero(batch_, np_);
      gy_.setZero(batch_, np_);
    }
    rows_ = 0;
  }

  // One (quadrature point, component m) row.
  template <class A, class B, class C, class D, class E>
  void add_row(const A &vx, const A &vy, const B &dxm, const B &dym, const C &vm, double wg, double ws,
               const D &lxx, const D &lyy, const E &gx, const E &gy)
  {
    if (rows_ == batch_)
      flush();
    for (int b = 0; b < nv_; ++b)
    {
      tx_.block(rows_, nv_ * b, 1, nv_) = dxm(b) * vx;
      ty_.block(rows_, nv_ * b, 1, nv_) = dym(b) * vy;
    }
    vk_.row(rows_) = vm;
    wg_[rows_] = wg;
    ws_[rows_] = ws;
    if (supg_)
    {
      lxx_.row(rows_) = lxx;
      lyy_.row(rows_) = lyy;
      gx_.row(rows_) = gx;
      gy_.row(rows_) = gy;
    }
    ++rows_;
  }

  void flush()
  {
    if (rows_ == 0)
      return;
    const int r = rows_;
    const auto tx = tx_.topRows(r), ty = ty_.topRows(r);
    const auto vk = vk_.topRows(r);
    const auto wg = wg_.head(r).asDiagonal();
    const auto ws = ws_.head(r).asDiagonal();
    if (fixed_)
    {
      const double l = *fixed_;
      const Mat t = tx / l + ty;
      conv_[0].noalias() += l * t.transpose() * (wg * vk);
      if (supg_)
      {
        const Mat wt = ws * t;
        const Mat lap = lxx_.topRows(r) / (l * l) + lyy_.topRows(r);
        const Mat g = gx_.topRows(r) / l + gy_.topRows(r);
        e1_[0].noalias() += l * vk.transpose() * wt;
        e2_[0].noalias() += l * lap.transpose() * wt;
        e3_[0].noalias() += l * t.transpose() * wt;
        e4_[0].noalias() += l * g.transpose() * wt;
        f3_[0].noalias() -= l * wt.transpose() * g;
      }
    }
    else
    {
      conv_[0].noalias() += tx.transpose() * (wg * vk);
      conv_[1].noalias() += ty.transpose() * (wg * vk);
      if (supg_)
      {
        const Mat wtx = ws * tx, wty = ws * ty;
        const auto lxx = lxx_.topRows(r), lyy = lyy_.topRows(r);
        const auto gx = gx_.topRows(r), gy = gy_.topRows(r);
        e1_[0].noalias() += vk.transpose() * wtx;
        e1_[1].noalias() += vk.transpose() * wty;
        e2_[0].noalias() += lxx.transpose() * wtx;
        e2_[1].noalias() += lxx.transpose() * wty;
        e2_[2].noalias() += lyy.transpose() * wtx;
        e2_[3].noalias() += lyy.transpose() * wty;
        e3_[0].noalias() += tx.transpose() * wtx;
        e3_[1].noalias() += tx.transpose() * wty;
        e3_[1].noalias() += ty.transpose() * wtx;
        e3_[2].noalias() += ty.transpose() * wty;
        e4_[0].noalias() += gx.transpose() * wtx;
        e4_[1].noalias() += gx.transpose() * wty;
        e4_[1].noalias() += gy.transpose() * wtx;
        e4_[2].noalias() += gy.transpose() * wty;
        f3_[0].noalias() -= wtx.transpose() * gx;
        f3_[1].noalias() -= wtx.transpose() * gy;
        f3_[1].noalias() -= wty.transpose() * gx;
        f3_[2].noalias() -= wty.transpose() * gy;
      }
    }
    reset();
  }

  void finish(ReducedModel &rm)
  {
    flush();
    if (fixed_)
    {
      rm.conv.add(Theta{1.0, 0, 0}, conv_[0]);
      if (supg_)
      {
        rm.e1.add(Theta{1.0, 0, 0}, e1_[0]);
        rm.e2.add(Theta{1.0, 1, 0}, e2_[0]);
        rm.e3.add(Theta{1.0, 0, 0}, e3_[0]);
        rm.e4.add(Theta{1.0, 0, 0}, e4_[0]);
        rm.f3.add(Theta{1.0, 0, 0}, f3_[0]);
      }
      return;
    }
    rm.conv.add(Theta{1.0, 0, 0}, conv_[0]);
    rm.conv.add(Theta{1.0, 0, 1}, conv_[1]);
    if (!supg_)
      return;
    rm.e1.add(Theta{1.0, 0, 0}, e1_[0]);
    rm.e1.add(Theta{1.0, 0, 1}, e1_[1]);
    rm.e2.add(Theta{1.0, 1, -2}, e2_[0]);
    rm.e2.add(Theta{1.0, 1, -1}, e2_[1]);
    rm.e2.add(Theta{1.0, 1, 0}, e2_[2]);
    rm.e2.add(Theta{1.0, 1, 1}, e2_[3]);
    for (int i = 0; i < 3; ++i)
    {
      rm.e3.add(Theta{1.0, 0, i - 1}, e3_[i]);
      rm.e4.add(Theta{1.0, 0, i - 1}, e4_[i]);
      rm.f3.add(Theta{1.0, 0, i - 1}, f3_[i]);
    }
  }

private:
  int nv_, np_;
  bool supg_;
  std::optional<double> fixed_;
  int batch_;
  int rows_ = 0;
  Mat tx_, ty_, vk_, lxx_, lyy_, gx_, gy_;
  Vec wg_, ws_;
  Mat conv_[2], e1_[2], e2_[4], e3_[3], e4_[3], f3_[3];
};

void build_tensors(const FullOrderModel &model, ReducedModel &rm, const ProjectSettings &settings)
{
  const FeSpace &vel = model.velocity_space();
  const FeSpace &pres = model.pressure_space();
  const bool supg = model.settings().scheme == Scheme::Supg;
  const double delta = model.settings().delta;
  const int nv = rm.velocity_dim(), np = rm.n_p;
  const int nn = nv * nv;
  const int batch = std::max(64, std::min(settings.batch_rows, static_cast<int>(2e7 / std::max(1, nn))));
  TensorBuilder tb(nv, np, supg, settings.fixed_length, batch);

  const int k = vel.degree();
  const int degree = std::max(4 * k - 2, 2 * k + pres.degree() - 2);
  Mat phi_loc[2];
  const Mat empty_g = Mat::Zero(1, np);
  const Mat empty_l = Mat::Zero(1, nv);
  for_each_triangle(vel, pres, rule_for_degree(degree),
                    [&](int, const ElementShape &sv, const std::vector<int> &dv, const ElementShape &sp,
                        const std::vector<int> &dp) {
                      const int n = sv.n;
                      for (int m = 0; m < 2; ++m)
                      {
                        phi_loc[m].resize(n, nv);
                        for (int i = 0; i < n; ++i)
                          phi_loc[m].row(i) = rm.phi.row(vel.component_dof(m, dv[i]));
                      }
                      Mat zp_loc(sp.n, np);
                      for (int i = 0; i < sp.n; ++i)
                        zp_loc.row(i) = rm.zp.row(dp[i]);
                      const Mat v0 = sv.vals * phi_loc[0], v1 = sv.vals * phi_loc[1];
                      const Mat dx[2] = {sv.dx * phi_loc[0], sv.dx * phi_loc[1]};
                      const Mat dy[2] = {sv.dy * phi_loc[0], sv.dy * phi_loc[1]};
                      const Mat lxx[2] = {-(sv.dxx.transpose() * phi_loc[0]), -(sv.dxx.transpose() * phi_loc[1])};
                      const Mat lyy[2] = {-(sv.dyy.transpose() * phi_loc[0]), -(sv.dyy.transpose() * phi_loc[1])};
                      const Mat px = sp.dx * zp_loc, py = sp.dy * zp_loc;
                      const double tau = supg ? delta * sv.h_K * sv.h_K : 0.0;
                      const Mat *vm[2] = {&v0, &v1};
                      for (int q = 0; q < static_cast<int>(sv.jxw.size()); ++q)
                        for (int m = 0; m < 2; ++m)
                        {
                          const Mat gx = m == 0 ? Mat(px.row(q)) : empty_g;
                          const Mat gy = m == 1 ? Mat(py.row(q)) : empty_g;
                          tb.add_row(v0.row(q), v1.row(q), dx[m].row(q), dy[m].row(q), vm[m]->row(q), sv.jxw[q],
                                     tau * sv.jxw[q], supg ? lxx[m] : empty_l, supg ? lyy[m] : empty_l, gx, gy);
                        }
                    });
  tb.finish(rm);
  rm.has_trilinear = true;
}

std::vector<int> pair_indices(const std::vector<int> &a, const std::vector<int> &b, int n)
{
  std::vector<int> out;
  out.reserve(a.size() * b.size());
  for (int j : b)
    for (int i : a)
      out.push_back(i + n * j);
  return out;
}

} // namespace

ReducedModel project_operators(const FullOrderModel &model, const ReducedBasis &basis, const ProjectSettings &settings)
{
  const FomSettings &fs = model.settings();
  const FeSpace &vel = model.velocity_space();
  const FeSpace &pres = model.pressure_space();
  if (basis.zu.rows() != vel.dof_count() || basis.zp.rows() != pres.dof_count() ||
      (basis.n_s() > 0 && basis.zs.rows() != vel.dof_count()))
    throw UsageError("project_operators: basis does not match the model");

  ReducedModel rm;
  rm.problem = fs.problem;
  rm.pair = fs.pair;
  rm.scheme = fs.scheme;
  rm.delta = fs.delta;
  rm.time = fs.time;
  rm.lid = fs.lid;
  rm.newton = fs.newton;
  rm.fixed_length = settings.fixed_length;
  rm.n_u = basis.n_u();
  rm.n_s = basis.n_s();
  rm.n_p = basis.n_p();
  rm.phi.resize(vel.dof_count(), rm.velocity_dim());
  rm.phi.col(0) = model.lifting().coefficients;
  rm.phi.middleCols(1, rm.n_u) = basis.zu;
  if (rm.n_s > 0)
    rm.phi.rightCols(rm.n_s) = basis.zs;
  rm.zp = basis.zp;

  rm.mass = project(affine_mass(vel), rm.phi, rm.phi);
  rm.diffusion = project(affine_diffusion(vel), rm.phi, rm.phi);
  rm.div = project(affine_divergence(vel, pres), rm.zp, rm.phi);
  const int nv = rm.velocity_dim();
  if (fs.scheme == Scheme::FrancaHughes || fs.scheme == Scheme::Supg)
  {
    const AffineFrancaHughes fh = affine_franca_hughes(vel, pres, fs.delta);
    rm.mtilde = project(fh.mtilde, rm.zp, rm.phi);
    rm.bsu = project(fh.bsu, rm.zp, rm.phi);
    rm.s = project(fh.s, rm.zp, rm.zp);
  }
  else
  {
    rm.mtilde.add(Theta{}, Mat::Zero(rm.n_p, nv));
    rm.bsu.add(Theta{}, Mat::Zero(rm.n_p, nv));
    if (fs.scheme == Scheme::PressureJump)
      rm.s.add(Theta{}, rm.zp.transpose() * (assemble_pressure_jump(pres, fs.delta) * rm.zp));
    else
      rm.s.add(Theta{}, Mat::Zero(rm.n_p, rm.n_p));
  }
  if (fs.problem == ProblemKind::NavierStokes && settings.include_trilinear)
    build_tensors(model, rm, settings);
  return rm;
}

BasisSelection select_leading(const ReducedModel &rm, int n_u, int n_s, int n_p)
{
  if (n_u < 0 || n_s < 0 || n_p < 0 || n_u > rm.n_u || n_s > rm.n_s || n_p > rm.n_p)
    throw UsageError("requested basis sizes exceed the stored ones");
  BasisSelection sel;
  sel.velocity.push_back(0);
  for (int i = 0; i < n_u; ++i)
    sel.velocity.push_back(1 + i);
  for (int i = 0; i < n_s; ++i)
    sel.velocity.push_back(1 + rm.n_u + i);
  for (int i = 0; i < n_p; ++i)
    sel.pressure.push_back(i);
  return sel;
}

ReducedModel restrict_model(const ReducedModel &rm, const BasisSelection &sel)
{
  const std::vector<int> &v = sel.velocity, &p = sel.pressure;
  if (v.empty() || v[0] != 0)
    throw UsageError("restrict_model: velocity selection must start with the lifting");
  ReducedModel out = rm;
  out.n_u = 0;
  out.n_s = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    (v[i] <= rm.n_u ? out.n_u : out.n_s) += 1;
  out.n_p = static_cast<int>(p.size());
  out.phi = rm.phi(Eigen::all, v);
  out.zp = rm.zp(Eigen::all, p);
  out.mass = rm.mass.select(v, v);
  out.diffusion = rm.diffusion.select(v, v);
  out.div = rm.div.select(p, v);
  out.mtilde = rm.mtilde.select(p, v);
  out.bsu = rm.bsu.select(p, v);
  out.s = rm.s.select(p, p);
  if (rm.has_trilinear)
  {
    const int n = rm.velocity_dim();
    const std::vector<int> vv = pair_indices(v, v, n);
    out.conv = rm.conv.select(vv, v);
    if (rm.e1.rows > 0)
    {
      out.e1 = rm.e1.select(v, vv);
      out.e2 = rm.e2.select(v, vv);
      out.e3 = rm.e3.select(vv, vv);
      out.e4 = rm.e4.select(p, vv);
      out.f3 = rm.f3.select(vv, p);
    }
  }
  return out;
}

namespace
{

void write_operator(const std::filesystem::path &dir, KeyValues &kv, const std::string &name,
                    const ReducedAffineMatrix &op)
{
  kv[name + ".count"] = std::to_string(op.terms.size());
  kv[name + ".shape"] = std::to_string(op.rows) + " " + std::to_string(op.cols);
  for (std::size_t q = 0; q < op.terms.size(); ++q)
  {
    kv[name + ".theta." + std::to_string(q)] = op.terms[q].theta.str();
    write_matrix(dir / (name + "_" + std::to_string(q) + ".rba"), op.terms[q].term);
  }
}

ReducedAffineMatrix read_operator(const std::filesystem::path &dir, const KeyValues &kv, const std::string &name)
{
  ReducedAffineMatrix op;
  auto it = kv.find(name + ".count");
  if (it == kv.end())
    return op;
  std::istringstream shape(kv.at(name + ".shape"));
  shape >> op.rows >> op.cols;
  const int count = std::stoi(it->second);
  for (int q = 0; q < count; ++q)
    op.add(Theta::parse(kv.at(name + ".theta." + std::to_string(q))),
           read_matrix(dir / (name + "_" + std::to_string(q) + ".rba")));
  return op;
}

std::string num(double x)
{
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

} // namespace

void write_archive(const std::filesystem::path &dir, const ReducedModel &rm)
{
  std::filesystem::create_directories(dir);
  KeyValues kv = rm.metadata;
  kv["format"] = "rbstab-archive 1";
  kv["problem"] = to_string(rm.problem);
  kv["pair"] = to_string(rm.pair);
  kv["scheme"] = to_string(rm.scheme);
  kv["delta"] = num(rm.delta);
  kv["dt"] = num(rm.time.dt);
  kv["steps"] = std::to_string(rm.time.steps);
  kv["lid"] = num(rm.lid[0]) + " " + num(rm.lid[1]);
  kv["newton"] = num(rm.newton.abs_tol) + " " + num(rm.newton.rel_tol) + " " + std::to_string(rm.newton.max_iterations);
  if (rm.fixed_length)
    kv["fixed_length"] = num(*rm.fixed_length);
  kv["n_u"] = std::to_string(rm.n_u);
  kv["n_s"] = std::to_string(rm.n_s);
  kv["n_p"] = std::to_string(rm.n_p);
  kv["trilinear"] = rm.has_trilinear ? "1" : "0";
  write_matrix(dir / "phi.rba", rm.phi);
  write_matrix(dir / "zp.rba", rm.zp);
  write_operator(dir, kv, "mass", rm.mass);
  write_operator(dir, kv, "diffusion", rm.diffusion);
  write_operator(dir, kv, "div", rm.div);
  write_operator(dir, kv, "mtilde", rm.mtilde);
  write_operator(dir, kv, "bsu", rm.bsu);
  write_operator(dir, kv, "s", rm.s);
  if (rm.has_trilinear)
  {
    write_operator(dir, kv, "conv", rm.conv);
    if (rm.e1.rows > 0)
    {
      write_operator(dir, kv, "e1", rm.e1);
      write_operator(dir, kv, "e2", rm.e2);
      write_operator(dir, kv, "e3", rm.e3);
      write_operator(dir, kv, "e4", rm.e4);
      write_operator(dir, kv, "f3", rm.f3);
    }
  }
  write_key_values(dir / "manifest.txt", kv);
}

ReducedModel read_archive(const std::filesystem::path &dir)
{
  const KeyValues kv = read_key_values(dir / "manifest.txt");
  auto get = [&](const std::string &key) {
    auto it = kv.find(key);
    if (it == kv.end())
      throw UsageError("archive manifest lacks " + key);
    return it->second;
  };
  if (get("format") != "rbstab-archive 1")
    throw UsageError("unsupported archive format");
  ReducedModel rm;
  rm.metadata = kv;
  rm.problem = problem_from_string(get("problem"));
  rm.pair = fe_pair_from_string(get("pair"));
  rm.scheme = scheme_from_string(get("scheme"));
  rm.delta = std::stod(get("delta"));
  rm.time.dt = std::stod(get("dt"));
  rm.time.steps = std::stoi(get("steps"));
  {
    std::istringstream is(get("lid"));
    is >> rm.lid[0] >> rm.lid[1];
  }
  {
    std::istringstream is(get("newton"));
    is >> rm.newton.abs_tol >> rm.newton.rel_tol >> rm.newton.max_iterations;
  }
  if (kv.count("fixed_length"))
    rm.fixed_length = std::stod(kv.at("fixed_length"));
  rm.n_u = std::stoi(get("n_u"));
  rm.n_s = std::stoi(get("n_s"));
  rm.n_p = std::stoi(get("n_p"));
  rm.phi = read_matrix(dir / "phi.rba");
  rm.zp = read_matrix(dir / "zp.rba");
  rm.mass = read_operator(dir, kv, "mass");
  rm.diffusion = read_operator(dir, kv, "diffusion");
  rm.div = read_operator(dir, kv, "div");
  rm.mtilde = read_operator(dir, kv, "mtilde");
  rm.bsu = read_operator(dir, kv, "bsu");
  rm.s = read_operator(dir, kv, "s");
  rm.has_trilinear = get("trilinear") == "1";
  if (rm.has_trilinear)
  {
    rm.conv = read_operator(dir, kv, "conv");
    rm.e1 = read_operator(dir, kv, "e1");
    rm.e2 = read_operator(dir, kv, "e2");
    rm.e3 = read_operator(dir, kv, "e3");
    rm.e4 = read_operator(dir, kv, "e4");
    rm.f3 = read_operator(dir, kv, "f3");
  }
  return rm;
}

} // namespace rbstab
