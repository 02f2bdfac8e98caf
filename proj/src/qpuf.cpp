#include "qpufsim/qpuf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "qpufsim/errors.hpp"

namespace qpufsim {

namespace {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double dist_origin_to_segment(const Point& a, const Point& b) {
  const double abx = b.x - a.x, aby = b.y - a.y;
  const double len_sq = abx * abx + aby * aby;
  if (len_sq == 0.0) return std::hypot(a.x, a.y);
  double t = -(a.x * abx + a.y * aby) / len_sq;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(a.x + t * abx, a.y + t * aby);
}

// Andrew monotone chain; returns hull vertices counter-clockwise.
std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;
  std::vector<Point> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Euclidean distance from the origin to the convex hull of the points;
// 0 when the origin lies inside or on the hull.
double hull_distance_to_origin(const std::vector<Point>& pts) {
  const std::vector<Point> hull = convex_hull(pts);
  if (hull.empty()) throw NumericError("hull_distance_to_origin: no points");
  if (hull.size() == 1) return std::hypot(hull[0].x, hull[0].y);
  if (hull.size() == 2) return dist_origin_to_segment(hull[0], hull[1]);

  const Point origin{0.0, 0.0};
  bool inside = true;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point& a = hull[i];
    const Point& b = hull[(i + 1) % hull.size()];
    if (cross(a, b, origin) < 0.0) {
      inside = false;
      break;
    }
  }
  if (inside) return 0.0;

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i)
    best = std::min(best, dist_origin_to_segment(hull[i], hull[(i + 1) % hull.size()]));
  return best;
}

std::string fresh_device_id(Rng& rng) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "dev-%016llx",
                static_cast<unsigned long long>(rng.next_u64()));
  return buf;
}

}  // namespace

void QpufParams::validate() const {
  if (dim < 2) throw ConfigError("QpufParams: dim must be >= 2");
  if (epsilon_noise < 0.0 || epsilon_noise > 1.0)
    throw ConfigError("QpufParams: epsilon_noise must be in [0,1]");
  if (delta_r < 0.0 || delta_r > 1.0) throw ConfigError("QpufParams: delta_r must be in [0,1]");
  if (delta_c < 0.0 || delta_c > 1.0) throw ConfigError("QpufParams: delta_c must be in [0,1]");
  if (delta_u < 0.0 || delta_u > 2.0) throw ConfigError("QpufParams: delta_u must be in [0,2]");
  if (lambda_sec < 8) throw ConfigError("QpufParams: lambda_sec must be >= 8 bits");
  if (fixed_unitary && fixed_unitary->dim() != dim)
    throw ConfigError("QpufParams: fixed_unitary dimension does not match dim");
}

QpufDevice::QpufDevice(std::string id, UnitaryOp unitary, double epsilon_noise,
                       PureState contractive_target)
    : id_(std::move(id)),
      unitary_(std::move(unitary)),
      epsilon_noise_(epsilon_noise),
      target_(std::move(contractive_target)) {
  if (target_.dim() != unitary_.dim())
    throw DimensionMismatch("QpufDevice: contractive target dimension mismatch");
  if (epsilon_noise_ < 0.0 || epsilon_noise_ > 1.0)
    throw ConfigError("QpufDevice: epsilon_noise must be in [0,1]");
}

void QpufDevice::consume_query() {
  if (query_budget_ && query_count_ >= *query_budget_)
    throw QueryBudgetExceeded("QpufDevice " + id_ + ": query budget of " +
                              std::to_string(*query_budget_) + " exhausted");
  ++query_count_;
}

QpufDevice qgen(const QpufParams& params, Rng& rng) {
  params.validate();
  UnitaryOp u = UnitaryOp::identity(params.dim);
  switch (params.family) {
    case DeviceFamily::Haar:
      u = haar_unitary(params.dim, rng);
      break;
    case DeviceFamily::Pru: {
      if ((params.dim & (params.dim - 1)) != 0)
        throw ConfigError("qgen: PRU family needs a power-of-two dim");
      int n = 0;
      while ((1 << n) < params.dim) ++n;
      const int depth = params.pru_depth > 0 ? params.pru_depth : default_pru_depth(n);
      u = pru_unitary(random_pru_key(n, depth, rng));
      break;
    }
    case DeviceFamily::Fixed:
      u = params.fixed_unitary ? *params.fixed_unitary : UnitaryOp::identity(params.dim);
      break;
    default:
      throw ConfigError("qgen: unsupported device family");
  }
  return QpufDevice(fresh_device_id(rng), std::move(u), params.epsilon_noise,
                    PureState::basis(params.dim, 0));
}

DensityMatrix qeval(QpufDevice& device, const DensityMatrix& rho) {
  if (rho.dim() != device.dim()) throw DimensionMismatch("qeval: state dimension mismatch");
  device.consume_query();
  const Matrix& u = device.unitary().entries();
  const double eps = device.epsilon_noise();
  Matrix out = (1.0 - eps) * (u * rho.entries() * u.adjoint());
  if (eps > 0.0) {
    const Vector& t = device.contractive_target().amplitudes();
    out += eps * (t * t.adjoint());
  }
  return DensityMatrix(std::move(out));
}

PureState qeval_pure(QpufDevice& device, const PureState& psi) {
  if (device.epsilon_noise() != 0.0)
    throw ConfigError("qeval_pure: pure path requires a noiseless (epsilon = 0) device");
  if (psi.dim() != device.dim()) throw DimensionMismatch("qeval_pure: state dimension mismatch");
  device.consume_query();
  return apply_unitary(device.unitary(), psi);
}

double diamond_distance_unitaries(const UnitaryOp& u, const UnitaryOp& v) {
  if (u.dim() != v.dim())
    throw DimensionMismatch("diamond_distance_unitaries: dimension mismatch");
  const UnitaryOp w(Matrix(u.entries().adjoint() * v.entries()));
  const Vector evs = unitary_eigenvalues(w);
  std::vector<Point> pts(static_cast<std::size_t>(evs.size()));
  for (Eigen::Index i = 0; i < evs.size(); ++i)
    pts[static_cast<std::size_t>(i)] = Point{evs(i).real(), evs(i).imag()};
  const double delta = hull_distance_to_origin(pts);
  const double clamped = std::min(delta, 1.0);
  return 2.0 * std::sqrt(std::max(0.0, 1.0 - clamped * clamped));
}

UniquenessReport uniqueness_test(const QpufParams& params, int n_devices, Rng& rng) {
  if (n_devices < 2) throw ConfigError("uniqueness_test: need at least 2 devices");
  std::vector<QpufDevice> devices;
  devices.reserve(static_cast<std::size_t>(n_devices));
  for (int i = 0; i < n_devices; ++i) devices.push_back(qgen(params, rng));

  UniquenessReport report;
  report.n_devices = n_devices;
  report.delta_u = params.delta_u;
  double sum = 0.0;
  double min_d = std::numeric_limits<double>::infinity();
  int above = 0;
  for (int i = 0; i < n_devices; ++i) {
    for (int j = i + 1; j < n_devices; ++j) {
      const double d = diamond_distance_unitaries(devices[static_cast<std::size_t>(i)].unitary(),
                                                  devices[static_cast<std::size_t>(j)].unitary());
      report.pairwise_distances.push_back(d);
      sum += d;
      min_d = std::min(min_d, d);
      if (d >= params.delta_u) ++above;
    }
  }
  const double n_pairs = static_cast<double>(report.pairwise_distances.size());
  report.fraction_ge_delta_u = above / n_pairs;
  report.min_distance = min_d;
  report.mean_distance = sum / n_pairs;
  return report;
}

CrpDatabase build_crp_database(QpufDevice& device, const std::vector<PureState>& challenges,
                               int copies_m) {
  if (copies_m < 1) throw ConfigError("build_crp_database: copies_m must be >= 1");
  CrpDatabase db;
  db.records.reserve(challenges.size());
  for (const PureState& c : challenges) {
    PureState response = qeval_pure(device, c);
    // one query per stored copy; the first one produced the response above
    for (int k = 1; k < copies_m; ++k) device.consume_query();
    db.records.push_back(CrpRecord{c, std::move(response), copies_m});
  }
  return db;
}

}  // namespace qpufsim
