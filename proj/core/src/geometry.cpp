#include "protophon/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "protophon/errors.hpp"
#include "protophon/phonology.hpp"
#include "protophon/rng.hpp"

namespace protophon {

namespace {

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix. A is destroyed;
// returns eigenvalues with V's columns as eigenvectors.
std::vector<double> jacobi(std::vector<std::vector<double>>& A,
                           std::vector<std::vector<double>>& V) {
  const std::size_t n = A.size();
  V.assign(n, std::vector<double>(n, 0));
  for (std::size_t i = 0; i < n; ++i) V[i][i] = 1;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::fabs(A[p][q]));
    if (off < 1e-12) break;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(A[p][q]) < 1e-300) continue;
        double theta = (A[q][q] - A[p][p]) / (2 * A[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1));
        double c = 1 / std::sqrt(t * t + 1);
        double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          double aip = A[i][p], aiq = A[i][q];
          A[i][p] = c * aip - s * aiq;
          A[i][q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          double api = A[p][i], aqi = A[q][i];
          A[p][i] = c * api - s * aqi;
          A[q][i] = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          double vip = V[i][p], viq = V[i][q];
          V[i][p] = c * vip - s * viq;
          V[i][q] = s * vip + c * viq;
        }
      }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = A[i][i];
  return eig;
}

// Smallest ball with every support point on its boundary. Support sets stay
// affinely independent in practice; a singular system falls back to the
// first support point alone.
Ball ball_of(const std::vector<const std::vector<double>*>& support) {
  Ball b;
  if (support.empty()) {
    b.radius = -1;  // contains nothing
    return b;
  }
  const std::vector<double>& p0 = *support[0];
  if (support.size() == 1) {
    b.center = p0;
    b.radius = 0;
    return b;
  }
  const std::size_t m = support.size() - 1;
  std::vector<std::vector<double>> u(m);
  for (std::size_t i = 0; i < m; ++i) {
    u[i].resize(p0.size());
    for (std::size_t j = 0; j < p0.size(); ++j) u[i][j] = (*support[i + 1])[j] - p0[j];
  }
  // Gram system: center = p0 + sum alpha_i u_i with u_i . (center - p0)
  // equal to |u_i|^2 / 2 for every support direction.
  std::vector<std::vector<double>> G(m, std::vector<double>(m + 1, 0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) G[i][j] = dot(u[i], u[j]);
    G[i][m] = 0.5 * dot(u[i], u[i]);
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::fabs(G[r][col]) > std::fabs(G[piv][col])) piv = r;
    if (std::fabs(G[piv][col]) < 1e-12) {
      b.center = p0;
      b.radius = 0;
      return b;
    }
    std::swap(G[col], G[piv]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      double f = G[r][col] / G[col][col];
      for (std::size_t c = col; c <= m; ++c) G[r][c] -= f * G[col][c];
    }
  }
  b.center = p0;
  for (std::size_t i = 0; i < m; ++i) {
    double alpha = G[i][m] / G[i][i];
    for (std::size_t j = 0; j < b.center.size(); ++j) b.center[j] += alpha * u[i][j];
  }
  b.radius = dist(b.center, p0);
  return b;
}

bool contains(const Ball& b, const std::vector<double>& p) {
  if (b.radius < 0) return false;
  return dist(b.center, p) <= b.radius + 1e-10 * (1 + b.radius);
}

Ball welzl(std::vector<const std::vector<double>*>& pts, std::size_t end,
           std::vector<const std::vector<double>*>& support, std::size_t dim) {
  if (end == 0 || support.size() == dim + 1) return ball_of(support);
  const std::vector<double>* p = pts[end - 1];
  Ball b = welzl(pts, end - 1, support, dim);
  if (contains(b, *p)) return b;
  support.push_back(p);
  Ball b2 = welzl(pts, end - 1, support, dim);
  support.pop_back();
  return b2;
}

}  // namespace

void DisagreementMatrix::validate() const {
  const std::size_t n = names.size();
  if (d.size() != n) throw Error("disagreement matrix is not square");
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i].size() != n) throw Error("disagreement matrix is not square");
    if (d[i][i] != 0)
      throw Error("disagreement diagonal must be zero at " + names[i]);
    for (std::size_t j = 0; j < n; ++j) {
      if (!(d[i][j] >= 0 && d[i][j] <= 1))
        throw Error("disagreement entries must lie in [0, 1]");
      if (std::fabs(d[i][j] - d[j][i]) > 1e-12)
        throw Error("disagreement matrix must be symmetric");
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (d[i][k] > d[i][j] + d[j][k] + 1e-9)
          throw Error("disagreement fractions violate the triangle inequality at (" +
                      names[i] + ", " + names[j] + ", " + names[k] + ")");
}

DisagreementMatrix disagreement(const std::vector<ReadingTable>& varieties,
                                const std::vector<std::string>& names) {
  const std::size_t n = varieties.size();
  if (n < 2) throw Error("disagreement needs at least two varieties");
  if (!names.empty() && names.size() != n)
    throw Error("one name per variety expected");

  // Characters every variety covers.
  std::vector<std::string> shared;
  for (const auto& [id, sym] : varieties[0]) {
    (void)sym;
    bool everywhere = true;
    for (std::size_t v = 1; v < n && everywhere; ++v)
      everywhere = varieties[v].count(id) > 0;
    if (everywhere) shared.push_back(id);
  }
  if (shared.empty()) throw EmptyIntersection("varieties share no characters");

  // Compare feature vectors, not spellings: distinct symbols for one sound
  // must not count as disagreement.
  std::vector<std::vector<FeatureVector>> readings(n);
  for (std::size_t v = 0; v < n; ++v)
    for (const std::string& id : shared)
      readings[v].push_back(parse_phoneme(varieties[v].at(id)));

  DisagreementMatrix D;
  for (std::size_t v = 0; v < n; ++v)
    D.names.push_back(names.empty() ? "variety_" + std::to_string(v) : names[v]);
  D.d.assign(n, std::vector<double>(n, 0));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      long diff = 0;
      for (std::size_t i = 0; i < shared.size(); ++i)
        diff += readings[a][i] == readings[b][i] ? 0 : 1;
      double frac = static_cast<double>(diff) / static_cast<double>(shared.size());
      D.d[a][b] = D.d[b][a] = frac;
    }
  D.validate();
  return D;
}

Embedding mds_embed(const DisagreementMatrix& D) {
  D.validate();
  const std::size_t n = D.size();
  Embedding e;
  if (n == 0) return e;

  // B = -1/2 J D^2 J via row/column/grand means of the squared distances.
  std::vector<std::vector<double>> sq(n, std::vector<double>(n));
  std::vector<double> row_mean(n, 0);
  double grand = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      sq[i][j] = D.d[i][j] * D.d[i][j];
      row_mean[i] += sq[i][j];
    }
  for (std::size_t i = 0; i < n; ++i) {
    row_mean[i] /= static_cast<double>(n);
    grand += row_mean[i];
  }
  grand /= static_cast<double>(n);
  std::vector<std::vector<double>> B(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      B[i][j] = -0.5 * (sq[i][j] - row_mean[i] - row_mean[j] + grand);

  std::vector<std::vector<double>> V;
  std::vector<double> eig = jacobi(B, V);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return eig[a] > eig[b]; });

  double neg2 = 0;
  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    if (eig[idx] > 1e-12)
      kept.push_back(idx);
    else if (eig[idx] < 0)
      neg2 += eig[idx] * eig[idx];
  }
  e.distortion = std::sqrt(neg2);

  e.points.assign(n, std::vector<double>(kept.size(), 0));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    double scale = std::sqrt(eig[kept[c]]);
    // Canonical sign: the first entry of visible magnitude is positive.
    double lead = 0;
    for (std::size_t i = 0; i < n && lead == 0; ++i)
      if (std::fabs(V[i][kept[c]]) > 1e-9) lead = V[i][kept[c]];
    double sign = lead < 0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i)
      e.points[i][c] = sign * scale * V[i][kept[c]];
  }
  return e;
}

Ball min_enclosing_ball(const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw Error("minimal enclosing ball of an empty set");
  const std::size_t dim = points[0].size();
  for (const auto& p : points)
    if (p.size() != dim) throw Error("points must share one dimension");
  if (dim == 0) return {{}, 0};

  std::vector<const std::vector<double>*> pts(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) pts[i] = &points[i];
  // Deterministic shuffle keeps the recursion shallow on adversarial orders.
  Rng rng(0x6eb);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    std::swap(pts[i], pts[i + rng.uniform_index(pts.size() - i)]);

  std::vector<const std::vector<double>*> support;
  Ball b = welzl(pts, pts.size(), support, dim);
  if (b.radius < 0) b = {points[0], 0};
  // The reported radius is the exact covering radius of the center.
  double r = 0;
  for (const auto& p : points) r = std::max(r, dist(b.center, p));
  b.radius = r;
  return b;
}

double pdia_lower_bound(const std::vector<ReadingTable>& varieties) {
  Embedding e = mds_embed(disagreement(varieties));
  if (e.points.empty() || e.points[0].empty()) return 0;  // all varieties agree
  return min_enclosing_ball(e.points).radius;
}

std::string matrix_to_tsv(const DisagreementMatrix& D) {
  std::string out;
  for (const std::string& name : D.names) out += "\t" + name;
  out += "\n";
  for (std::size_t i = 0; i < D.size(); ++i) {
    out += D.names[i];
    for (std::size_t j = 0; j < D.size(); ++j) out += "\t" + fmt(D.d[i][j]);
    out += "\n";
  }
  return out;
}

DisagreementMatrix matrix_from_tsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("empty disagreement matrix", "matrix", 1);
  DisagreementMatrix D;
  {
    std::istringstream header(line);
    std::string cell;
    bool first = true;
    while (std::getline(header, cell, '\t')) {
      if (first) {
        if (!cell.empty())
          throw ParseError("header must start with an empty cell", "matrix", 1);
        first = false;
        continue;
      }
      D.names.push_back(cell);
    }
    if (first) throw ParseError("header row is missing", "matrix", 1);
  }
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    if (!std::getline(row, cell, '\t'))
      throw ParseError("missing row label", "matrix", lineno);
    std::size_t i = D.d.size();
    if (i >= D.names.size() || cell != D.names[i])
      throw ParseError("row label \"" + cell + "\" does not match the header",
                       "matrix", lineno);
    std::vector<double> values;
    while (std::getline(row, cell, '\t')) {
      double v = 0;
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
        throw ParseError("bad number \"" + cell + "\"", "matrix", lineno);
      values.push_back(v);
    }
    if (values.size() != D.names.size())
      throw ParseError("expected " + std::to_string(D.names.size()) +
                           " values in the row",
                       "matrix", lineno);
    D.d.push_back(std::move(values));
  }
  D.validate();
  return D;
}

}  // namespace protophon
