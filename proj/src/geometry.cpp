#include "udsmc/geometry.hpp"

#include <numbers>

#include "udsmc/errors.hpp"

namespace udsmc {

namespace {
constexpr double deg2rad = std::numbers::pi / 180.0;
constexpr double rad2deg = 180.0 / std::numbers::pi;
constexpr double frame_eps = 1e-10;
}  // namespace

double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w <= -180.0) w += 360.0;
  if (w > 180.0) w -= 360.0;
  return w;
}

Vec3 place_atom(const Vec3& a, const Vec3& b, const Vec3& c, double bond,
                double angle_deg, double dihedral_deg) {
  Vec3 b1 = b - a;
  Vec3 b2 = c - b;
  double l2 = b2.norm();
  if (l2 < frame_eps)
    fail(errc::degenerate_frame, "place_atom: frame atoms b and c coincide");
  Vec3 e1 = b2 * (1.0 / l2);
  Vec3 nv = b1.cross(e1);
  double ln = nv.norm();
  if (ln < frame_eps)
    fail(errc::degenerate_frame, "place_atom: frame atoms are collinear");
  Vec3 n_u = nv * (1.0 / ln);
  Vec3 m_u = n_u.cross(e1);

  double theta = angle_deg * deg2rad;
  double tau = dihedral_deg * deg2rad;
  // Bond direction in the (e1, m_u, n_u) frame; the -sin(tau) component is
  // what makes measure_dihedral return +dihedral_deg for the placed atom.
  Vec3 d = e1 * (-bond * std::cos(theta)) +
           m_u * (bond * std::sin(theta) * std::cos(tau)) +
           n_u * (-bond * std::sin(theta) * std::sin(tau));
  return c + d;
}

double measure_dihedral(const Vec3& a, const Vec3& b, const Vec3& c,
                        const Vec3& d) {
  Vec3 b1 = b - a;
  Vec3 b2 = c - b;
  Vec3 b3 = d - c;
  double l2 = b2.norm();
  if (b1.norm() < frame_eps || l2 < frame_eps || b3.norm() < frame_eps)
    fail(errc::degenerate_frame, "dihedral: coincident atoms");
  Vec3 n1 = b1.cross(b2);
  Vec3 n2 = b2.cross(b3);
  if (n1.norm() < frame_eps || n2.norm() < frame_eps)
    fail(errc::degenerate_frame, "dihedral: collinear atoms");
  Vec3 m1 = n1.cross(b2 * (1.0 / l2));
  double x = n1.dot(n2);
  double y = m1.dot(n2);
  double ang = std::atan2(y, x) * rad2deg;
  return ang <= -180.0 ? ang + 360.0 : ang;
}

double measure_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 u = a - b;
  Vec3 v = c - b;
  double lu = u.norm(), lv = v.norm();
  if (lu < frame_eps || lv < frame_eps)
    fail(errc::degenerate_frame, "angle: coincident atoms");
  double cosang = u.dot(v) / (lu * lv);
  cosang = std::max(-1.0, std::min(1.0, cosang));
  return std::acos(cosang) * rad2deg;
}

StepAtoms place_step(const Vec3& c_prev, const Vec3& n, const Vec3& ca,
                     const DihedralTriple& x, const BackboneGeometry& g) {
  StepAtoms out;
  out.c = place_atom(c_prev, n, ca, g.ca_c, g.ang_n_ca_c, x.phi);
  out.n_next = place_atom(n, ca, out.c, g.c_n, g.ang_ca_c_n, x.psi);
  out.o = place_atom(n, ca, out.c, g.c_o, g.ang_ca_c_o,
                     wrap_degrees(x.psi + 180.0));
  out.ca_next = place_atom(ca, out.c, out.n_next, g.n_ca, g.ang_c_n_ca,
                           x.omega);
  return out;
}

double trans_ca_ca_distance(const BackboneGeometry& g) {
  // Planar zig-zag: walk CA -> C -> N -> CA with exterior turns of
  // alternating sign at the two bond angles.
  double a1 = (180.0 - g.ang_ca_c_n) * deg2rad;
  double a2 = a1 - (180.0 - g.ang_c_n_ca) * deg2rad;
  double px = g.ca_c + g.c_n * std::cos(a1) + g.n_ca * std::cos(a2);
  double py = g.c_n * std::sin(a1) + g.n_ca * std::sin(a2);
  return std::sqrt(px * px + py * py);
}

}  // namespace udsmc
