#pragma once

#include <cmath>

namespace udsmc {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Wraps an angle in degrees into (-180, 180].
double wrap_degrees(double deg);

// Backbone internal-coordinate constants: bond lengths in angstrom, bond
// angles in degrees. Defaults are the standard trans-peptide values.
struct BackboneGeometry {
  double n_ca = 1.458;
  double ca_c = 1.525;
  double c_n = 1.329;
  double c_o = 1.231;
  double ang_n_ca_c = 111.0;  // N-CA-C
  double ang_ca_c_n = 116.6;  // CA-C-N(next)
  double ang_c_n_ca = 121.7;  // C-N-CA(next)
  double ang_ca_c_o = 120.8;  // CA-C-O
};

// Places atom D from frame atoms (a, b, c) with |c-D| = bond, angle(b,c,D) =
// angle_deg and dihedral(a,b,c,D) = dihedral_deg. degenerate_frame when the
// frame is collinear or has coincident atoms. Consistent with
// measure_dihedral: measuring the placed atom returns dihedral_deg.
Vec3 place_atom(const Vec3& a, const Vec3& b, const Vec3& c, double bond,
                double angle_deg, double dihedral_deg);

// Signed dihedral in (-180, 180] by the atan2 form; degenerate_frame when
// any of the three bond vectors vanish or consecutive ones are collinear.
double measure_dihedral(const Vec3& a, const Vec3& b, const Vec3& c,
                        const Vec3& d);

// Angle at b, degrees in [0, 180].
double measure_angle(const Vec3& a, const Vec3& b, const Vec3& c);

struct DihedralTriple {
  double phi = 0.0, psi = 0.0, omega = 180.0;  // degrees
};

// The four atoms one sampling step adds to the chain.
struct StepAtoms {
  Vec3 c, o, n_next, ca_next;
};

// Extends the backbone by one step from frame atoms (C_prev, N, CA):
// C via phi, then N_next via psi, O opposite N_next in the peptide plane,
// CA_next via omega.
StepAtoms place_step(const Vec3& c_prev, const Vec3& n, const Vec3& ca,
                     const DihedralTriple& x, const BackboneGeometry& g);

// Virtual CA->CA distance across a planar trans (omega = 180) peptide unit,
// closed form from the geometry constants (no 3-D placement involved).
double trans_ca_ca_distance(const BackboneGeometry& g);

}  // namespace udsmc
