#pragma once

#include "g2flow/frame.hpp"
#include "g2flow/metric.hpp"

namespace g2flow {

/// Thrown when a 3-form is not positive, or a closed-structure computation is inconsistent.
class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A positive 3-form on a 7-frame together with its induced metric data.
struct G2Structure {
  Form phi;
  Matrix B;  // pre-normalization bilinear form
  Metric g;
  Form vol;
  Form psi;  // *φ
};

G2Structure metric_from_phi(const Form& phi);

struct G2Split2 {
  Form alpha7;
  Form alpha14;
};
/// Eigensplit of α ↦ *(α∧φ): eigenvalue 2 on Λ²₇ and −1 on Λ²₁₄.
G2Split2 decompose2_g2(const Form& alpha, const G2Structure& G);

struct G2Split3 {
  Form gamma1;
  Form gamma7;
  Form gamma27;
  Vector u;  // gamma7 = u ⌟ *φ
};
G2Split3 decompose3_g2(const Form& gamma, const G2Structure& G);

struct TorsionSolve {
  Form tau;
  /// sup-norm of τ∧φ − d*φ
  double residual = 0.0;
  /// sup-norm of the Λ²₇ component of τ (zero for closed φ)
  double lambda7_part = 0.0;
};
/// Solves τ∧φ = d*φ for τ ∈ Λ²; throws StructureError if τ leaves Λ²₁₄ beyond `tol` (relative to ‖τ‖).
TorsionSolve torsion_tau(const G2Structure& G, const FrameStructure& fs, double tol = 1e-9);
/// Laplacian of a closed G2-structure, Δφ = dτ.
Form laplacian_closed(const G2Structure& G, const FrameStructure& fs);
/// Δφ by the direct route d(−*d*φ), used as an independent check.
Form laplacian_direct(const G2Structure& G, const FrameStructure& fs);

/// j(γ)(U,V) = *((U⌟φ)∧(V⌟φ)∧γ) as a symmetric matrix in the frame.
Matrix j_map(const Form& gamma, const G2Structure& G);

/// The standard 3-form e123 + e145 + e167 + e246 − e257 − e347 − e356.
Form standard_phi();

}  // namespace g2flow
