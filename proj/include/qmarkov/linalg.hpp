#pragma once

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "qmarkov/types.hpp"

namespace qmarkov {

struct Spectrum {
  RVec E;  // ascending; near-degenerate clusters snapped to their mean
  Mat U;   // eigenvectors as columns
  std::vector<double> bohr;  // deduplicated, ascending, contains 0
  Eigen::MatrixXi bohr_index;  // (i,j) -> index in bohr of E_i - E_j
  double dedup_tol = 0.0;

  int dim() const { return static_cast<int>(E.size()); }
  double nu(int i, int j) const { return E(i) - E(j); }
  // operator into / out of the eigenbasis
  Mat to_frame(const Mat& X) const { return U.adjoint() * X * U; }
  Mat from_frame(const Mat& Xf) const { return U * Xf * U.adjoint(); }
};

Spectrum hermitian_eig(const Mat& M);

struct GibbsState {
  double beta = 0.0;
  Mat rho;
  Mat rho_q, rho_mq, rho_h, rho_mh;  // rho^{1/4}, rho^{-1/4}, rho^{1/2}, rho^{-1/2}
  RVec p;                            // populations in the eigenbasis of H
  Mat U;
  double logZ = 0.0;
  bool floored = false;  // some population hit the 1e-300 floor

  int dim() const { return static_cast<int>(p.size()); }
};

GibbsState gibbs(const Spectrum& spec, double beta);

// qubit helpers, site 0 most significant
// register bits of every basis state of `sites`, first site most significant
std::vector<long> site_offsets(const std::vector<int>& sites, int n);
Mat partial_trace(const Mat& rho, const Region& A, int n);
Mat embed(const Mat& op, const std::vector<int>& support, int n);
// Tr_A[rho] (x) I_A / 2^|A|, sites kept in place
Mat replace_with_maximally_mixed(const Mat& rho, const Region& A, int n);
Mat kron(const Mat& a, const Mat& b);

cplx kms_inner(const GibbsState& g, const Mat& X, const Mat& Y);
double kms_norm(const GibbsState& g, const Mat& X);

double op_norm(const Mat& M);
double trace_norm(const Mat& M);
double trace_distance(const Mat& a, const Mat& b);
double fro_norm(const Mat& M);
double max_abs(const Mat& M);
double hermiticity_defect(const Mat& M);

// column-stacking: vec(X)[i + dim*j] = X(i,j)
Vec vec(const Mat& X);
Mat unvec(const Vec& v, int dim);

Mat random_complex(std::mt19937_64& rng, int rows, int cols);
Mat random_hermitian(std::mt19937_64& rng, int dim);
Mat random_density(std::mt19937_64& rng, int dim);
// random operator with operator norm exactly 1
Mat random_contraction(std::mt19937_64& rng, int dim);
Mat random_unitary(std::mt19937_64& rng, int dim);

enum class Backend { spectral, ode };
Backend parse_backend(const std::string& s);

// Linear map on dim x dim operators. Dense matrix and action work in a frame:
// the global X is mapped to U^dag X U first.
struct SuperOp {
  int dim = 0;
  Mat frame;                   // U (identity if empty)
  std::optional<Mat> matrix;   // dim^2 x dim^2 on vec(U^dag X U)
  std::function<Mat(const Mat&)> action;    // frame -> frame
  std::function<Mat(const Mat&)> adjoint;   // Hilbert-Schmidt adjoint, frame -> frame
  std::optional<RVec> sym;     // w with diag(w) M diag(w)^{-1} Hermitian

  long dim2() const { return static_cast<long>(dim) * dim; }
  Mat to_frame(const Mat& X) const;
  Mat from_frame(const Mat& Xf) const;
  Mat apply(const Mat& X) const;
  Mat apply_adjoint(const Mat& X) const;
  Mat apply_frame(const Mat& Xf) const;
  Mat apply_adjoint_frame(const Mat& Xf) const;

  static SuperOp zero(int dim);
  static SuperOp identity(int dim);
};

// Eigendecomposition of the Hermitian similarity transform G = W M W^{-1},
// split into connected blocks of G.
class SpectralForm {
 public:
  SpectralForm() = default;
  explicit SpectralForm(const SuperOp& L, double block_tol = 1e-13);

  int dim() const { return dim_; }
  const RVec& eigenvalues() const { return evals_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  double asymmetry() const { return asym_; }

  // f(M) applied to X (schrodinger) or f(M)^dag = f*(M^dag) for heisenberg.
  // f must be real on the real line.
  Mat apply(const std::function<double(double)>& f, const Mat& X, bool heisenberg = false) const;
  Mat apply_frame(const std::function<double(double)>& f, const Mat& Xf, bool heisenberg = false) const;
  // -<Y, M^dag Y>_w for heisenberg Y: value of -y^dag G y with y = W^{-1}... see dirichlet
  Vec to_sym(const Mat& Xf, bool heisenberg) const;
  Mat from_sym(const Vec& y, bool heisenberg) const;
  // coefficients of a sym-frame vector in the eigenbasis, ordered as eigenvalues()
  Vec modes(const Vec& y) const;
  Vec unmodes(const Vec& c) const;
  const Mat& frame() const { return frame_; }

 private:
  struct Block {
    std::vector<long> idx;
    Mat V;
    RVec lambda;
    long offset = 0;  // into evals_
  };
  int dim_ = 0;
  Mat frame_;
  RVec w_;
  std::vector<Block> blocks_;
  RVec evals_;
  double asym_ = 0.0;
};

// e^{tL}[X0]
Mat propagate(const SuperOp& L, const Mat& X0, double t, Backend backend);

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  long max_steps = 2000000;
};
// adaptive Dormand-Prince 5(4) (boost odeint) on the frame action
Mat ode_propagate(const std::function<Mat(const Mat&)>& f, const Mat& X0, double t,
                  const OdeOptions& opt = {});

// phi(z) = (e^z - 1)/z, phi(0) = 1
double phi1(double z);

}  // namespace qmarkov
