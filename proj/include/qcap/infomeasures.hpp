#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qcap/channels.hpp"
#include "qcap/qmat.hpp"

// One-shot information quantities: coherent information of a channel with a
// purified input, mutual information across a cut, Holevo chi of a
// classical-quantum ensemble, private information, and a best-effort
// lower-bound search over inputs. All values are in bits.

namespace qcap {

/// Probability list paired with density matrices on a common register layout.
struct CQEnsemble {
  CQEnsemble(std::vector<double> probs, std::vector<DensityMatrix> states,
             Tolerance tol = {});

  std::vector<double> probs;
  std::vector<DensityMatrix> states;
};

/// A value in bits together with labeled sub-values (per-branch contributions,
/// both Holevo terms, and the like). Which keys appear is documented at each
/// operation.
struct InfoValue {
  double value = 0.0;
  std::map<std::string, double> components;
};

/// Q(ch, phi) = H(B) - H(AB) where the trailing registers of phi (product of
/// dims equal to dim_in) feed the channel and the rest are the reference. For
/// flagged channels the value is assembled blockwise as the probability-
/// weighted sum of branch values; components then hold "branch_<i>" and
/// "weight_<i>" entries.
InfoValue coherent_information(const KrausChannel& ch, const PureState& phi,
                               Tolerance tol = {});

/// Same quantity evaluated on the dense output state, with no blockwise
/// shortcut. Kept as the cross-validation route for flagged channels.
double coherent_information_dense(const KrausChannel& ch, const PureState& phi,
                                  Tolerance tol = {});

/// I(A;B) = H(A) + H(B) - H(AB) where A is the cut and B the rest. The cut
/// must be a proper nonempty subset of the registers.
double mutual_information(const DensityMatrix& rho, const std::vector<int>& cut,
                          Tolerance tol = {});

/// Pushes every ensemble state through the channel; probabilities unchanged.
CQEnsemble cq_push(const KrausChannel& ch, const CQEnsemble& e);

/// chi = H(sum p rho) - sum p H(rho). Equals I(X;B) of the assembled cq state.
double holevo_chi(const CQEnsemble& e, Tolerance tol = {});

/// The assembled state sum_x p_x |x><x| (x) rho_x on (X, system registers).
DensityMatrix cq_state(const CQEnsemble& e);

/// I(X;B) - I(X;E) for the ensemble pushed through the channel and its
/// complementary channel. components: "holevo_output", "holevo_environment".
InfoValue private_information_value(const KrausChannel& ch, const CQEnsemble& e,
                                    Tolerance tol = {});

/// Pushes a classical-quantum ensemble through per-use helper isometries:
/// each state (on A_1..A_n) is combined with eta (on E_1..E_n), the F
/// registers are traced and flags appended, exactly as helper_apply does for
/// the assembled cq state.
CQEnsemble helper_push(const std::vector<HelperIsometry>& isos, const CQEnsemble& e,
                       const DensityMatrix& eta, Tolerance tol = {});

enum class Objective { kCoherent, kHolevo, kPrivate };

/// Best-effort lower bound on the one-shot quantity: evaluates canonical
/// candidates (maximally entangled and product inputs, or the computational
/// and degenerate ensembles) plus seeded random restarts, and returns the
/// maximum. No optimality claim; the result never exceeds the true one-shot
/// value. components: "candidates", "best_candidate".
InfoValue lower_bound_search(Objective objective, const KrausChannel& ch, int restarts,
                             std::uint64_t seed, Tolerance tol = {});

}  // namespace qcap
