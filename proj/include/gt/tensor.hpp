#pragma once

#include <vector>

#include "gt/numeric.hpp"
#include "gt/scene.hpp"

namespace gt {

// Tensor shape: alpha_i is the codimension contributed by camera i, with
// 1 <= alpha_i <= m_i and sum(alpha) = n+1.
struct Profile {
    int n = 0;
    std::vector<int> m;
    std::vector<int> alpha;

    int r() const { return static_cast<int>(m.size()); }
    bool operator==(const Profile& o) const = default;
};

void validate(const Profile& p);
void require_match(const Profile& p, const CameraConfig& cfg);

// All integer vectors with 0 <= b_i <= m_i+1 and sum n+1, lexicographic.
std::vector<std::vector<int>> enumerate_B(const std::vector<int>& m, int n);
// The valid profiles: 1 <= a_i <= m_i and sum n+1, lexicographic.
std::vector<Profile> enumerate_B_interior(const std::vector<int>& m, int n);

// Canonical flattening: per camera the lexicographic list of row choices
// combinations(m_i+1, alpha_i); tuples flatten row-major with the last
// camera fastest. This fixes entry order in memory and on disk.
struct TensorLayout {
    Profile profile;
    std::vector<std::vector<IndexSeq>> row_sets;
    std::vector<long long> strides;
    // Row offset of camera i inside the stacked matrix.
    std::vector<int> block_offsets;

    long long size() const;
    long long flat_index(const std::vector<int>& pos) const;
    std::vector<int> decode(long long flat) const;
    bool next(std::vector<int>& pos) const;
};

TensorLayout make_layout(const Profile& p);

// Dense tensor over row-choice tuples, stored as the canonical representative
// of its projective class: unit Frobenius norm, first nonzero entry positive.
struct GrassmannTensor {
    Profile profile;
    Vec entries;
};

// Unit norm with the leading significant entry positive; throws numeric_error
// on the zero vector. Entries below 1e-12 of the max are skipped when fixing
// the sign so roundoff-level leading entries cannot flip it.
Vec canonicalize(Vec entries);

// Raw minors of the stacked matrix in canonical flattening order: entry at
// (sigma_1,...,sigma_r) selects rows sigma_i from block i, global row order,
// no extra signs.
Vec compute_tensor_raw(const CameraConfig& cfg, const Profile& p);
GrassmannTensor compute_tensor(const CameraConfig& cfg, const Profile& p);

// Codimension-alpha_i subspaces U_i of P(W_i), each given by the rows of a
// full-row-rank alpha_i x (m_i+1) matrix of defining linear forms.
struct CodimSubspaceTuple {
    std::vector<Mat> forms;
};

void validate_tuple(const Profile& p, const CodimSubspaceTuple& u);

// Products of Plücker coordinates of the forms, in tensor layout order; the
// incidence pairing is the dot product of a tensor with this row.
Vec incidence_row(const TensorLayout& lay, const CodimSubspaceTuple& u);
Vec incidence_row(const Profile& p, const CodimSubspaceTuple& u);

double incidence_value(const GrassmannTensor& a, const CodimSubspaceTuple& u);

// Independent incidence criterion: det of the (n+1)x(n+1) stack of F_i s_i,
// zero exactly when some scene point projects into every U_i.
double incidence_oracle(const CameraConfig& cfg, const CodimSubspaceTuple& u);

// Rank of the stacked quotient maps at x: rows Q_i s_i where the rows of Q_i
// complete x_i to an orthonormal basis. Points of the multiview variety have
// rank <= n; generic outside points (when the stack is wide enough) have n+1.
int rank_profile_at(const CameraConfig& cfg, const std::vector<Vec>& x, double tol = kRankTol);

} // namespace gt
