#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "splitplot/contrasts.hpp"
#include "splitplot/design.hpp"
#include "splitplot/linalg.hpp"

namespace splitplot {

/// Sample mean, Horvitz-Thompson, Hajek.
enum class MeanScheme { sm, ht, haj };

std::string_view to_string(MeanScheme scheme);
MeanScheme parse_mean_scheme(std::string_view name);

struct MeanEstimate {
  MeanScheme scheme = MeanScheme::ht;
  Vector means;       // Ŷ(z), lexicographic z
  Matrix covariance;  // block-diagonal in the whole-plot level
  Vector ht_ones;     // HT estimate of the constant 1
  std::vector<std::size_t> sample_sizes;  // N_z
};

MeanEstimate estimate_means(const ObservedData& data, MeanScheme scheme);

/// Block-diagonal covariance estimate for the ht or haj means; the sm
/// scheme gets the clustered form that coincides with ht on uniform designs.
Matrix vhat(const ObservedData& data, MeanScheme scheme);

/// Per-treatment means of an arbitrary unit-level column under a scheme
/// (e.g. the covariate means x̂ entering adjusted estimators).
Vector treatment_means(const ObservedData& data, std::span<const double> unit_values, MeanScheme scheme);

EffectEstimate apply_contrast(const ContrastMatrix& g, const MeanEstimate& m);

/// Finite-population moments of a potential-outcome table.
struct MomentSummary {
  Vector mean;               // Ȳ(z)
  Matrix s_ht;               // S: between-plot covariance of α_w Ȳ_w(z)
  Matrix s_haj;              // α_w²-weighted between-plot covariance of Ȳ_w(z) about Ȳ(z)
  std::vector<Matrix> s_w;   // scaled within-plot covariances
  Matrix psi;                // W⁻¹ Σ_w M_w⁻¹ (H_w ∘ S_w)
  Matrix h;                  // 1(a=a')/p_a − 1
  std::vector<Matrix> h_w;   // 1(a=a')/p_a · (1(z=z')/q_wb − 1)
  Vector size_moments;       // W⁻¹ Σ α_w^k for k = 1, 2, 4
};

MomentSummary true_moments(const PotentialOutcomeTable& pot);

/// Exact randomization covariance of the HT means: W⁻¹(H∘S + Ψ).
Matrix true_cov_ht(const PotentialOutcomeTable& pot);

/// (p_a⁻¹ − 1)(S_haj(z,z) − S(z,z)) per treatment: W times the large-sample
/// variance of Hajek minus that of HT. Negative entries favour Hajek.
Vector hajek_ht_asymptotic_gap(const PotentialOutcomeTable& pot);

/// E(V̂_ht) − cov(Ŷ_ht) = W⁻¹S, exact at any W.
Matrix vhat_ht_bias(const PotentialOutcomeTable& pot);

}  // namespace splitplot
