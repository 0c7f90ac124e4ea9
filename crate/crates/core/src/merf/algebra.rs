//! Random-intercept mixed-model algebra in closed form.
//!
//! With `V_i = σ_b² J + σ² I` for a cluster of `n` points:
//! `tr(V_i⁻¹) = (n − 1)/σ² + 1/(σ² + nσ_b²)` and
//! `1ᵀV_i⁻¹1 = n/(σ² + nσ_b²)`.

use std::collections::BTreeMap;

pub const VARIANCE_FLOOR: f64 = 1e-8;

/// Per-cluster count and residual sum, keyed by cluster id.
fn group(residuals: &[f64], clusters: &[usize]) -> BTreeMap<usize, (usize, f64)> {
    assert_eq!(residuals.len(), clusters.len(), "one cluster per residual");
    let mut out: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for (&r, &c) in residuals.iter().zip(clusters) {
        let e = out.entry(c).or_default();
        e.0 += 1;
        e.1 += r;
    }
    out
}

/// Shrunken intercept for a cluster of `n` points with mean residual `rbar`.
pub fn blup(n: usize, rbar: f64, sigma2: f64, sigma_b2: f64) -> f64 {
    let nb = n as f64 * sigma_b2;
    nb * rbar / (nb + sigma2)
}

/// Random intercepts for every non-empty cluster.
pub fn estep(
    residuals: &[f64],
    clusters: &[usize],
    sigma2: f64,
    sigma_b2: f64,
) -> BTreeMap<usize, f64> {
    group(residuals, clusters)
        .into_iter()
        .map(|(c, (n, sum))| (c, blup(n, sum / n as f64, sigma2, sigma_b2)))
        .collect()
}

fn trace_vinv(n: f64, sigma2: f64, sigma_b2: f64) -> f64 {
    (n - 1.0) / sigma2 + 1.0 / (sigma2 + n * sigma_b2)
}

fn ones_vinv_ones(n: f64, sigma2: f64, sigma_b2: f64) -> f64 {
    n / (sigma2 + n * sigma_b2)
}

/// Per-cluster `(n_i, ε_iᵀε_i, b_i)` with `ε_i = r_i − b_i`.
fn cluster_errors(
    residuals: &[f64],
    b: &BTreeMap<usize, f64>,
    clusters: &[usize],
) -> BTreeMap<usize, (usize, f64, f64)> {
    assert_eq!(residuals.len(), clusters.len(), "one cluster per residual");
    let mut out: BTreeMap<usize, (usize, f64, f64)> = BTreeMap::new();
    for (&r, &c) in residuals.iter().zip(clusters) {
        let bi = b.get(&c).copied().unwrap_or(0.0);
        let e = out.entry(c).or_insert((0, 0.0, bi));
        e.0 += 1;
        e.1 += (r - bi) * (r - bi);
    }
    out
}

/// EM updates of the residual and random-intercept variances.
pub fn update_variance(
    residuals: &[f64],
    b: &BTreeMap<usize, f64>,
    clusters: &[usize],
    sigma2: f64,
    sigma_b2: f64,
) -> (f64, f64) {
    let groups = cluster_errors(residuals, b, clusters);
    if groups.is_empty() {
        return (sigma2, sigma_b2);
    }
    let (mut acc_e, mut acc_b) = (0.0, 0.0);
    for &(n, sse, bi) in groups.values() {
        let nf = n as f64;
        acc_e += sse + sigma2 * (nf - sigma2 * trace_vinv(nf, sigma2, sigma_b2));
        acc_b += bi * bi + (sigma_b2 - sigma_b2 * ones_vinv_ones(nf, sigma2, sigma_b2) * sigma_b2);
    }
    let s2 = (acc_e / residuals.len() as f64).max(VARIANCE_FLOOR);
    let s2b = (acc_b / groups.len() as f64).max(0.0);
    (s2, s2b)
}

/// Generalised log-likelihood monitored for convergence (lower is better).
pub fn gll(
    residuals: &[f64],
    b: &BTreeMap<usize, f64>,
    clusters: &[usize],
    sigma2: f64,
    sigma_b2: f64,
) -> f64 {
    let ln_s2 = sigma2.ln();
    cluster_errors(residuals, b, clusters)
        .values()
        .map(|&(n, sse, bi)| {
            let mut t = sse / sigma2 + n as f64 * ln_s2;
            if sigma_b2 > 0.0 {
                t += bi * bi / sigma_b2 + sigma_b2.ln();
            }
            t
        })
        .sum()
}
