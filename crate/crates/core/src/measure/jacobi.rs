//! Gegenbauer recurrence and Gauss–Jacobi rules with equal exponents.
//!
//! Everything is expressed for the probability measure
//! `dν_n = Z_n⁻¹ (1 − z²)^{(n−2)/2} dz`, so the orthonormal family starts
//! with `P_0 = 1` and the Gauss weights sum to one without any Gamma
//! function evaluation.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Squared off-diagonal entry `b_k` (k ≥ 1) of the Jacobi matrix of `dν_n`.
///
/// The monic polynomials satisfy `π_{k+1} = z π_k − b_k π_{k−1}`.
pub fn recurrence_coeff(n: f64, k: usize) -> f64 {
    debug_assert!(k >= 1);
    if k == 1 {
        // k (k+n−2) / ((2k+n−1)(2k+n−3)) with the (n−1) factor cancelled.
        return 1.0 / (n + 1.0);
    }
    let k = k as f64;
    k * (k + n - 2.0) / ((2.0 * k + n - 1.0) * (2.0 * k + n - 3.0))
}

/// Values of the orthonormal polynomials `P_0, …, P_{out.len()-1}` at `z`.
pub fn orthonormal_values(n: f64, z: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    let mut s_prev = recurrence_coeff(n, 1).sqrt();
    out[1] = z / s_prev;
    for k in 1..out.len() - 1 {
        let s_next = recurrence_coeff(n, k + 1).sqrt();
        out[k + 1] = (z * out[k] - s_prev * out[k - 1]) / s_next;
        s_prev = s_next;
    }
}

/// Values, first and second derivatives of the orthonormal family at `z`.
pub fn orthonormal_derivatives(n: f64, z: f64, p: &mut [f64], dp: &mut [f64], ddp: &mut [f64]) {
    let len = p.len();
    debug_assert!(dp.len() == len && ddp.len() == len);
    if len == 0 {
        return;
    }
    p[0] = 1.0;
    dp[0] = 0.0;
    ddp[0] = 0.0;
    if len == 1 {
        return;
    }
    let mut s_prev = recurrence_coeff(n, 1).sqrt();
    p[1] = z / s_prev;
    dp[1] = 1.0 / s_prev;
    ddp[1] = 0.0;
    for k in 1..len - 1 {
        let s_next = recurrence_coeff(n, k + 1).sqrt();
        p[k + 1] = (z * p[k] - s_prev * p[k - 1]) / s_next;
        dp[k + 1] = (p[k] + z * dp[k] - s_prev * dp[k - 1]) / s_next;
        ddp[k + 1] = (2.0 * dp[k] + z * ddp[k] - s_prev * ddp[k - 1]) / s_next;
        s_prev = s_next;
    }
}

/// `P_len(z)` and its derivative, used for Newton polishing of the nodes.
fn top_polynomial(n: f64, len: usize, z: f64) -> (f64, f64) {
    let mut p = vec![0.0; len + 1];
    let mut dp = vec![0.0; len + 1];
    let mut ddp = vec![0.0; len + 1];
    orthonormal_derivatives(n, z, &mut p, &mut dp, &mut ddp);
    (p[len], dp[len])
}

/// Gauss rule with `count` nodes for `dν_n`, weights normalized to a
/// probability measure.
///
/// Nodes come from the Jacobi matrix eigenvalues (Golub–Welsch), are
/// polished by Newton on `P_count`, then symmetrized; weights are the
/// Christoffel numbers `1 / Σ_{k<count} P_k(z_i)²`.
pub(crate) fn gauss_rule(n: f64, count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if count < 2 {
        return Err(Error::Domain(format!(
            "a Gauss rule needs at least 2 nodes, got {count}"
        )));
    }
    let mut jacobi = DMatrix::<f64>::zeros(count, count);
    for k in 1..count {
        let s = recurrence_coeff(n, k).sqrt();
        jacobi[(k - 1, k)] = s;
        jacobi[(k, k - 1)] = s;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));

    let mut worst_step = 0.0_f64;
    for z in nodes.iter_mut() {
        let mut last = f64::INFINITY;
        for _ in 0..50 {
            let (val, der) = top_polynomial(n, count, *z);
            let step = val / der;
            *z -= step;
            last = step.abs();
            if last <= 4.0 * f64::EPSILON {
                break;
            }
        }
        worst_step = worst_step.max(last);
    }
    if !(worst_step < 1e-10) {
        return Err(Error::Numerical(format!(
            "Gauss node refinement did not converge for n = {n}, N = {count}: last Newton step {worst_step:e}"
        )));
    }

    for i in 0..count / 2 {
        let j = count - 1 - i;
        let a = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -a;
        nodes[j] = a;
    }
    if count % 2 == 1 {
        nodes[count / 2] = 0.0;
    }
    if nodes.windows(2).any(|w| !(w[0] < w[1])) || nodes[0] <= -1.0 || nodes[count - 1] >= 1.0 {
        return Err(Error::Numerical(format!(
            "Gauss nodes for n = {n}, N = {count} are not strictly increasing inside (-1, 1)"
        )));
    }

    let mut buf = vec![0.0; count];
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&z| {
            orthonormal_values(n, z, &mut buf);
            1.0 / buf.iter().map(|v| v * v).sum::<f64>()
        })
        .collect();
    for i in 0..count / 2 {
        let j = count - 1 - i;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok((nodes, weights))
}
