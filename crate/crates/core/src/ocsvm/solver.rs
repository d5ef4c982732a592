//! Two-variable working-set (SMO) solver for the one-class dual
//!
//! ```text
//! minimise ½ αᵀKα   subject to   0 ≤ αᵢ ≤ C,  Σαᵢ = 1
//! ```
//!
//! with `C = 1/(νm)`. The linear term is zero, so the gradient is `Kα`.

use serde::{Deserialize, Serialize};

use super::SvmError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Stop once the maximal KKT violation drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-7,
            max_iterations: 1_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub alpha: Vec<f64>,
    /// `Kα`, recomputed from scratch at the end.
    pub gradient: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub gap: f64,
}

/// Maximal KKT violation: `max G` over α that can shrink minus `min G` over
/// α that can grow. Also returns the index attaining the minimum.
fn violation(alpha: &[f64], grad: &[f64], c: f64) -> Option<(usize, f64)> {
    let mut up: Option<usize> = None;
    let mut low_max = f64::NEG_INFINITY;
    for k in 0..alpha.len() {
        if alpha[k] < c && up.is_none_or(|u| grad[k] < grad[u]) {
            up = Some(k);
        }
        if alpha[k] > 0.0 {
            low_max = low_max.max(grad[k]);
        }
    }
    let i = up?;
    if low_max == f64::NEG_INFINITY {
        return None;
    }
    Some((i, low_max - grad[i]))
}

/// Partner for `i` by second-order selection: among α that can shrink with
/// a larger gradient, the one giving the largest objective decrease
/// `(Gⱼ − Gᵢ)² / ηᵢⱼ`. Ties go to the lowest index.
fn select_partner(gram: &[f64], m: usize, alpha: &[f64], grad: &[f64], i: usize) -> Option<usize> {
    let ki = &gram[i * m..(i + 1) * m];
    let mut best: Option<(usize, f64)> = None;
    for j in 0..m {
        if alpha[j] <= 0.0 || grad[j] <= grad[i] {
            continue;
        }
        let b = grad[j] - grad[i];
        let eta = (ki[i] + gram[j * m + j] - 2.0 * ki[j]).max(ETA_FLOOR);
        let gain = b * b / eta;
        if best.is_none_or(|(_, g)| gain > g) {
            best = Some((j, gain));
        }
    }
    best.map(|(j, _)| j)
}

const ETA_FLOOR: f64 = 1e-12;

fn full_gradient(gram: &[f64], alpha: &[f64]) -> Vec<f64> {
    let m = alpha.len();
    (0..m)
        .map(|k| {
            let row = &gram[k * m..(k + 1) * m];
            row.iter().zip(alpha).map(|(q, a)| q * a).sum()
        })
        .collect()
}

/// Offset from the KKT conditions: the mean gradient over free variables,
/// or the midpoint of the feasible interval when every variable is at a
/// bound (one-sided intervals take their finite end).
pub(crate) fn recover_rho(alpha: &[f64], grad: &[f64], c: f64) -> f64 {
    let mut free_sum = 0.0;
    let mut free_n = 0usize;
    let mut upper = f64::INFINITY; // min over α = 0
    let mut lower = f64::NEG_INFINITY; // max over α = C
    for (&a, &g) in alpha.iter().zip(grad) {
        if a > 0.0 && a < c {
            free_sum += g;
            free_n += 1;
        } else if a <= 0.0 {
            upper = upper.min(g);
        } else {
            lower = lower.max(g);
        }
    }
    if free_n > 0 {
        return free_sum / free_n as f64;
    }
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => 0.5 * (lower + upper),
        (true, false) => lower,
        (false, true) => upper,
        (false, false) => unreachable!("at least one variable"),
    }
}

pub(crate) fn solve(gram: &[f64], c: f64, cfg: &SolverConfig) -> Result<Solution, SvmError> {
    let m = (gram.len() as f64).sqrt() as usize;
    debug_assert_eq!(m * m, gram.len());
    let mut alpha = vec![1.0 / m as f64; m];
    let mut grad = full_gradient(gram, &alpha);
    let mut iterations = 0usize;

    loop {
        let Some((i, gap)) = violation(&alpha, &grad, c) else {
            break;
        };
        if gap < cfg.tolerance {
            // refresh the gradient to shed accumulated rounding, then recheck
            let fresh = full_gradient(gram, &alpha);
            let recheck = violation(&alpha, &fresh, c).map_or(0.0, |p| p.1);
            grad = fresh;
            if recheck < cfg.tolerance {
                break;
            }
            continue;
        }
        let Some(j) = select_partner(gram, m, &alpha, &grad, i) else {
            break;
        };
        if iterations >= cfg.max_iterations {
            return Err(SvmError::NotConverged {
                iterations,
                violation: gap,
            });
        }
        iterations += 1;

        let (ki, kj) = (&gram[i * m..(i + 1) * m], &gram[j * m..(j + 1) * m]);
        let eta = (ki[i] + kj[j] - 2.0 * ki[j]).max(ETA_FLOOR);
        let room_i = c - alpha[i];
        let room_j = alpha[j];
        let step = (grad[j] - grad[i]) / eta;
        let t = if step >= room_i.min(room_j) {
            let t = room_i.min(room_j);
            if room_i <= room_j {
                alpha[i] = c;
                alpha[j] -= t;
                if room_i == room_j {
                    alpha[j] = 0.0;
                }
            } else {
                alpha[i] += t;
                alpha[j] = 0.0;
            }
            t
        } else {
            alpha[i] += step;
            alpha[j] -= step;
            step
        };
        for k in 0..m {
            grad[k] += t * (ki[k] - kj[k]);
        }
    }

    let gradient = full_gradient(gram, &alpha);
    let gap = violation(&alpha, &gradient, c).map_or(0.0, |p| p.1);
    let rho = recover_rho(&alpha, &gradient, c);
    Ok(Solution {
        alpha,
        gradient,
        rho,
        iterations,
        gap,
    })
}
