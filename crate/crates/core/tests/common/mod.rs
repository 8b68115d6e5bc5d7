#![allow(dead_code)]

use freestable::ensembles::{sample_girko, EntryDistribution, SquareMatrix};
use freestable::spectra::{eigenvalues, hermitize, singular_values};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relative slack allowed by every inequality check.
pub const SLACK: f64 = 1e-8;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random square matrix, optionally rescaled so products vary in size.
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> SquareMatrix {
    let dist = EntryDistribution::ALL[rng.random_range(0..EntryDistribution::ALL.len())];
    let scale = 10f64.powf(rng.random_range(-1.0..1.0));
    sample_girko(n, dist, rng).scaled(scale)
}

pub fn svals(m: &SquareMatrix) -> Vec<f64> {
    singular_values(m).unwrap().singular_values().unwrap().to_vec()
}

/// Breaches of the product inequality for partial products and of equality
/// of the full product. Products are compared after dividing by
/// `(s_1(A) s_1(B))^k`, so the slack is relative to the operator norms.
pub fn horn_violations(a: &SquareMatrix, b: &SquareMatrix) -> usize {
    let (sa, sb, sab) = (svals(a), svals(b), svals(&a.matmul(b).unwrap()));
    let top = sa[0] * sb[0];
    let (mut lhs, mut rhs) = (1.0, 1.0);
    let mut bad = 0;
    for k in 0..sa.len() {
        lhs *= sab[k] / top;
        rhs *= sa[k] * sb[k] / top;
        if lhs > rhs + SLACK {
            bad += 1;
        }
    }
    if (lhs - rhs).abs() > SLACK {
        bad += 1;
    }
    bad
}

/// Breaches of the partial power-sum bound for each exponent. Each term may
/// carry the singular value decomposition error `n eps |A| |B|` in its base.
pub fn power_sum_violations(a: &SquareMatrix, b: &SquareMatrix, powers: &[f64]) -> usize {
    let (sa, sb, sab) = (svals(a), svals(b), svals(&a.matmul(b).unwrap()));
    let n = sa.len() as f64;
    let top = sa[0] * sb[0];
    let mut bad = 0;
    for &p in powers {
        let floor = (4.0 * n * f64::EPSILON * top).powf(p);
        let (mut lhs, mut rhs) = (0.0, 0.0);
        for k in 0..sa.len() {
            lhs += sab[k].powf(p);
            rhs += (sa[k] * sb[k]).powf(p);
            let terms = (k + 1) as f64;
            if lhs > rhs + terms * (SLACK * top.powf(p) + floor) {
                bad += 1;
            }
        }
    }
    bad
}

/// Breaches of `s_{j+k-1}(A+B) <= s_j(A) + s_k(B)` and its product analogue,
/// with slack relative to the operator norms.
pub fn weyl_violations(a: &SquareMatrix, b: &SquareMatrix) -> usize {
    let (sa, sb) = (svals(a), svals(b));
    let sum = svals(&a.add(b).unwrap());
    let prod = svals(&a.matmul(b).unwrap());
    let n = sa.len();
    let mut bad = 0;
    for j in 0..n {
        for k in 0..n - j {
            let i = j + k;
            if sum[i] > sa[j] + sb[k] + SLACK * (sa[0] + sb[0]) {
                bad += 1;
            }
            if prod[i] > sa[j] * sb[k] + SLACK * sa[0] * sb[0] {
                bad += 1;
            }
        }
    }
    bad
}

/// Relative gap between the two expressions for `log |det(F - shift)|`.
pub fn determinant_gap(f: &SquareMatrix, shift: Complex64) -> f64 {
    let shifted = f.shifted(shift);
    let from_sv: f64 = svals(&shifted).iter().map(|s| s.ln()).sum();
    let ev = eigenvalues(f).unwrap();
    let from_ev: f64 = ev.eigenvalues().unwrap().iter().map(|l| (l - shift).norm().ln()).sum();
    (from_sv - from_ev).abs() / from_sv.abs().max(1.0)
}

/// Largest mismatch between the hermitization spectrum and `+-s_j`.
pub fn hermitize_gap(f: &SquareMatrix) -> f64 {
    let mut ev: Vec<f64> = eigenvalues(&hermitize(f))
        .unwrap()
        .eigenvalues()
        .unwrap()
        .iter()
        .map(|z| z.re)
        .collect();
    ev.sort_by(f64::total_cmp);
    let mut want: Vec<f64> = svals(f).iter().flat_map(|&s| [s, -s]).collect();
    want.sort_by(f64::total_cmp);
    ev.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
