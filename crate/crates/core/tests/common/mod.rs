//! Independent oracles and random instance generators for integration tests.
//!
//! Oracles deliberately avoid the library's own helpers: eigenvalues come
//! from a cyclic Jacobi sweep, Kronecker products and disagreement sums from
//! explicit loops.

#![allow(dead_code)]

use std::collections::BTreeMap;

use matsync::{ArraySpec, TimeDomain};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    normal(rng, n, n).qr().q()
}

/// `Q₁ diag(s) Q₂` with singular values in `[0.7, 1.4]`.
pub fn well_conditioned(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let s = DVector::from_fn(n, |_, _| rng.random_range(0.7..1.4));
    orthogonal(rng, n) * DMatrix::from_diagonal(&s) * orthogonal(rng, n)
}

pub fn skew(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let x = normal(rng, n, n);
    &x - x.transpose()
}

pub fn rotation(theta: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = (m + m.transpose()) * 0.5;
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].powi(2)).sum();
        if off <= 1e-30 * (1.0 + a.norm_squared()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut v: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn kron_oracle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |r, c| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}

/// `Σ_{i<j} (x_i - x_j)ᵀ Q_ij (x_i - x_j)` for symmetric weights.
pub fn edge_sum_disagreement(weights: &BTreeMap<(usize, usize), DMatrix<f64>>, x: &DVector<f64>, n: usize) -> f64 {
    weights
        .iter()
        .filter(|(&(i, j), _)| i < j)
        .map(|(&(i, j), w)| {
            let d = x.rows(i * n, n) - x.rows(j * n, n);
            d.dot(&(w * &d))
        })
        .sum()
}

/// Rank of `[H; HS; …; HS^{n-1}]`.
pub fn observability_rank(h: &DMatrix<f64>, s: &DMatrix<f64>) -> usize {
    let n = s.nrows();
    let m = h.nrows();
    let mut stacked = DMatrix::zeros(m * n, n);
    let mut block = h.clone();
    for k in 0..n {
        stacked.view_mut((k * m, 0), (m, n)).copy_from(&block);
        block = &block * s;
    }
    let sv = stacked.svd(false, false).singular_values;
    let top = sv.max();
    sv.iter().filter(|&&v| v > 1e-9 * top.max(1.0)).count()
}

/// `σ_min([A - λI; C])` computed directly with nalgebra's complex SVD.
pub fn pbh_sigma(a: &DMatrix<f64>, c: &DMatrix<f64>, lambda: Complex64) -> f64 {
    let n = a.nrows();
    let m = c.nrows();
    let mut stacked = DMatrix::<Complex64>::zeros(n + m, n);
    for r in 0..n {
        for k in 0..n {
            stacked[(r, k)] = Complex64::new(a[(r, k)], 0.0) - if r == k { lambda } else { Complex64::new(0.0, 0.0) };
        }
    }
    for r in 0..m {
        for k in 0..n {
            stacked[(n + r, k)] = Complex64::new(c[(r, k)], 0.0);
        }
    }
    stacked.svd(false, false).singular_values.min()
}

/// Spanning tree plus each remaining pair with probability `extra`, as
/// unordered pairs `(i, j)` with `i < j`.
pub fn connected_pairs(rng: &mut ChaCha8Rng, q: usize, extra: f64) -> Vec<(usize, usize)> {
    let mut pairs = std::collections::BTreeSet::new();
    for v in 1..q {
        let u = rng.random_range(0..v);
        pairs.insert((u, v));
    }
    for i in 0..q {
        for j in (i + 1)..q {
            if rng.random::<f64>() < extra {
                pairs.insert((i, j));
            }
        }
    }
    pairs.into_iter().collect()
}

/// A random neutrally stable array: `A = T blkdiag(marginal, F) T⁻¹` with
/// well-separated marginal frequencies, at most one real marginal mode,
/// a stable block with margin, and symmetric outputs scaled relative to the
/// marginal subspace with a PBH margin of at least 0.25.
pub struct NeutralCase {
    pub spec: ArraySpec,
    pub transform: DMatrix<f64>,
    pub n1: usize,
}

pub fn neutral_case(rng: &mut ChaCha8Rng, domain: TimeDomain, max_n: usize, max_q: usize) -> NeutralCase {
    let dt = domain == TimeDomain::Discrete;
    let n = rng.random_range(2..=max_n);
    let q = rng.random_range(2..=max_q);
    let mut blocks: Vec<DMatrix<f64>> = Vec::new();
    let mut n1 = 0;
    let mut has_real = false;
    loop {
        if n - n1 >= 2 && rng.random::<f64>() < 0.6 {
            let w = 0.4 + 0.5 * blocks.len() as f64 + rng.random_range(0.0..0.3);
            blocks.push(if dt {
                rotation(w)
            } else {
                DMatrix::from_row_slice(2, 2, &[0.0, w, -w, 0.0])
            });
            n1 += 2;
        } else {
            if has_real {
                break;
            }
            blocks.push(DMatrix::from_element(1, 1, if dt { 1.0 } else { 0.0 }));
            has_real = true;
            n1 += 1;
        }
        if n1 >= n || rng.random::<f64>() < 0.4 {
            break;
        }
    }
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for b in &blocks {
        let s = b.nrows();
        if k + s > n {
            break;
        }
        m.view_mut((k, k), (s, s)).copy_from(b);
        k += s;
    }
    let n1 = k;
    let n2 = n - n1;
    if n2 > 0 {
        let mut f = normal(rng, n2, n2);
        if dt {
            let radius = f.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
            f *= rng.random_range(0.2..0.8) / radius;
        } else {
            let abscissa = f.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            let shift = abscissa + rng.random_range(0.2..1.0);
            f -= DMatrix::<f64>::identity(n2, n2) * shift;
        }
        m.view_mut((n1, n1), (n2, n2)).copy_from(&f);
    }
    let t = well_conditioned(rng, n);
    let a = &t * &m * t.clone().try_inverse().expect("well conditioned");
    let eig: Vec<Complex64> = a.complex_eigenvalues().iter().copied().collect();
    let u = t.columns(0, n1).into_owned();

    let mut spec = ArraySpec::new(q, a.clone(), domain).expect("valid");
    for (i, j) in connected_pairs(rng, q, 0.3) {
        let c = loop {
            let rows = rng.random_range(1..=n);
            let mut c = normal(rng, rows, n);
            let reference = if n1 > 0 { &c * &u } else { c.clone() };
            let norm = reference.clone().svd(false, false).singular_values.max();
            c *= rng.random_range(0.6..1.2) / norm;
            let ok = eig.iter().all(|&l| {
                let relevant = if dt { l.norm() > 1.0 - 1e-6 } else { l.re > -1e-6 };
                !relevant || pbh_sigma(&a, &c, l) >= 0.25
            });
            if ok {
                break c;
            }
        };
        spec.set_symmetric_output(i, j, c).expect("in range");
    }
    NeutralCase { spec, transform: t, n1 }
}

/// A complete-graph array that satisfies CL-detectability by construction:
/// `C_ijᵀC_ij = AᵀP₀ + P₀A + (shift + 0.5)I + 0.2RRᵀ` for a hidden `P₀`.
///
/// The spectral abscissa of `A` is drawn from `[-0.3, 0.05]`: the synchronous
/// motion grows like `e^{abscissa·t}`, and over a horizon of 200 faster growth
/// would exceed the divergence guard and drown the sync error in roundoff.
pub fn complete_case(rng: &mut ChaCha8Rng, max_n: usize, max_q: usize) -> ArraySpec {
    let n = rng.random_range(1..=max_n);
    let q = rng.random_range(2..=max_q);
    let mut a = normal(rng, n, n);
    let abscissa = a.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    a -= DMatrix::<f64>::identity(n, n) * (abscissa - rng.random_range(-0.3..0.05));
    let x = normal(rng, n, n);
    let p0 = &x * x.transpose() + DMatrix::<f64>::identity(n, n) * 0.3;
    let lyap = a.transpose() * &p0 + &p0 * &a;
    let lo = jacobi_eigenvalues(&lyap)[0];
    let mut spec = ArraySpec::new(q, a.clone(), TimeDomain::Continuous).expect("valid");
    for i in 0..q {
        for j in (i + 1)..q {
            let r = normal(rng, n, n);
            let w = &lyap + DMatrix::<f64>::identity(n, n) * ((-lo).max(0.0) + 0.5) + &r * r.transpose() * 0.2;
            let w = (&w + w.transpose()) * 0.5;
            let c = w.cholesky().expect("positive definite").l().transpose();
            spec.set_symmetric_output(i, j, c).expect("in range");
        }
    }
    spec
}

/// Random symmetric PSD weights on random pairs.
pub fn random_weights(rng: &mut ChaCha8Rng, q: usize, n: usize, density: f64) -> BTreeMap<(usize, usize), DMatrix<f64>> {
    let mut w = BTreeMap::new();
    for i in 0..q {
        for j in (i + 1)..q {
            if rng.random::<f64>() < density {
                let rank = rng.random_range(1..=n);
                let c = normal(rng, rank, n);
                let block = c.transpose() * c;
                w.insert((i, j), block.clone());
                w.insert((j, i), block);
            }
        }
    }
    w
}

/// Stacked `𝟙 ⊗ v`.
pub fn synchronized(v: &DVector<f64>, q: usize) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(q * n, |r, _| v[r % n])
}
