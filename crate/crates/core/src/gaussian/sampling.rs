use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::GaussianState;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Quadrature records `(I₁, Q₁, …, I_N, Q_N)`, as a heterodyne chain would
/// deliver them after demodulation.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSamples<T> {
    n_modes: usize,
    data: Vec<Vec<T>>,
    seed: Option<u64>,
}

impl<T: Scalar> QuadratureSamples<T> {
    /// Wraps externally produced records (no seed).
    pub fn from_records(n_modes: usize, data: Vec<Vec<T>>) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::domain("n_modes", "must be positive"));
        }
        if data.is_empty() {
            return Err(Error::domain("samples", "at least one record is required"));
        }
        if let Some(bad) = data.iter().position(|r| r.len() != 2 * n_modes) {
            return Err(Error::domain(
                "samples",
                format!("record {bad} does not have {} entries", 2 * n_modes),
            ));
        }
        if data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::domain("samples", "non-finite entry"));
        }
        Ok(Self {
            n_modes,
            data,
            seed: None,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn count(&self) -> usize {
        self.data.len()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn records(&self) -> &[Vec<T>] {
        &self.data
    }
}

/// Draws `count` records from the state's multivariate normal distribution.
///
/// The covariance is factored by Cholesky; if that fails (semidefinite up to
/// round-off) the eigen-decomposition with clamped eigenvalues is used.
pub fn sample_quadratures<T: Scalar>(
    state: &GaussianState<T>,
    count: usize,
    seed: u64,
) -> Result<QuadratureSamples<T>> {
    if count == 0 {
        return Err(Error::domain("count", "must be at least 1"));
    }
    let factor = sampling_factor(state.covariance())?;
    let dim = 2 * state.n_modes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = vec![T::zero(); dim];
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        for zi in z.iter_mut() {
            let draw: f64 = StandardNormal.sample(&mut rng);
            *zi = T::lit(draw);
        }
        let mut x = factor.mat_vec(&z);
        for (xi, &di) in x.iter_mut().zip(state.displacement()) {
            *xi += di;
        }
        data.push(x);
    }
    Ok(QuadratureSamples {
        n_modes: state.n_modes(),
        data,
        seed: Some(seed),
    })
}

fn sampling_factor<T: Scalar>(covariance: &Matrix<T>) -> Result<Matrix<T>> {
    if let Some(l) = covariance.cholesky() {
        return Ok(l);
    }
    let (values, vectors) = covariance.symmetric_eigen();
    let scale = covariance.max_abs().max(T::min_positive_value());
    let tol = T::lit(1e-9).max(T::epsilon() * T::lit(64.0)) * scale;
    if values.iter().any(|&v| v < -tol) {
        return Err(Error::InvalidState(
            "covariance is not positive semidefinite".into(),
        ));
    }
    let roots: Vec<T> = values.iter().map(|&v| v.max(T::zero()).sqrt()).collect();
    Ok(vectors.matmul(&Matrix::from_diagonal(&roots)))
}

/// Empirical raw moments `⟨x₁^{k₁} ⋯ x_d^{k_d}⟩` for all exponent vectors of
/// total order `1..=max_order`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable<T> {
    n_vars: usize,
    max_order: u8,
    count: usize,
    entries: BTreeMap<Vec<u8>, T>,
}

impl<T: Scalar> MomentTable<T> {
    /// Moment for an exponent vector such as `[k, l, m, n]` for `⟨I₁^k Q₁^l I₂^m Q₂^n⟩`.
    pub fn get(&self, exponents: &[u8]) -> Option<T> {
        if exponents.iter().all(|&e| e == 0) && exponents.len() == self.n_vars {
            return Some(T::one());
        }
        self.entries.get(exponents).copied()
    }

    pub fn max_order(&self) -> u8 {
        self.max_order
    }

    pub fn sample_count(&self) -> usize {
        self.count
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u8], T)> {
        self.entries.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn exponent_vectors(n_vars: usize, max_order: u8) -> Vec<Vec<u8>> {
    fn rec(prefix: &mut Vec<u8>, remaining_vars: usize, budget: u8, out: &mut Vec<Vec<u8>>) {
        if remaining_vars == 0 {
            if prefix.iter().any(|&e| e > 0) {
                out.push(prefix.clone());
            }
            return;
        }
        for e in 0..=budget {
            prefix.push(e);
            rec(prefix, remaining_vars - 1, budget - e, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n_vars), n_vars, max_order, &mut out);
    out
}

/// Raw moments up to `max_order ≤ 4`.
pub fn estimate_moments<T: Scalar>(samples: &QuadratureSamples<T>, max_order: u8) -> Result<MomentTable<T>> {
    if max_order == 0 || max_order > 4 {
        return Err(Error::domain("max_order", format!("must be 1..=4, got {max_order}")));
    }
    if samples.count() == 0 {
        return Err(Error::domain("samples", "empty sample set"));
    }
    let n_vars = 2 * samples.n_modes();
    let keys = exponent_vectors(n_vars, max_order);
    let mut sums = vec![0.0f64; keys.len()];
    let mut powers = vec![[1.0f64; 5]; n_vars];
    for record in samples.records() {
        for (p, &x) in powers.iter_mut().zip(record) {
            let x = x.to_f64_lossy();
            for k in 1..=usize::from(max_order) {
                p[k] = p[k - 1] * x;
            }
        }
        for (sum, key) in sums.iter_mut().zip(&keys) {
            *sum += key
                .iter()
                .zip(&powers)
                .fold(1.0, |acc, (&e, p)| acc * p[usize::from(e)]);
        }
    }
    let n = samples.count() as f64;
    Ok(MomentTable {
        n_vars,
        max_order,
        count: samples.count(),
        entries: keys
            .into_iter()
            .zip(sums)
            .map(|(k, s)| (k, T::lit(s / n)))
            .collect(),
    })
}

/// Joint cumulants up to fourth order; all third- and fourth-order entries
/// vanish for a Gaussian distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Cumulants<T> {
    pub mean: Vec<T>,
    pub covariance: Matrix<T>,
    /// Keyed by sorted index triples `i ≤ j ≤ k`.
    pub third: BTreeMap<[usize; 3], T>,
    /// Keyed by sorted index quadruples `i ≤ j ≤ k ≤ l`.
    pub fourth: BTreeMap<[usize; 4], T>,
}

impl<T: Scalar> Cumulants<T> {
    /// `κ_iiii / κ_ii²` for one quadrature.
    pub fn excess_kurtosis(&self, var: usize) -> T {
        let v = self.covariance[(var, var)];
        self.fourth[&[var; 4]] / (v * v)
    }

    pub fn max_abs_third(&self) -> T {
        self.third.values().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn max_abs_fourth(&self) -> T {
        self.fourth.values().fold(T::zero(), |m, &x| m.max(x.abs()))
    }
}

/// Mean, covariance and third/fourth-order joint cumulants of the samples.
pub fn fourth_order_cumulants<T: Scalar>(samples: &QuadratureSamples<T>) -> Result<Cumulants<T>> {
    if samples.count() == 0 {
        return Err(Error::domain("samples", "empty sample set"));
    }
    let d = 2 * samples.n_modes();
    let n = samples.count() as f64;
    let mut mean = vec![0.0f64; d];
    for r in samples.records() {
        for (m, &x) in mean.iter_mut().zip(r) {
            *m += x.to_f64_lossy();
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);

    let mut m2 = vec![0.0f64; d * d];
    let triples: Vec<[usize; 3]> = sorted_tuples::<3>(d);
    let quads: Vec<[usize; 4]> = sorted_tuples::<4>(d);
    let mut m3 = vec![0.0f64; triples.len()];
    let mut m4 = vec![0.0f64; quads.len()];
    let mut c = vec![0.0f64; d];
    for r in samples.records() {
        for ((ci, &x), &mu) in c.iter_mut().zip(r).zip(&mean) {
            *ci = x.to_f64_lossy() - mu;
        }
        for i in 0..d {
            for j in i..d {
                m2[i * d + j] += c[i] * c[j];
            }
        }
        for (acc, t) in m3.iter_mut().zip(&triples) {
            *acc += c[t[0]] * c[t[1]] * c[t[2]];
        }
        for (acc, q) in m4.iter_mut().zip(&quads) {
            *acc += c[q[0]] * c[q[1]] * c[q[2]] * c[q[3]];
        }
    }
    for i in 0..d {
        for j in i..d {
            m2[i * d + j] /= n;
            m2[j * d + i] = m2[i * d + j];
        }
    }
    let cov = |i: usize, j: usize| m2[i * d + j];
    let fourth = quads
        .iter()
        .zip(&m4)
        .map(|(q, &s)| {
            let [i, j, k, l] = *q;
            let kappa = s / n - cov(i, j) * cov(k, l) - cov(i, k) * cov(j, l) - cov(i, l) * cov(j, k);
            (*q, T::lit(kappa))
        })
        .collect();
    let third = triples
        .iter()
        .zip(&m3)
        .map(|(t, &s)| (*t, T::lit(s / n)))
        .collect();
    Ok(Cumulants {
        mean: mean.into_iter().map(T::lit).collect(),
        covariance: Matrix::from_fn(d, d, |i, j| T::lit(cov(i, j))),
        third,
        fourth,
    })
}

fn sorted_tuples<const K: usize>(d: usize) -> Vec<[usize; K]> {
    let mut out = Vec::new();
    let mut cur = [0usize; K];
    fn rec<const K: usize>(pos: usize, start: usize, d: usize, cur: &mut [usize; K], out: &mut Vec<[usize; K]>) {
        if pos == K {
            out.push(*cur);
            return;
        }
        for v in start..d {
            cur[pos] = v;
            rec(pos + 1, v, d, cur, out);
        }
    }
    rec(0, 0, d, &mut cur, &mut out);
    out
}
