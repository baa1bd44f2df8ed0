use nalgebra::{DMatrix, DVector};

use super::eig::{eig_sym, EigenDecomposition};
use crate::error::{Error, Result};

/// Eigendecomposition of `diag(d) + ρ zzᵀ`.
///
/// Besides the eigenvalues, each root keeps its offset from the matching
/// sorted diagonal entry, `values[j] − sort(d)[j]`, computed without
/// cancellation. Spectral traces such as `Σ √μ_j − Σ √d_j` stay accurate
/// when `d` spans many orders of magnitude.
#[derive(Debug, Clone)]
pub struct Dpr1Eigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
    base: Vec<f64>,
    offsets: Vec<f64>,
}

impl Dpr1Eigen {
    pub fn decomposition(&self) -> EigenDecomposition {
        EigenDecomposition {
            values: self.values.clone(),
            vectors: self.vectors.clone(),
        }
    }

    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.values[j]);
        }
        scaled * self.vectors.transpose()
    }

    /// Sorted diagonal.
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    /// `values[j] − base[j]`.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Σ_j (√values[j] − √base[j])`, requires nonnegative values.
    pub fn sqrt_shift_sum(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.base)
            .zip(&self.offsets)
            .map(|((&mu, &d), &off)| {
                let denom = mu.max(0.0).sqrt() + d.max(0.0).sqrt();
                if denom == 0.0 {
                    0.0
                } else {
                    off / denom
                }
            })
            .sum()
    }
}

/// Eigenvalues and eigenvectors of `diag(d) + α ψψᵀ` from the secular
/// equation `1 + α Σ ψ_i² / (d_i − μ) = 0`.
///
/// Zero components of `ψ` are deflated. Active poles closer than `1e−13`
/// relative to their magnitude fall back to the dense solver.
pub fn dpr1_eig(d: &[f64], psi: &[f64], alpha: f64) -> Result<Dpr1Eigen> {
    let n = d.len();
    if psi.len() != n {
        return Err(Error::InvalidInput(format!(
            "dpr1_eig: diagonal has {} entries, vector has {}",
            n,
            psi.len()
        )));
    }
    if d.iter().chain(psi).any(|x| !x.is_finite()) || !alpha.is_finite() {
        return Err(Error::InvalidInput("dpr1_eig: non-finite input".into()));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let ds: Vec<f64> = perm.iter().map(|&i| d[i]).collect();
    let zs: Vec<f64> = perm.iter().map(|&i| psi[i]).collect();

    let (values, offsets, sorted_vectors) = if alpha == 0.0 || zs.iter().all(|&z| z == 0.0) {
        (ds.clone(), vec![0.0; n], DMatrix::identity(n, n))
    } else if alpha > 0.0 {
        solve_positive(&ds, &zs, alpha)?
    } else {
        // −(diag(d) + αzzᵀ) = diag(−d) + |α|zzᵀ; reverse to keep poles ascending.
        let nd: Vec<f64> = ds.iter().rev().map(|x| -x).collect();
        let nz: Vec<f64> = zs.iter().rev().copied().collect();
        let (v, off, q) = solve_positive(&nd, &nz, -alpha)?;
        let values: Vec<f64> = v.iter().rev().map(|x| -x).collect();
        let offsets: Vec<f64> = off.iter().rev().map(|x| -x).collect();
        let q = DMatrix::from_fn(n, n, |i, j| q[(n - 1 - i, n - 1 - j)]);
        (values, offsets, q)
    };

    // Rows back to the caller's ordering.
    let mut vectors = DMatrix::zeros(n, n);
    for (sorted_row, &orig) in perm.iter().enumerate() {
        vectors.set_row(orig, &sorted_vectors.row(sorted_row));
    }
    Ok(Dpr1Eigen {
        values: DVector::from_vec(values),
        vectors,
        base: ds,
        offsets,
    })
}

type Solved = (Vec<f64>, Vec<f64>, DMatrix<f64>);

fn dense_fallback(ds: &[f64], zs: &[f64], rho: f64) -> Result<Solved> {
    let n = ds.len();
    let z = DVector::from_column_slice(zs);
    let mut m = DMatrix::from_diagonal(&DVector::from_column_slice(ds));
    m.ger(rho, &z, &z, 1.0);
    let e = eig_sym(&m)?;
    let values: Vec<f64> = e.values.iter().copied().collect();
    let offsets = (0..n).map(|j| values[j] - ds[j]).collect();
    Ok((values, offsets, e.vectors))
}

/// Root `j` is represented as `pole + δ` with `pole` an active diagonal entry.
struct Root {
    origin: usize,
    delta: f64,
}

/// `ds` ascending, `rho > 0`.
fn solve_positive(ds: &[f64], zs: &[f64], rho: f64) -> Result<Solved> {
    let n = ds.len();
    let zmax = zs.iter().fold(0.0_f64, |m, z| m.max(z.abs()));
    let active: Vec<usize> = (0..n).filter(|&i| zs[i].abs() > 1e-13 * zmax).collect();
    for w in active.windows(2) {
        let scale = ds[w[1]].abs().max(ds[w[0]].abs());
        if ds[w[1]] - ds[w[0]] <= 1e-13 * scale {
            return dense_fallback(ds, zs, rho);
        }
    }
    let k = active.len();
    let p: Vec<f64> = active.iter().map(|&i| ds[i]).collect();
    let zeta: Vec<f64> = active.iter().map(|&i| zs[i]).collect();
    let z2: Vec<f64> = zeta.iter().map(|z| z * z).collect();
    let znorm2: f64 = z2.iter().sum();

    let mut roots = Vec::with_capacity(k);
    for r in 0..k {
        let root = if r + 1 < k {
            let gap = p[r + 1] - p[r];
            let half = 0.5 * gap;
            // f increases on (p_r, p_{r+1}); its sign at the midpoint picks the nearer pole.
            if secular(&p, &z2, rho, r, half).0 >= 0.0 {
                Root {
                    origin: r,
                    delta: solve_root(&p, &z2, rho, r, 0.0, half),
                }
            } else {
                Root {
                    origin: r + 1,
                    delta: solve_root(&p, &z2, rho, r + 1, -half, 0.0),
                }
            }
        } else {
            Root {
                origin: r,
                delta: solve_root(&p, &z2, rho, r, 0.0, rho * znorm2),
            }
        };
        roots.push(root);
    }

    // λ_r − p_s, accurate.
    let diff = |r: usize, s: usize| (p[roots[r].origin] - p[s]) + roots[r].delta;

    // Löwner / Gu-Eisenstat: recompute z so the computed roots are exact eigenvalues.
    let mut zhat = vec![0.0; k];
    for s in 0..k {
        let mut prod = diff(k - 1, s) / rho;
        for r in 0..k - 1 {
            if r < s {
                prod *= diff(r, s) / (p[r] - p[s]);
            } else {
                prod *= diff(r, s) / (p[r + 1] - p[s]);
            }
        }
        zhat[s] = prod.max(0.0).sqrt().copysign(zeta[s]);
    }

    // Merge deflated poles and secular roots, then sort.
    struct Entry {
        value: f64,
        pole: usize,
        delta: f64,
        col: Option<usize>,
    }
    let mut entries: Vec<Entry> = Vec::with_capacity(n);
    let mut is_active = vec![false; n];
    for &i in &active {
        is_active[i] = true;
    }
    for i in 0..n {
        if !is_active[i] {
            entries.push(Entry {
                value: ds[i],
                pole: i,
                delta: 0.0,
                col: None,
            });
        }
    }
    for (r, root) in roots.iter().enumerate() {
        entries.push(Entry {
            value: p[root.origin] + root.delta,
            pole: active[root.origin],
            delta: root.delta,
            col: Some(r),
        });
    }
    entries.sort_by(|a, b| a.value.total_cmp(&b.value));

    let mut values = Vec::with_capacity(n);
    let mut offsets = Vec::with_capacity(n);
    let mut q = DMatrix::zeros(n, n);
    for (j, e) in entries.iter().enumerate() {
        values.push(e.value);
        offsets.push((ds[e.pole] - ds[j]) + e.delta);
        match e.col {
            None => q[(e.pole, j)] = 1.0,
            Some(r) => {
                let mut norm2 = 0.0;
                for s in 0..k {
                    let v = zhat[s] / -diff(r, s);
                    q[(active[s], j)] = v;
                    norm2 += v * v;
                }
                let norm = norm2.sqrt();
                for &i in &active {
                    q[(i, j)] /= norm;
                }
            }
        }
    }
    Ok((values, offsets, q))
}

/// Secular function and derivative at `μ = p_o + δ`.
fn secular(p: &[f64], z2: &[f64], rho: f64, o: usize, delta: f64) -> (f64, f64) {
    let mut f = 1.0;
    let mut df = 0.0;
    for s in 0..p.len() {
        let gap = (p[s] - p[o]) - delta;
        let t = z2[s] / gap;
        f += rho * t;
        df += rho * t / gap;
    }
    (f, df)
}

/// Solve the secular equation for `δ` in the open bracket `(lo, hi)` around
/// pole `o`. Newton is applied to `h(δ) = δ·f(δ)`, which has no pole at
/// `δ = 0`; bisection takes over whenever the step leaves the bracket.
fn solve_root(p: &[f64], z2: &[f64], rho: f64, o: usize, mut lo: f64, mut hi: f64) -> f64 {
    // Starting point from the two-term approximation near the pole.
    let rest = |delta: f64| {
        let mut f = 1.0;
        for s in 0..p.len() {
            if s != o {
                f += rho * z2[s] / ((p[s] - p[o]) - delta);
            }
        }
        f
    };
    let mut x = {
        let c = rest(0.0);
        let guess = rho * z2[o] / c;
        if guess > lo && guess < hi {
            guess
        } else {
            0.5 * (lo + hi)
        }
    };
    for _ in 0..300 {
        let (f, df) = secular(p, z2, rho, o, x);
        if f == 0.0 {
            return x;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        // h = δ f, h' = f + δ f'.
        let h = x * f;
        let dh = f + x * df;
        let mut next = if dh != 0.0 { x - h / dh } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let width = hi - lo;
        if width <= 4.0 * f64::EPSILON * next.abs().max(f64::MIN_POSITIVE) {
            return next;
        }
        if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs() {
            return next;
        }
        x = next;
    }
    x
}
