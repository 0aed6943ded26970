//! Symmetric eigensolvers for operators that are self-adjoint in a
//! diagonal weighted inner product: dense for small problems, block LOBPCG
//! for larger ones, and Lanczos for extreme eigenvalues. Also the exact
//! spectrum of the five-point Dirichlet Laplacian, which doubles as a fast
//! preconditioner on tensor meshes.

use std::f64::consts::PI;

use log::debug;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::assembly::{Mesh, OperatorMatrix};
use crate::error::{invalid, Error, Result};
use crate::sparse::CsrMatrix;

/// Above this dimension `eigen_solve` switches from dense to LOBPCG.
pub const DENSE_LIMIT: usize = 1500;

/// Mass asymmetry accepted as self-adjoint.
pub const SELF_ADJOINT_TOL: f64 = 1e-10;

fn sine_matrix(cells: usize) -> DMatrix<f64> {
    let n = cells - 1;
    let c = (2.0 / cells as f64).sqrt();
    DMatrix::from_fn(n, n, |i, j| c * (PI * ((i + 1) * (j + 1)) as f64 / cells as f64).sin())
}

fn second_difference_eigenvalues(cells: usize, h: f64) -> Vec<f64> {
    (1..cells)
        .map(|j| 4.0 / (h * h) * (PI * j as f64 / (2.0 * cells as f64)).sin().powi(2))
        .collect()
}

/// Eigenvalues of `-Δ_h` on the interior nodes, ascending, with their
/// tensor indices `(i, j)` (`j = 0` on the interval).
fn laplacian_spectrum(mesh: &Mesh) -> Vec<(f64, usize, usize)> {
    let (hx, hy) = mesh.spacing();
    let (nx, ny) = mesh.cells();
    let lx = second_difference_eigenvalues(nx, hx);
    let mut out: Vec<(f64, usize, usize)> = match mesh {
        Mesh::Interval { .. } => lx.iter().enumerate().map(|(i, &l)| (l, i, 0)).collect(),
        Mesh::Box { .. } => {
            let ly = second_difference_eigenvalues(ny, hy);
            ly.iter()
                .enumerate()
                .flat_map(|(j, &b)| lx.iter().enumerate().map(move |(i, &a)| (a + b, i, j)))
                .collect()
        }
    };
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)).then(a.1.cmp(&b.1)));
    out
}

/// The `count` smallest eigenvalues of `-Δ_h`, ascending.
pub fn laplacian_eigenvalues(mesh: &Mesh, count: usize) -> Vec<f64> {
    laplacian_spectrum(mesh).into_iter().take(count).map(|e| e.0).collect()
}

/// Orthonormal (Euclidean) eigenvectors of `-Δ_h` for the `count`
/// smallest eigenvalues, as columns.
pub fn laplacian_modes(mesh: &Mesh, count: usize) -> DMatrix<f64> {
    let (nx, ny) = mesh.cells();
    let sx = sine_matrix(nx);
    let spec = laplacian_spectrum(mesh);
    let count = count.min(spec.len());
    match mesh {
        Mesh::Interval { .. } => DMatrix::from_fn(nx - 1, count, |r, c| sx[(r, spec[c].1)]),
        Mesh::Box { .. } => {
            let sy = sine_matrix(ny);
            let w = nx - 1;
            DMatrix::from_fn(w * (ny - 1), count, |r, c| sx[(r % w, spec[c].1)] * sy[(r / w, spec[c].2)])
        }
    }
}

/// `(-a Δ_h + shift)⁻¹` applied by sine diagonalization.
#[derive(Debug, Clone)]
pub struct LaplacianPreconditioner {
    sx: DMatrix<f64>,
    sy: Option<DMatrix<f64>>,
    denom: DMatrix<f64>,
}

impl LaplacianPreconditioner {
    pub fn new(mesh: &Mesh, a: f64, shift: f64) -> Result<Self> {
        mesh.validate()?;
        if !(a > 0.0) || !(shift >= 0.0) {
            return Err(invalid("preconditioner", "need a > 0 and shift ≥ 0"));
        }
        let (hx, hy) = mesh.spacing();
        let (nx, ny) = mesh.cells();
        let lx = second_difference_eigenvalues(nx, hx);
        Ok(match mesh {
            Mesh::Interval { .. } => Self {
                sx: sine_matrix(nx),
                sy: None,
                denom: DMatrix::from_fn(1, nx - 1, |_, i| a * lx[i] + shift),
            },
            Mesh::Box { .. } => {
                let ly = second_difference_eigenvalues(ny, hy);
                Self {
                    sx: sine_matrix(nx),
                    sy: Some(sine_matrix(ny)),
                    denom: DMatrix::from_fn(ny - 1, nx - 1, |j, i| a * (lx[i] + ly[j]) + shift),
                }
            }
        })
    }

    pub fn apply(&self, r: &DMatrix<f64>) -> DMatrix<f64> {
        let w = self.sx.nrows();
        let mut out = DMatrix::zeros(r.nrows(), r.ncols());
        for c in 0..r.ncols() {
            match &self.sy {
                None => {
                    let mut u = &self.sx * r.column(c);
                    for (i, v) in u.iter_mut().enumerate() {
                        *v /= self.denom[(0, i)];
                    }
                    out.set_column(c, &(&self.sx * u));
                }
                Some(sy) => {
                    let h = sy.nrows();
                    // rows j, columns i
                    let u = DMatrix::from_fn(h, w, |j, i| r[(j * w + i, c)]);
                    let mut t = sy * u * &self.sx;
                    t.component_div_assign(&self.denom);
                    let back = sy * t * &self.sx;
                    for j in 0..h {
                        for i in 0..w {
                            out[(j * w + i, c)] = back[(j, i)];
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenMethod {
    Dense,
    Lobpcg,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    /// Ascending.
    pub values: Vec<f64>,
    /// `‖A v - λ v‖` in the weighted norm, for unit `v`.
    pub residuals: Vec<f64>,
    /// Upper bound on `‖A‖` used to scale the residual test.
    pub norm_bound: f64,
    pub method: EigenMethod,
    pub iterations: usize,
    /// Eigenvectors in the original coordinates, unit in the weighted norm.
    #[serde(skip)]
    pub vectors: DMatrix<f64>,
}

pub type BlockMap<'a> = &'a (dyn Fn(&DMatrix<f64>) -> DMatrix<f64> + Sync);

pub struct EigenOptions<'a> {
    pub dense_limit: usize,
    /// Applied to residual blocks in the original coordinates.
    pub preconditioner: Option<BlockMap<'a>>,
    /// Initial block for LOBPCG, in the original coordinates.
    pub initial: Option<DMatrix<f64>>,
    /// Convergence threshold on residuals, relative to the norm bound.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions<'_> {
    fn default() -> Self {
        Self {
            dense_limit: DENSE_LIMIT,
            preconditioner: None,
            initial: None,
            tol: 1e-10,
            max_iter: 500,
        }
    }
}

/// The `m` smallest eigenvalues of an operator that is self-adjoint in its
/// weighted inner product.
pub fn eigen_solve(op: &OperatorMatrix, m: usize) -> Result<EigenResult> {
    eigen_solve_with(op, m, EigenOptions::default())
}

/// Mass-symmetrized form `M^{1/2} A M^{-1/2}`, symmetrized exactly.
pub fn symmetrized(op: &OperatorMatrix) -> CsrMatrix {
    let d: Vec<f64> = op.mass.iter().map(|m| m.sqrt()).collect();
    let dinv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    let s = op.matrix.scale_rows_cols(&d, &dinv);
    s.lincomb(0.5, &s.transpose(), 0.5).expect("square")
}

pub fn eigen_solve_with(op: &OperatorMatrix, m: usize, opts: EigenOptions<'_>) -> Result<EigenResult> {
    let n = op.dim();
    if m == 0 || m > n {
        return Err(invalid("m", format!("need 1 ≤ m ≤ {n}, got {m}")));
    }
    let asym = op.mass_asymmetry();
    if asym > SELF_ADJOINT_TOL {
        return Err(Error::NotSelfAdjoint { asymmetry: asym });
    }
    let d: Vec<f64> = op.mass.iter().map(|m| m.sqrt()).collect();
    let s = symmetrized(op);
    let norm_bound = s.norm_bound();
    let (values, vectors, iterations, method) = if n <= opts.dense_limit {
        let eig = SymmetricEigen::new(s.to_dense());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals: Vec<f64> = order[..m].iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = DMatrix::from_fn(n, m, |r, c| eig.eigenvectors[(r, order[c])]);
        (vals, vecs, 0, EigenMethod::Dense)
    } else {
        let k = (m + (m / 4).max(4)).min(n);
        let x0 = match &opts.initial {
            Some(x) if x.nrows() == n => {
                let mut x = x.clone();
                for (r, &dv) in d.iter().enumerate() {
                    x.row_mut(r).scale_mut(dv);
                }
                pad_random(x, k, 0x5eed)
            }
            _ => pad_random(DMatrix::zeros(n, 0), k, 0x5eed),
        };
        let diag: Vec<f64> = (0..n).map(|i| s.get(i, i)).collect();
        let jacobi = |r: &DMatrix<f64>| {
            let mut out = r.clone();
            for (i, &g) in diag.iter().enumerate() {
                if g > 0.0 {
                    out.row_mut(i).unscale_mut(g);
                }
            }
            out
        };
        let scaled = |r: &DMatrix<f64>| -> DMatrix<f64> {
            match opts.preconditioner {
                Some(p) => {
                    let mut y = r.clone();
                    for (i, &dv) in d.iter().enumerate() {
                        y.row_mut(i).unscale_mut(dv);
                    }
                    let mut z = p(&y);
                    for (i, &dv) in d.iter().enumerate() {
                        z.row_mut(i).scale_mut(dv);
                    }
                    z
                }
                None => jacobi(r),
            }
        };
        let (vals, vecs, it) = lobpcg(&s, x0, m, &scaled, opts.tol * norm_bound, opts.max_iter)?;
        (vals, vecs, it, EigenMethod::Lobpcg)
    };
    let av = s.mul_dense(&vectors);
    let residuals: Vec<f64> = (0..m)
        .map(|c| (av.column(c) - vectors.column(c) * values[c]).norm())
        .collect();
    let mut out_vecs = vectors;
    for (r, &dv) in d.iter().enumerate() {
        out_vecs.row_mut(r).unscale_mut(dv);
    }
    debug!("eigen_solve: n={n} m={m} method={method:?} iterations={iterations}");
    Ok(EigenResult {
        values,
        residuals,
        norm_bound,
        method,
        iterations,
        vectors: out_vecs,
    })
}

fn pad_random(x: DMatrix<f64>, k: usize, seed: u64) -> DMatrix<f64> {
    let n = x.nrows();
    let have = x.ncols().min(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DMatrix::zeros(n, k);
    out.columns_mut(0, have).copy_from(&x.columns(0, have));
    for c in have..k {
        for r in 0..n {
            out[(r, c)] = StandardNormal.sample(&mut rng);
        }
    }
    out
}

fn hcat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Orthonormalizes the columns of `z` (carrying `az = A z` along) by
/// eigen-decomposing the scaled Gram matrix; nearly dependent directions
/// are dropped.
fn svqb(z: &DMatrix<f64>, az: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let norms: Vec<f64> = z.column_iter().map(|c| c.norm()).collect();
    let keep: Vec<usize> = (0..z.ncols()).filter(|&c| norms[c] > 1e-300).collect();
    let zs = DMatrix::from_fn(z.nrows(), keep.len(), |r, c| z[(r, keep[c])] / norms[keep[c]]);
    let azs = DMatrix::from_fn(z.nrows(), keep.len(), |r, c| az[(r, keep[c])] / norms[keep[c]]);
    if keep.is_empty() {
        return (zs, azs);
    }
    let g = zs.transpose() * &zs;
    let eig = SymmetricEigen::new(g);
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    let good: Vec<usize> = (0..keep.len()).filter(|&i| eig.eigenvalues[i] > 1e-12 * top).collect();
    let c = DMatrix::from_fn(keep.len(), good.len(), |r, j| {
        eig.eigenvectors[(r, good[j])] / eig.eigenvalues[good[j]].sqrt()
    });
    (zs * &c, azs * c)
}

/// Removes the span of orthonormal `x` from `z` (twice, for stability).
fn project_out(
    x: &DMatrix<f64>,
    ax: &DMatrix<f64>,
    z: &mut DMatrix<f64>,
    az: &mut DMatrix<f64>,
) {
    for _ in 0..2 {
        let c = x.transpose() * &*z;
        *z -= x * &c;
        *az -= ax * &c;
    }
}

/// Rayleigh–Ritz on orthonormal `q`: the `k` lowest Ritz pairs as
/// coefficient columns.
fn ritz(q: &DMatrix<f64>, aq: &DMatrix<f64>, k: usize) -> (Vec<f64>, DMatrix<f64>) {
    let g = q.transpose() * aq;
    let g = (&g + g.transpose()) * 0.5;
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let k = k.min(order.len());
    let vals = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let v = DMatrix::from_fn(eig.eigenvectors.nrows(), k, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, v)
}

/// Block LOBPCG for the `m` smallest eigenpairs of symmetric `s`.
fn lobpcg(
    s: &CsrMatrix,
    x0: DMatrix<f64>,
    m: usize,
    prec: &dyn Fn(&DMatrix<f64>) -> DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, DMatrix<f64>, usize)> {
    let k = x0.ncols();
    let ax0 = s.mul_dense(&x0);
    let (x, ax) = svqb(&x0, &ax0);
    if x.ncols() < m {
        return Err(Error::NoConvergence("initial block is rank deficient".into()));
    }
    let (mut lam, v) = ritz(&x, &ax, k);
    let mut x = &x * &v;
    let mut ax = &ax * &v;
    let mut p: Option<(DMatrix<f64>, DMatrix<f64>)> = None;
    let mut worst = f64::INFINITY;
    for it in 0..max_iter {
        let mut r = ax.clone();
        for (c, &l) in lam.iter().enumerate() {
            r.column_mut(c).axpy(-l, &x.column(c), 1.0);
        }
        worst = (0..m).map(|c| r.column(c).norm()).fold(0.0, f64::max);
        if worst <= tol {
            let vecs = x.columns(0, m).into_owned();
            return Ok((lam[..m].to_vec(), vecs, it));
        }
        let mut w = prec(&r);
        // AW is formed after projection so only one block product is needed
        for _ in 0..2 {
            let c = x.transpose() * &w;
            w -= &x * &c;
        }
        let aw = s.mul_dense(&w);
        let (mut z, mut az) = match p.take() {
            Some((pp, app)) => (hcat(&w, &pp), hcat(&aw, &app)),
            None => (w, aw),
        };
        project_out(&x, &ax, &mut z, &mut az);
        let (mut z, mut az) = svqb(&z, &az);
        project_out(&x, &ax, &mut z, &mut az);
        let (z, az) = svqb(&z, &az);
        let q = hcat(&x, &z);
        let aq = hcat(&ax, &az);
        let (vals, v) = ritz(&q, &aq, k);
        let vz = v.rows(x.ncols(), z.ncols()).into_owned();
        p = if z.ncols() > 0 { Some((&z * &vz, &az * &vz)) } else { None };
        x = &q * &v;
        ax = &aq * &v;
        lam = vals;
    }
    Err(Error::NoConvergence(format!(
        "LOBPCG reached {max_iter} iterations with residual {worst:e} > {tol:e}"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremeEigen {
    pub min: f64,
    pub max: f64,
    /// Ritz residual bounds: the true extreme eigenvalues lie within these
    /// distances of some Ritz value.
    pub min_residual: f64,
    pub max_residual: f64,
    pub steps: usize,
}

/// Extreme eigenvalues of a symmetric operator by Lanczos with full
/// reorthogonalization.
pub fn lanczos_extreme(
    n: usize,
    apply: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
    steps: usize,
    seed: u64,
) -> Result<ExtremeEigen> {
    if n == 0 {
        return Err(Error::Empty("operator of dimension zero"));
    }
    let steps = steps.clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
    v.normalize_mut();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    for j in 0..steps {
        let mut w = DVector::from_vec(apply(v.as_slice()));
        let a = w.dot(&v);
        alpha.push(a);
        basis.push(v.clone());
        for _ in 0..2 {
            for b in &basis {
                let c = w.dot(b);
                w.axpy(-c, b, 1.0);
            }
        }
        let bn = w.norm();
        beta.push(bn);
        if bn <= 1e-14 * a.abs().max(1.0) || j + 1 == steps {
            break;
        }
        v = w / bn;
    }
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (mut imin, mut imax) = (0, 0);
    for i in 0..k {
        if eig.eigenvalues[i] < eig.eigenvalues[imin] {
            imin = i;
        }
        if eig.eigenvalues[i] > eig.eigenvalues[imax] {
            imax = i;
        }
    }
    let last = beta[k - 1];
    Ok(ExtremeEigen {
        min: eig.eigenvalues[imin],
        max: eig.eigenvalues[imax],
        min_residual: (last * eig.eigenvectors[(k - 1, imin)]).abs(),
        max_residual: (last * eig.eigenvectors[(k - 1, imax)]).abs(),
        steps: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{constant_coefficient_operator, OperatorKind};
    use crate::geometry::Point;

    fn diag_op(d: &[f64], mass: Vec<f64>) -> OperatorMatrix {
        OperatorMatrix {
            kind: OperatorKind::ConstantCoefficient,
            matrix: CsrMatrix::diagonal(d),
            points: vec![Point::default(); d.len()],
            mass,
        }
    }

    #[test]
    fn diagonal_spectrum() {
        let r = eigen_solve(&diag_op(&[3.0, 1.0, 2.0], vec![1.0, 2.0, 0.5]), 3).unwrap();
        for (a, b) in r.values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(r.residuals.iter().all(|&x| x < 1e-14));
    }

    #[test]
    fn rejects_non_self_adjoint() {
        let m = CsrMatrix::from_rows(2, vec![vec![(0, 1.0), (1, 1.0)], vec![(1, 1.0)]]);
        let op = OperatorMatrix {
            kind: OperatorKind::L,
            matrix: m,
            mass: vec![1.0, 1.0],
            points: vec![Point::default(); 2],
        };
        assert!(matches!(eigen_solve(&op, 1), Err(Error::NotSelfAdjoint { .. })));
        assert!(eigen_solve(&diag_op(&[1.0], vec![1.0]), 2).is_err());
    }

    #[test]
    fn analytic_laplacian_spectrum_matches_dense() {
        let mesh = Mesh::Box {
            width: 1.0,
            height: 1.0,
            nx: 6,
            ny: 5,
            base: Point::new(0.0, 0.5),
        };
        let op = constant_coefficient_operator(&mesh, 1.0, 0.0).unwrap();
        let dense = eigen_solve(&op, 20).unwrap();
        for (a, b) in dense.values.iter().zip(laplacian_eigenvalues(&mesh, 20)) {
            assert!((a - b).abs() < 1e-9 * b);
        }
        let modes = laplacian_modes(&mesh, 5);
        let am = op.matrix.mul_dense(&modes);
        for (c, l) in laplacian_eigenvalues(&mesh, 5).into_iter().enumerate() {
            assert!((am.column(c) - modes.column(c) * l).norm() < 1e-9 * l);
        }
    }

    #[test]
    fn preconditioner_inverts_shifted_laplacian() {
        for mesh in [
            Mesh::interval(1.0, 9).unwrap(),
            Mesh::Box {
                width: 2.0,
                height: 1.0,
                nx: 7,
                ny: 5,
                base: Point::new(0.0, 0.5),
            },
        ] {
            let op = constant_coefficient_operator(&mesh, 1.5, 0.3).unwrap();
            let p = LaplacianPreconditioner::new(&mesh, 1.5, 0.3).unwrap();
            let n = op.dim();
            let x = DMatrix::from_fn(n, 2, |r, c| ((r * 7 + c * 3) % 5) as f64 - 2.0);
            let back = p.apply(&op.matrix.mul_dense(&x));
            assert!((back - &x).norm() < 1e-10 * x.norm());
        }
    }

    #[test]
    fn lobpcg_agrees_with_dense() {
        let mesh = Mesh::unit_box(24, Point::new(0.5, 0.0)).unwrap();
        let op = constant_coefficient_operator(&mesh, 1.0, 2.0).unwrap();
        let p = LaplacianPreconditioner::new(&mesh, 1.0, 0.0).unwrap();
        let pf = |r: &DMatrix<f64>| p.apply(r);
        let mut x0 = laplacian_modes(&mesh, 12);
        x0.iter_mut().enumerate().for_each(|(i, v)| *v += 1e-3 * ((i % 13) as f64 - 6.0));
        let lob = eigen_solve_with(
            &op,
            10,
            EigenOptions {
                dense_limit: 0,
                preconditioner: Some(&pf),
                initial: Some(x0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(lob.method, EigenMethod::Lobpcg);
        let exact: Vec<f64> = laplacian_eigenvalues(&mesh, 10).iter().map(|l| l + 2.0).collect();
        for (a, b) in lob.values.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-9 * b, "{a} vs {b}");
        }
        // without a preconditioner or start block it still converges
        let plain = eigen_solve_with(
            &op,
            3,
            EigenOptions {
                dense_limit: 0,
                max_iter: 2000,
                ..Default::default()
            },
        )
        .unwrap();
        for (a, b) in plain.values.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-7 * b);
        }
    }

    #[test]
    fn lanczos_brackets_diagonal() {
        let d: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let f = |x: &[f64]| x.iter().zip(&d).map(|(a, b)| a * b).collect::<Vec<_>>();
        let e = lanczos_extreme(200, &f, 120, 1).unwrap();
        let mx = d.iter().cloned().fold(f64::MIN, f64::max);
        let mn = d.iter().cloned().fold(f64::MAX, f64::min);
        assert!((e.max - mx).abs() <= e.max_residual + 1e-10);
        assert!((e.min - mn).abs() <= e.min_residual + 1e-10);
    }
}
