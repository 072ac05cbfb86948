//! Solvers for the two terminal equations of a reduction: the symmetric Stein
//! equation `X = A₀ᵀXA₀ + Q₀` and a regular DARE with `R` and `A₀`
//! nonsingular.

use crate::error::{Error, Result};
use crate::linalg::{
    self, assemble, asymmetry, block, kernel_basis_scaled, max_norm, pinv_scaled, rank_scaled,
    spectral_norm, spectral_radius, symmetrize, trailing_right_singular_vectors, RealMatrix,
    Tolerance,
};
use crate::popov::PopovTriple;
use crate::solution::{SolutionFamily, SolutionSet};

/// Largest order for which all invariant subspaces are enumerated.
pub const MAX_ENUMERATION_ORDER: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct SteinEquation {
    a0: RealMatrix,
    q0: RealMatrix,
}

impl SteinEquation {
    pub fn new(a0: RealMatrix, q0: RealMatrix, tol: &Tolerance) -> Result<Self> {
        if !a0.is_square() || a0.shape() != q0.shape() {
            return Err(Error::DimensionMismatch(format!(
                "Stein equation needs square A0 and Q0 of equal size, got {}x{} and {}x{}",
                a0.nrows(),
                a0.ncols(),
                q0.nrows(),
                q0.ncols()
            )));
        }
        let asym = asymmetry(&q0);
        if asym > tol.abs_residual {
            return Err(Error::AsymmetryBeyondTolerance {
                name: "Q0",
                asymmetry: asym,
            });
        }
        Ok(SteinEquation {
            a0,
            q0: symmetrize(&q0),
        })
    }

    pub fn a0(&self) -> &RealMatrix {
        &self.a0
    }

    pub fn q0(&self) -> &RealMatrix {
        &self.q0
    }

    pub fn order(&self) -> usize {
        self.a0.nrows()
    }

    /// `‖A₀ᵀXA₀ + Q₀ − X‖_max`.
    pub fn residual(&self, x: &RealMatrix) -> f64 {
        max_norm(&(self.a0.transpose() * x * &self.a0 + &self.q0 - x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SteinStatus {
    Unique,
    Family(usize),
    Inconsistent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteinSolveReport {
    pub status: SteinStatus,
    /// Empty when inconsistent.
    pub solutions: SolutionSet,
}

/// Index pairs `(i, j)`, `i ≤ j`, of the half-vectorization, column-major
/// over the upper triangle.
fn svec_pairs(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(k * (k + 1) / 2);
    for j in 0..k {
        for i in 0..=j {
            out.push((i, j));
        }
    }
    out
}

// Off-diagonal coordinates carry a √2 weight so that the Euclidean norm of
// svec(X) equals the Frobenius norm of X.
fn svec(x: &RealMatrix, pairs: &[(usize, usize)]) -> RealMatrix {
    RealMatrix::from_fn(pairs.len(), 1, |p, _| {
        let (i, j) = pairs[p];
        if i == j {
            x[(i, i)]
        } else {
            0.5 * (x[(i, j)] + x[(j, i)]) * std::f64::consts::SQRT_2
        }
    })
}

fn smat(v: &[f64], k: usize, pairs: &[(usize, usize)]) -> RealMatrix {
    let mut x = RealMatrix::zeros(k, k);
    for (p, &(i, j)) in pairs.iter().enumerate() {
        if i == j {
            x[(i, i)] = v[p];
        } else {
            let e = v[p] / std::f64::consts::SQRT_2;
            x[(i, j)] = e;
            x[(j, i)] = e;
        }
    }
    x
}

/// Solves `X = A₀ᵀXA₀ + Q₀` over symmetric `X`.
///
/// A singular but consistent system yields the minimum-norm particular
/// solution plus a Frobenius-orthonormal basis of `{H = A₀ᵀHA₀}`.
pub fn solve_stein(eq: &SteinEquation, tol: &Tolerance) -> SteinSolveReport {
    let k = eq.order();
    if k == 0 {
        return SteinSolveReport {
            status: SteinStatus::Unique,
            solutions: SolutionSet::from_isolated(vec![RealMatrix::zeros(0, 0)]),
        };
    }
    let (op, scale, x) = stein_least_squares(&eq.a0, &eq.q0, tol);
    let pairs = svec_pairs(k);
    let p = pairs.len();
    let rank = rank_scaled(&op, scale, tol);
    if rank == p {
        return SteinSolveReport {
            status: SteinStatus::Unique,
            solutions: SolutionSet::from_isolated(vec![x]),
        };
    }
    if eq.residual(&x) > tol.abs_residual {
        return SteinSolveReport {
            status: SteinStatus::Inconsistent,
            solutions: SolutionSet::empty(),
        };
    }
    let null = kernel_basis_scaled(&op, scale, tol);
    let basis: Vec<RealMatrix> = (0..null.ncols())
        .map(|c| smat(null.column(c).as_slice(), k, &pairs))
        .collect();
    SteinSolveReport {
        status: SteinStatus::Family(basis.len()),
        solutions: SolutionSet::new(vec![SolutionFamily::new(x, basis)]),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DareSolveReport {
    /// Solutions sorted by trace, then lexicographically by row-major entries.
    pub solutions: SolutionSet,
    /// Index of the stabilizing solution, if one was found.
    pub stabilizing: Option<usize>,
    /// False when the order exceeded [`MAX_ENUMERATION_ORDER`] and only the
    /// stabilizing solution was sought.
    pub exhaustive: bool,
}

/// Real invariant subspace candidates contributed by one eigenvalue cluster.
struct ClusterOptions {
    /// Bases of the nonzero candidate subspaces, each with its dimension.
    bases: Vec<RealMatrix>,
    inside_unit_circle: bool,
}

fn matrix_power(m: &RealMatrix, e: usize) -> RealMatrix {
    let mut out = RealMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..e {
        out = &out * m;
    }
    out
}

/// Groups eigenvalues whose distance is below `eps`, keeping one
/// representative (the mean) per cluster of the closed upper half plane.
fn clusters(eigs: &[(f64, f64)], eps: f64) -> Vec<((f64, f64), usize)> {
    let mut remaining: Vec<(f64, f64)> = eigs.to_vec();
    let mut out = Vec::new();
    while let Some(seed) = remaining.pop() {
        let mut members = vec![seed];
        let mut i = 0;
        while i < remaining.len() {
            let near = members
                .iter()
                .any(|m| (m.0 - remaining[i].0).hypot(m.1 - remaining[i].1) <= eps);
            if near {
                members.push(remaining.swap_remove(i));
                i = 0;
            } else {
                i += 1;
            }
        }
        let n = members.len() as f64;
        let re = members.iter().map(|z| z.0).sum::<f64>() / n;
        let im = members.iter().map(|z| z.1).sum::<f64>() / n;
        if im >= -eps {
            out.push(((re, if im.abs() <= eps { 0.0 } else { im }), members.len()));
        }
    }
    out.sort_by(|a, b| a.0 .0.total_cmp(&b.0 .0).then(a.0 .1.total_cmp(&b.0 .1)));
    out
}

fn cluster_options(
    z: &RealMatrix,
    center: (f64, f64),
    mult: usize,
    tol: &Tolerance,
) -> ClusterOptions {
    let d = z.nrows();
    let id = RealMatrix::identity(d, d);
    let (re, im) = center;
    let (factor, per_block) = if im == 0.0 {
        (z - &id * re, 1)
    } else {
        (z * z - z * (2.0 * re) + &id * (re * re + im * im), 2)
    };
    let mut bases = Vec::new();
    // Nested kernels of powers of the factor: the full generalized eigenspace
    // has a known dimension; smaller powers are decided numerically.
    for e in 1..mult {
        let p = matrix_power(&factor, e);
        let loose = Tolerance {
            rel: tol.rel.sqrt(),
            ..*tol
        };
        let dim = d - rank_scaled(&p, spectral_norm(&p).max(1.0), &loose);
        if dim > 0 && dim < per_block * mult && dim.is_multiple_of(per_block) {
            bases.push(trailing_right_singular_vectors(&p, dim));
        }
    }
    let full = matrix_power(&factor, mult);
    bases.push(trailing_right_singular_vectors(&full, per_block * mult));
    bases.dedup_by(|a, b| a.ncols() == b.ncols());
    ClusterOptions {
        bases,
        inside_unit_circle: re.hypot(im) < 1.0,
    }
}

/// The symplectic matrix `Z` with `Z[I; X] = [I; X]·A_c` for every DARE
/// solution `X`, built with `F = A₀⁻ᵀ` and `G = BR⁻¹Bᵀ`.
fn symplectic_matrix(a0: &RealMatrix, g: &RealMatrix, q0: &RealMatrix) -> Option<RealMatrix> {
    let k = a0.nrows();
    let f = linalg::solve(&a0.transpose(), &RealMatrix::identity(k, k))?;
    let gf = g * &f;
    let top_left = a0 + &gf * q0;
    let top_right = -&gf;
    let bottom_left = -(&f * q0);
    Some(assemble(&[&[&top_left, &top_right], &[&bottom_left, &f]]))
}

fn sort_solutions(xs: &mut [RealMatrix]) {
    xs.sort_by(|a, b| {
        a.trace().total_cmp(&b.trace()).then_with(|| {
            let ra = a.transpose();
            let rb = b.transpose();
            ra.iter()
                .zip(rb.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
}

/// The symmetric-subspace operator of `X ↦ X − AᵀXA`, its rank scale, and
/// the minimum-norm least-squares solution for right-hand side `q`.
fn stein_least_squares(
    a: &RealMatrix,
    q: &RealMatrix,
    tol: &Tolerance,
) -> (RealMatrix, f64, RealMatrix) {
    let k = a.nrows();
    let pairs = svec_pairs(k);
    let p = pairs.len();
    let mut op = RealMatrix::zeros(p, p);
    for c in 0..p {
        let mut unit = vec![0.0; p];
        unit[c] = 1.0;
        let e = smat(&unit, k, &pairs);
        let image = &e - a.transpose() * &e * a;
        op.set_column(c, &svec(&image, &pairs).column(0));
    }
    let scale = 1.0 + spectral_norm(a).powi(2);
    let x_vec = pinv_scaled(&op, scale, tol) * svec(q, &pairs);
    let x = smat(x_vec.as_slice(), k, &pairs);
    (op, scale, x)
}

/// Enumerates the real symmetric solutions of a DARE with `R` and
/// `A − BR⁻¹Sᵀ` nonsingular.
pub fn solve_regular_dare(triple: &PopovTriple, tol: &Tolerance) -> Result<DareSolveReport> {
    if triple.r_singular(tol) {
        return Err(Error::PreconditionViolated("R is singular".into()));
    }
    if triple.a0_singular(tol) {
        return Err(Error::PreconditionViolated(
            "A - B R^-1 S^T is singular".into(),
        ));
    }
    let k = triple.n();
    let sigma0 = triple.eliminate_cross(tol);
    let (a0, q0) = (sigma0.a().clone(), sigma0.q().clone());

    let input_cut = tol.cutoff(k, triple.m(), triple.scales().input);
    if k == 0 || max_norm(triple.b()) <= input_cut {
        let report = solve_stein(&SteinEquation::new(a0.clone(), q0, tol)?, tol);
        if report.solutions.is_empty() {
            return Err(Error::NoRealSolutionFound(
                "terminal Stein equation is inconsistent".into(),
            ));
        }
        let stabilizing =
            (report.status == SteinStatus::Unique && spectral_radius(&a0) < 1.0).then_some(0);
        return Ok(DareSolveReport {
            solutions: report.solutions,
            stabilizing,
            exhaustive: true,
        });
    }

    let r_inv = linalg::solve(triple.r(), &RealMatrix::identity(triple.m(), triple.m()))
        .ok_or_else(|| Error::PreconditionViolated("R is singular".into()))?;
    let g = symmetrize(&(triple.b() * r_inv * triple.b().transpose()));
    let z = symplectic_matrix(&a0, &g, &q0)
        .ok_or_else(|| Error::PreconditionViolated("A0 is singular".into()))?;

    let eigs = linalg::eigenvalues(&z);
    let rho = eigs.iter().map(|e| e.0.hypot(e.1)).fold(1.0, f64::max);
    let options: Vec<ClusterOptions> = clusters(&eigs, 1e-6 * rho)
        .into_iter()
        .map(|(c, mult)| cluster_options(&z, c, mult, tol))
        .collect();

    let exhaustive = k <= MAX_ENUMERATION_ORDER;
    let mut subspaces: Vec<RealMatrix> = Vec::new();
    if exhaustive {
        enumerate_subspaces(&options, 0, k, Vec::new(), &mut subspaces);
    } else {
        let stable: Vec<&RealMatrix> = options
            .iter()
            .filter(|o| o.inside_unit_circle)
            .filter_map(|o| o.bases.last())
            .collect();
        if stable.iter().map(|b| b.ncols()).sum::<usize>() == k {
            subspaces.push(hstack(&stable));
        }
    }

    let mut found: Vec<RealMatrix> = Vec::new();
    for y in &subspaces {
        let Some(x) = graph_solution(y, k, tol) else {
            continue;
        };
        let x = newton_polish(triple, x, tol)?;
        if !triple.accepts(&x, tol)? {
            continue;
        }
        let d = triple.derived(&x, tol)?;
        if rank_scaled(&d.r_x, d.r_x_scale, tol) < triple.m() {
            continue;
        }
        let eps = tol.abs_residual * 1.0_f64.max(max_norm(&x));
        if !found.iter().any(|f| max_norm(&(f - &x)) <= eps) {
            found.push(x);
        }
    }
    if found.is_empty() {
        return Err(Error::NoRealSolutionFound(format!(
            "none of {} candidate invariant subspaces yields a real symmetric solution",
            subspaces.len()
        )));
    }
    sort_solutions(&mut found);
    let mut stabilizing = None;
    for (i, x) in found.iter().enumerate() {
        if spectral_radius(&triple.closed_loop(x, tol)?) < 1.0 {
            stabilizing = Some(i);
            break;
        }
    }
    Ok(DareSolveReport {
        solutions: SolutionSet::from_isolated(found),
        stabilizing,
        exhaustive,
    })
}

fn hstack(parts: &[&RealMatrix]) -> RealMatrix {
    let rows = parts.first().map_or(0, |p| p.nrows());
    let cols = parts.iter().map(|p| p.ncols()).sum();
    let mut out = RealMatrix::zeros(rows, cols);
    let mut c = 0;
    for p in parts {
        out.view_mut((0, c), p.shape()).copy_from(*p);
        c += p.ncols();
    }
    out
}

fn enumerate_subspaces(
    options: &[ClusterOptions],
    idx: usize,
    remaining: usize,
    chosen: Vec<&RealMatrix>,
    out: &mut Vec<RealMatrix>,
) {
    if remaining == 0 {
        out.push(hstack(&chosen));
        return;
    }
    if idx == options.len() {
        return;
    }
    enumerate_subspaces(options, idx + 1, remaining, chosen.clone(), out);
    for b in &options[idx].bases {
        if b.ncols() <= remaining {
            let mut next = chosen.clone();
            next.push(b);
            enumerate_subspaces(options, idx + 1, remaining - b.ncols(), next, out);
        }
    }
}

/// `X = Y₂Y₁⁻¹` for a `2k × k` subspace basis with invertible top block.
fn graph_solution(y: &RealMatrix, k: usize, tol: &Tolerance) -> Option<RealMatrix> {
    let y1 = block(y, 0, 0, k, k);
    let y2 = block(y, k, 0, k, k);
    if linalg::rank(&y1, tol) < k {
        return None;
    }
    let x = linalg::solve(&y1.transpose(), &y2.transpose())?.transpose();
    let scale = 1.0_f64.max(max_norm(&x));
    if asymmetry(&x) > 1e-6 * scale {
        return None;
    }
    Some(symmetrize(&x))
}

/// A few Newton steps on the residual: `E − A_XᵀEA_X = F(X)`, solved in the
/// least-squares sense, kept only while the residual shrinks.
fn newton_polish(triple: &PopovTriple, mut x: RealMatrix, tol: &Tolerance) -> Result<RealMatrix> {
    let residual = |x: &RealMatrix| -> Result<(RealMatrix, RealMatrix)> {
        let d = triple.derived(x, tol)?;
        let f = triple.a().transpose() * x * triple.a() - &d.s_x * &d.k_x + triple.q() - x;
        Ok((symmetrize(&f), d.a_x))
    };
    let (mut f, mut a_x) = residual(&x)?;
    for _ in 0..4 {
        let norm = max_norm(&f);
        if norm <= 1e-3 * tol.abs_residual {
            break;
        }
        let (_, _, step) = stein_least_squares(&a_x, &f, tol);
        let next = symmetrize(&(&x + step));
        let (f_next, a_next) = residual(&next)?;
        if max_norm(&f_next) >= norm || f_next.iter().any(|v| !v.is_finite()) {
            break;
        }
        (x, f, a_x) = (next, f_next, a_next);
    }
    Ok(x)
}

/// Iterates the Riccati map from `x_init`. Returns the limit when successive
/// iterates differ by at most `abs_residual` within `max_iter` steps.
pub fn dare_fixed_point_oracle(
    triple: &PopovTriple,
    x_init: &RealMatrix,
    max_iter: usize,
    tol: &Tolerance,
) -> Option<RealMatrix> {
    let (a, b, q, r, s) = (triple.a(), triple.b(), triple.q(), triple.r(), triple.s());
    let mut x = x_init.clone();
    for _ in 0..max_iter {
        let r_x = r + b.transpose() * &x * b;
        let s_x = a.transpose() * &x * b + s;
        let gain = linalg::solve(&r_x, &s_x.transpose())?;
        let next = symmetrize(&(a.transpose() * &x * a - &s_x * gain + q));
        if !linalg::all_finite(&next) {
            return None;
        }
        let step = max_norm(&(&next - &x));
        x = next;
        if step <= tol.abs_residual {
            return Some(x);
        }
    }
    None
}
