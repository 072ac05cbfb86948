//! The extended symplectic pencil `N − zM` of a Popov triple and the
//! singularity diagnostics read off from it.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{assemble, rank_scaled, spectral_norm, RealMatrix, Tolerance};
use crate::popov::PopovTriple;
use crate::solution::SolutionSet;

/// Seed used when none is supplied.
pub const DEFAULT_SEED: u64 = 0x5eed_0f9e_7c11;

#[derive(Clone, Debug, PartialEq)]
pub struct PencilPair {
    pub m: RealMatrix,
    pub n: RealMatrix,
}

impl PencilPair {
    pub fn size(&self) -> usize {
        self.m.nrows()
    }
}

/// `M = [[I, 0, 0], [0, −Aᵀ, 0], [0, −Bᵀ, 0]]`,
/// `N = [[A, 0, B], [Q, −I, S], [Sᵀ, 0, R]]`.
pub fn build_pencil(sigma: &PopovTriple) -> PencilPair {
    let (n, m) = (sigma.n(), sigma.m());
    let i_n = RealMatrix::identity(n, n);
    let z_nn = RealMatrix::zeros(n, n);
    let z_nm = RealMatrix::zeros(n, m);
    let z_mn = RealMatrix::zeros(m, n);
    let z_mm = RealMatrix::zeros(m, m);
    let neg_at = -sigma.a().transpose();
    let neg_bt = -sigma.b().transpose();
    let neg_i = -&i_n;
    let st = sigma.s().transpose();
    let big_m = assemble(&[
        &[&i_n, &z_nn, &z_nm],
        &[&z_nn, &neg_at, &z_nm],
        &[&z_mn, &neg_bt, &z_mm],
    ]);
    let big_n = assemble(&[
        &[sigma.a(), &z_nn, sigma.b()],
        &[sigma.q(), &neg_i, sigma.s()],
        &[&st, &z_mn, sigma.r()],
    ]);
    PencilPair { m: big_m, n: big_n }
}

/// Whether `det(N − zM)` is nonzero at one of `size + 2` pseudo-random
/// complex points drawn from `seed`.
pub fn is_regular(p: &PencilPair, seed: u64, tol: &Tolerance) -> bool {
    let d = p.size();
    if d == 0 {
        return true;
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let norm_m = spectral_norm(&p.m);
    let norm_n = spectral_norm(&p.n);
    (0..d + 2).any(|_| {
        let re: f64 = rng.gen_range(-2.0..2.0);
        let im: f64 = rng.gen_range(-2.0..2.0);
        // Real embedding of X + iY with X = N − re·M, Y = −im·M.
        let x = &p.n - &p.m * re;
        let y = &p.m * (-im);
        let neg_y = -&y;
        let embedded = assemble(&[&[&x, &neg_y], &[&y, &x]]);
        let scale = norm_n + re.hypot(im) * norm_m;
        rank_scaled(&embedded, scale, tol) == 2 * d
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnosis {
    pub pencil_regular: bool,
    pub n_singular: bool,
    pub r_singular: bool,
    pub a0_singular: bool,
    pub rank_r: usize,
    /// Requires at least one verified solution.
    pub rank_rx: Option<usize>,
    /// `rank R < rank R_X` or `A₀` singular.
    pub closed_loop_singular_predicted: Option<bool>,
    /// Numerical singularity of `A_X` at the supplied solutions.
    pub closed_loop_singular_observed: Option<bool>,
}

/// Fills the diagnostics for `sigma`; rank and closed-loop entries are set
/// only when `solutions` is supplied and nonempty.
///
/// Fails with [`Error::InvariantViolation`] when `N` singular does not match
/// (`R` singular or `A₀` singular), when `rank R_X` or the closed-loop
/// singularity differs between solutions, or when prediction and observation
/// disagree on a regular pencil.
pub fn diagnose(
    sigma: &PopovTriple,
    tol: &Tolerance,
    seed: u64,
    solutions: Option<&SolutionSet>,
) -> Result<Diagnosis> {
    let pencil = build_pencil(sigma);
    let size = pencil.size();
    let n_singular = rank_scaled(&pencil.n, spectral_norm(&pencil.n), tol) < size;
    let rank_r = sigma.rank_r(tol);
    let r_singular = rank_r < sigma.m();
    let a0_singular = sigma.a0_singular(tol);
    if n_singular != (r_singular || a0_singular) {
        return Err(Error::InvariantViolation(format!(
            "N singular = {n_singular} but R singular = {r_singular}, A0 singular = {a0_singular}"
        )));
    }
    let pencil_regular = is_regular(&pencil, seed, tol);

    let mut rank_rx = None;
    let mut observed = None;
    for x in solutions.map(|s| s.samples()).unwrap_or_default() {
        let d = sigma.derived(&x, tol)?;
        let r = rank_scaled(&d.r_x, d.r_x_scale, tol);
        if rank_rx.is_some_and(|prev| prev != r) {
            return Err(Error::InvariantViolation(
                "rank R_X differs between solutions".into(),
            ));
        }
        rank_rx = Some(r);
        let scale = sigma.scales().state.max(spectral_norm(&d.a_x));
        let singular = rank_scaled(&d.a_x, scale, tol) < sigma.n();
        if observed.is_some_and(|prev| prev != singular) {
            return Err(Error::InvariantViolation(
                "closed-loop singularity differs between solutions".into(),
            ));
        }
        observed = Some(singular);
    }
    let predicted = rank_rx.map(|r| rank_r < r || a0_singular);
    if pencil_regular && predicted.is_some() && predicted != observed {
        return Err(Error::InvariantViolation(format!(
            "closed loop predicted singular = {predicted:?}, observed {observed:?}"
        )));
    }
    Ok(Diagnosis {
        pencil_regular,
        n_singular,
        r_singular,
        a0_singular,
        rank_r,
        rank_rx,
        closed_loop_singular_predicted: predicted,
        closed_loop_singular_observed: observed,
    })
}
